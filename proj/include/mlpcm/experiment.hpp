#pragma once

// Experiment configs, the pipelines behind the CLI subcommands, and the
// result table they all emit.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mlpcm/optimizer.hpp"
#include "mlpcm/serialize.hpp"

namespace mlpcm {

inline constexpr const char* kToolVersion = "mlpcm 1.0.0";
inline constexpr const char* kSnrConvention =
    "Es/N0 per receive antenna with E||S||_F^2 = 1 over L channel uses: N0 = 1 / (L * 10^(snr_db / 10))";

struct StbcConfig {
  Family family = Family::alamouti;
  ConstellationKind constellation = ConstellationKind::qpsk;
  bool tv = false;
  std::vector<cplx> coeffs;
  std::vector<double> shape;
  std::size_t nt = 2;

  StbcSpec build() const;
};

struct LabellingConfig {
  Measure measure = Measure::frobenius;
  double threshold = 0.0;
  bool identity = false;
  /// SNR at which the bound-based measures are evaluated.
  std::optional<double> design_snr;
  std::size_t omega_mc = 100000;
  std::string file;
};

struct CodeConfig {
  std::size_t n = 32;
  /// ranking | outage | uniform
  std::string rule = "ranking";
  std::optional<double> design_snr;
  std::size_t trials = 2000;
  /// Count every genie-aided error, not only the first one per level.
  bool count_all = true;
  std::size_t realizations = 10000;
  std::size_t mc = 100;
  double growth = 1.05;
  std::string file;
};

struct BudgetConfig {
  std::size_t max_frames = 10000;
  std::size_t min_errors = 100;
  std::size_t block = 128;
  std::size_t realizations = 10000;
  std::size_t mc = 400;
};

struct ExperimentConfig {
  std::string kind;
  std::uint64_t seed = 1;
  StbcConfig stbc;
  std::size_t nr = 2;
  std::vector<double> snr_db;
  double rate = 0.5;
  std::optional<double> target;
  std::size_t pairs = 8;
  LabellingConfig labelling;
  CodeConfig code;
  BudgetConfig budget;
  PsoConfig pso;
  JointOptions joint;
  Json raw;
};

/// Parses a JSON config tree; the experiment kind may be overridden.
ExperimentConfig parse_config(const Json& j, const std::string& kind_override = "");
/// JSON, or TOML when the file name ends in .toml.
Json load_config_file(const std::string& path);

/// "inf" in an SNR grid means the noiseless limit.
NoiseSpec noise_for(double snr_db, std::size_t l);

struct ResultRow {
  double snr_db = 0.0;
  std::string metric;
  double value = 0.0;
  std::size_t events = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double wall_time = 0.0;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  Json manifest = Json::object();

  void write_csv(std::ostream& out) const;
  Json to_json() const;
};

std::string format_g6(double v);

// Pipeline pieces shared by the subcommands.
Codebook build_codebook(const ExperimentConfig& cfg);
SetPartitionMap build_labelling(const ExperimentConfig& cfg, const Codebook& cb);
MlpcmCode build_code(const ExperimentConfig& cfg, const SetPartitionMap& spm, const Codebook& cb);

ResultTable run_outage_sweep(const ExperimentConfig& cfg);
ResultTable run_fer_sweep(const ExperimentConfig& cfg);
ResultTable run_optimize_stbc(const ExperimentConfig& cfg);
ResultTable run_design_code(const ExperimentConfig& cfg);
ResultTable run_label(const ExperimentConfig& cfg);
ResultTable run_rank(const ExperimentConfig& cfg);
ResultTable run_joint(const ExperimentConfig& cfg);
ResultTable run_bound_check(const ExperimentConfig& cfg);

ResultTable run_experiment(const ExperimentConfig& cfg);

}  // namespace mlpcm
