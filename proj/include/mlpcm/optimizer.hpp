#pragma once

// Particle-swarm search with adaptive Monte-Carlo budgets, the outage
// objective for STBC shaping parameters, SNR line search and the joint
// code / labelling / STBC design loop.

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "mlpcm/multilevel.hpp"
#include "mlpcm/stbc.hpp"

namespace mlpcm {

struct SearchSpace {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dims() const noexcept { return lower.size(); }
  void validate() const;
};

/// Default bounds of the shape layout of a family (angles in degrees).
SearchSpace default_space(Family family);

/// Sample budget as a function of the current best value: the last tier
/// whose threshold exceeds the best value applies.
struct McSchedule {
  std::vector<std::pair<double, std::size_t>> tiers{
      {std::numeric_limits<double>::infinity(), 1000}, {0.1, 10000}, {0.02, 100000}};

  std::size_t budget(double best) const;
  std::size_t largest() const;
  void validate() const;
};

struct PsoConfig {
  std::size_t particles = 30;
  /// Evaluation rounds, the initial swarm included.
  std::size_t iterations = 100;
  double inertia = 0.72;
  double cognitive = 1.49;
  double social = 1.49;
  McSchedule schedule;
  std::uint64_t seed = 0;
};

/// objective(x, sample budget, stream index). Particles of one iteration
/// share the stream index so they are compared on common random numbers.
using Objective = std::function<double(std::span<const double>, std::size_t, std::uint64_t)>;

struct PsoTraceEntry {
  std::size_t iteration = 0;
  double best_value = 0.0;
  std::size_t budget = 0;
};

struct PsoResult {
  std::vector<double> best;
  /// Best value re-evaluated at the largest budget.
  double value = 0.0;
  /// Best value as recorded during the search.
  double search_value = 0.0;
  std::vector<PsoTraceEntry> trace;
  std::vector<std::size_t> evaluation_budgets;
};

PsoResult pso_minimize(const Objective& objective, const SearchSpace& space, const PsoConfig& cfg);

using CoefficientEncoding = std::function<std::vector<cplx>(std::span<const double>)>;

struct OutageObjectiveOptions {
  std::size_t nr = 2;
  /// Cap on MI samples per channel realization (early stopping applies).
  std::size_t mc = 400;
  std::uint64_t seed = 0;
  /// Defaults to shaped_coefficients(family, x).
  CoefficientEncoding encoding;
};

/// x -> outage probability of the induced code at the given SNR and
/// total rate r_tot (fraction of the B label bits). Infeasible vectors
/// evaluate to 1.
Objective objective_outage(Family family, Constellation constellation, bool tv, double snr_db, double r_tot,
                           const OutageObjectiveOptions& opts = {});

struct SnrSearchResult {
  double snr = 0.0;
  double value = 0.0;
  bool non_monotone = false;
  std::vector<std::pair<double, double>> evaluations;
};

/// Thrown when no grid point meets the target.
class SnrNotFound : public Error {
 public:
  SnrNotFound(const std::string& what, double best_snr, double best_value)
      : Error(Errc::not_found, what), best_snr(best_snr), best_value(best_value) {}
  double best_snr;
  double best_value;
};

/// Smallest grid SNR in [lo, hi] (step `step`) with evaluate(snr) <= target.
/// Increases larger than `tolerance` along the way set non_monotone.
SnrSearchResult min_snr_for_target(const std::function<double(double)>& evaluate, double target, double lo, double hi,
                                   double step, double tolerance = 0.0);

struct JointOptions {
  std::size_t n = 64;
  double r_tot = 0.5;
  std::size_t nr = 2;
  Measure measure = Measure::frobenius;
  double rel_threshold = 0.0;
  std::size_t ranking_trials = 2000;
  std::size_t min_errors = 100;
  std::uint64_t seed = 0;
  CoefficientEncoding encoding;
};

struct JointResult {
  StbcSpec spec;
  SetPartitionMap spm;
  MlpcmCode code;
  double fer = 1.0;
  PsoResult search;
};

/// The spec -> labelling -> ranked code -> FER pipeline for one vector,
/// with `frames` frames. Returns FER 1 for infeasible vectors.
double joint_pipeline_fer(Family family, std::span<const double> x, const Constellation& constellation, bool tv,
                          double snr_db, std::size_t frames, std::uint64_t stream, const JointOptions& opts,
                          JointResult* out = nullptr);

/// PSO over the STBC parameters with joint_pipeline_fer as the objective.
/// The schedule's budgets are frame counts.
JointResult joint_design(Family family, const SearchSpace& space, const Constellation& constellation, bool tv,
                         double snr_db, const PsoConfig& cfg, const JointOptions& opts);

}  // namespace mlpcm
