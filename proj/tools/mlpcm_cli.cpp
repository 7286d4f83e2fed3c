// mlpcm: command-line front end for the experiment pipelines.
//
//   mlpcm fer --config fer.toml --seed 7 --out json
//
// Exit status: 0 ok, 2 bad config or arguments, 3 numerical failure.

#include <omp.h>

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "mlpcm/experiment.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "csv";
  int threads = 0;
  std::string output;
  std::string save;
};

int run(const std::string& kind, const Common& c) {
  using namespace mlpcm;
  Json raw = load_config_file(c.config);
  if (c.seed) raw["seed"] = *c.seed;
  const auto cfg = parse_config(raw, kind);
  if (c.threads > 0) omp_set_num_threads(c.threads);

  const auto table = run_experiment(cfg);

  std::ofstream file;
  if (!c.output.empty()) {
    file.open(c.output);
    if (!file) fail(Errc::config_error, "cannot write '" + c.output + "'");
  }
  std::ostream& out = c.output.empty() ? std::cout : file;
  if (c.out == "json")
    out << table.to_json().dump(2) << '\n';
  else
    table.write_csv(out);

  if (!c.save.empty()) {
    if (!table.manifest.contains("artifact")) fail(Errc::config_error, kind + " produces nothing to --save");
    write_json_file(c.save, table.manifest.at("artifact"));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilevel polar coded modulation over space-time block codes"};
  app.set_version_flag("--version", std::string(mlpcm::kToolVersion));
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> kinds = {
      {"outage", "outage probability of an STBC codebook over an SNR grid"},
      {"fer", "frame error rate of a multilevel polar code"},
      {"optimize-stbc", "PSO over the STBC shape parameters (outage objective)"},
      {"design-code", "pick per-level information sets"},
      {"label", "set-merging labelling of the codebook"},
      {"rank", "genie-aided bit-channel ranking"},
      {"joint", "joint STBC / labelling / code search (FER objective)"},
      {"bound-check", "pairwise outage bounds against Monte Carlo"},
  };

  Common common;
  std::string chosen;
  for (const auto& [name, help] : kinds) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", common.config, "JSON or TOML experiment file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "override the config seed");
    sub->add_option("--out", common.out, "output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", common.threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
    sub->add_option("-o,--output", common.output, "write results here instead of stdout");
    sub->add_option("--save", common.save, "write the designed artifact (code, labelling, ...) as JSON");
    sub->callback([&chosen, name = name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    return run(chosen, common);
  } catch (const mlpcm::Error& e) {
    std::cerr << "mlpcm " << chosen << ": " << mlpcm::to_string(e.code()) << ": " << e.what() << '\n';
    return e.numerical() ? 3 : 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "mlpcm " << chosen << ": config_error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "mlpcm " << chosen << ": " << e.what() << '\n';
    return 3;
  }
}
