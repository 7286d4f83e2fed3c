#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mlpcm/experiment.hpp"
#include "mlpcm/toml_lite.hpp"

using namespace mlpcm;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / ("mlpcm_harness_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

Json fer_config() {
  return Json::parse(R"({
    "experiment": "fer", "seed": 3, "nr": 2, "rate": 0.5,
    "stbc": {"family": "alamouti", "constellation": "qpsk"},
    "code": {"n": 16, "trials": 300, "design_snr": 8},
    "budget": {"max_frames": 2000, "min_errors": 60}
  })");
}

double value_of(const ResultTable& t, const std::string& metric, double snr) {
  for (const auto& r : t.rows)
    if (r.metric == metric && (r.snr_db == snr || (std::isinf(snr) && std::isinf(r.snr_db)))) return r.value;
  FAIL("missing row " << metric);
  return 0.0;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MLPCM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("toml subset") {
  const auto j = parse_toml(R"(
experiment = "outage"   # comment
seed = 12
snr_db = [0, 5.5,
          "inf"]
[stbc]
family = "matrix_d"
shape = [0.5, 0.5, 330.0]
tv = true
[pso]
schedule = [[inf, 100], [0.1, 1000]]
)");
  CHECK(j["experiment"] == "outage");
  CHECK(j["seed"] == 12);
  CHECK(j["snr_db"].size() == 3);
  CHECK(j["snr_db"][2] == "inf");
  CHECK(j["stbc"]["tv"] == true);
  CHECK(j["stbc"]["shape"][2].get<double>() == 330.0);
  const auto cfg = parse_config(j);
  CHECK(std::isinf(cfg.snr_db[2]));
  CHECK(cfg.stbc.family == Family::matrix_d);
  CHECK(cfg.pso.schedule.tiers.size() == 2);
  CHECK_THROWS_AS(parse_toml("x = [1, 2"), Error);
}

TEST_CASE("config validation") {
  auto j = fer_config();
  j["bogus"] = 1;
  try {
    parse_config(j);
    FAIL("expected config_error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::config_error);
  }
  auto k = fer_config();
  k["code"]["rule"] = "magic";
  CHECK_THROWS_AS(parse_config(k), Error);
  auto g = fer_config();
  g["snr_db"] = Json{{"start", 0}, {"stop", 2}, {"step", 0.5}};
  CHECK(parse_config(g).snr_db.size() == 5);
}

TEST_CASE("csv format") {
  ResultTable t;
  t.rows.push_back({10.0, "fer", 0.0123456789, 12, 1000, 7, 0.5});
  t.rows.push_back({std::numeric_limits<double>::infinity(), "fer", 0.0, 0, 50, 7, 0.1});
  std::ostringstream out;
  t.write_csv(out);
  CHECK(out.str() == "snr_db,metric,value,events,trials,seed\n10,fer,0.0123457,12,1000,7\ninf,fer,0,0,50,7\n");
  CHECK(t.to_json()["rows"][1]["snr_db"] == "inf");
}

TEST_CASE("fer sweep") {
  auto j = fer_config();
  j["snr_db"] = Json::array();
  CHECK_THROWS_AS(run_fer_sweep(parse_config(j)), Error);

  j["snr_db"] = Json::array({6, 9, 12, "inf"});
  const auto t = run_fer_sweep(parse_config(j));
  CHECK(value_of(t, "fer", std::numeric_limits<double>::infinity()) == 0.0);
  // FER falls with SNR, up to two standard errors.
  std::vector<ResultRow> fer;
  for (const auto& r : t.rows)
    if (r.metric == "fer") fer.push_back(r);
  for (std::size_t i = 1; i < fer.size(); ++i) {
    const auto& a = fer[i - 1];
    const auto& b = fer[i];
    const double se = std::sqrt(a.value * (1 - a.value) / a.trials + b.value * (1 - b.value) / b.trials);
    CHECK(b.value <= a.value + 2.0 * se);
  }
  const auto again = run_fer_sweep(parse_config(j));
  CHECK(value_of(again, "fer", 9.0) == value_of(t, "fer", 9.0));
}

TEST_CASE("outage sweep") {
  auto j = Json::parse(R"({"seed": 2, "rate": 0, "snr_db": [0, 10],
    "stbc": {"family": "alamouti", "constellation": "qpsk"},
    "budget": {"realizations": 500, "mc": 50}})");
  const auto zero = run_outage_sweep(parse_config(j, "outage"));
  for (const auto& r : zero.rows)
    if (r.metric == "outage") CHECK(r.value == 0.0);

  j["rate"] = 0.5;
  const auto a = run_outage_sweep(parse_config(j, "outage"));
  const auto b = run_outage_sweep(parse_config(j, "outage"));
  CHECK(value_of(a, "outage", 0.0) == value_of(b, "outage", 0.0));
  CHECK(value_of(a, "outage", 0.0) > value_of(a, "outage", 10.0));
  CHECK(a.manifest["snr_convention"] == kSnrConvention);
}

TEST_CASE("space block code and TV MatrixE have the same outage at half rate") {
  // Both send 4 bits per channel use; the TV phases make the 2 x 1 space
  // code behave like the rate-one space-time code at the SNR of interest.
  const auto required = [](Json j) {
    j["seed"] = 5;
    j["rate"] = 0.5;
    j["nr"] = 2;
    j["budget"] = {{"realizations", 4000}, {"mc", 64}};
    j["snr_db"] = {{"start", 6}, {"stop", 20}, {"step", 0.5}};
    const auto cfg = parse_config(j, "outage");
    const auto cb = build_codebook(cfg);
    const auto batch = sample_channel_batch(cb.spec.nt, cfg.nr, cfg.budget.realizations, cfg.seed,
                                            streams::make(streams::channel, 0));
    OutageOptions o;
    o.mc = cfg.budget.mc;
    const auto eval = [&](double snr) {
      return outage_estimate(cb, 0.5 * static_cast<double>(cb.bits()), noise_for(snr, cb.spec.l), batch, o, cfg.seed)
          .probability;
    };
    return min_snr_for_target(eval, 0.01, 6.0, 24.0, 0.25).snr;
  };
  const double gc = required(Json{{"stbc", {{"family", "matrix_c"}, {"constellation", "qam16"}}}});
  const double ge = required(Json{{"stbc", {{"family", "matrix_e"}, {"constellation", "qpsk"}, {"tv", true},
                                            {"shape", {0.5, 0.5, 45.0}}}}});
  MESSAGE("G_C " << gc << " dB, TV G_E " << ge << " dB");
  CHECK(std::abs(gc - ge) <= 0.3);
}

TEST_CASE("design-code artifact round trip") {
  auto j = fer_config();
  const auto t = run_design_code(parse_config(j, "design-code"));
  const auto code = code_from_json(t.manifest["artifact"]);
  CHECK(code.n == 16);
  CHECK(code.k() == 32);
  const auto dir = scratch();
  write_json_file((dir / "code.json").string(), t.manifest["artifact"]);
  j["code"]["file"] = (dir / "code.json").string();
  j["snr_db"] = Json::array({"inf"});
  const auto fer = run_fer_sweep(parse_config(j));
  CHECK(value_of(fer, "fer", std::numeric_limits<double>::infinity()) == 0.0);
  CHECK(to_json(code_from_json(fer.manifest["code"])) == t.manifest["artifact"]);
  fs::remove_all(dir);
}

TEST_CASE("cli exit codes") {
  const auto dir = scratch();
  auto ok = fer_config();
  ok["snr_db"] = Json::array({"inf"});
  ok["budget"]["max_frames"] = 20;
  write_text(dir / "ok.json", ok.dump());
  CHECK(run_cli("fer -c " + (dir / "ok.json").string()) == 0);
  CHECK(run_cli("fer -c " + (dir / "ok.json").string() + " --out json -o " + (dir / "out.json").string()) == 0);
  CHECK(read_json_file((dir / "out.json").string())["rows"][0]["metric"] == "fer");

  write_text(dir / "bad.toml", "experiment = \"fer\"\nunknown_key = 1\n");
  CHECK(run_cli("fer -c " + (dir / "bad.toml").string()) == 2);
  CHECK(run_cli("fer") == 2);
  CHECK(run_cli("fer -c " + (dir / "missing.json").string()) == 2);

  // Nine tenths of the label bits cannot be carried at -10 dB.
  auto hard = fer_config();
  hard["rate"] = 0.95;
  hard["code"] = {{"n", 16}, {"rule", "outage"}, {"design_snr", -10}, {"realizations", 200}, {"mc", 16}, {"trials", 50}};
  write_text(dir / "hard.json", hard.dump());
  CHECK(run_cli("design-code -c " + (dir / "hard.json").string()) == 3);
  fs::remove_all(dir);
}

TEST_CASE("serialization round trips") {
  const auto spec = build_stbc(Family::matrix_d, shaped_coefficients(Family::matrix_d, std::vector<double>{0.5, 0.5, 330.0}),
                               make_constellation(ConstellationKind::qpsk), true);
  CHECK(to_json(spec_from_json(to_json(spec))) == to_json(spec));
  const auto cb = enumerate_codebook(spec);
  const auto cb2 = codebook_from_json(to_json(cb));
  REQUIRE(cb2.size() == cb.size());
  for (std::size_t i = 0; i < cb.size(); ++i) CHECK(frobenius_sq(cb2.symbols[i] - cb.symbols[i]) == 0.0);
  const auto spm = set_merge_labeling(cb, Measure::frobenius, {}, 0.0);
  CHECK(spm_from_json(to_json(spm)).perm == spm.perm);
  const auto rank = rank_bit_channels(spm, cb, 8, 6.0, 50, 1);
  CHECK(ranking_from_json(to_json(rank)).error_counts == rank.error_counts);
  const auto om = omega_moments(2, 1000, 1);
  CHECK(to_json(omega_moments_from_json(to_json(om))) == to_json(om));
  CHECK(complex_from_json(to_json(cplx(0.1, -1.0 / 3.0))) == cplx(0.1, -1.0 / 3.0));
}
