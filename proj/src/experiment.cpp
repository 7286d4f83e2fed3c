#include "mlpcm/experiment.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <set>

#include "mlpcm/toml_lite.hpp"

namespace mlpcm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_keys(const Json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) fail(Errc::config_error, where + " must be a table");
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) fail(Errc::config_error, "unknown key '" + key + "' in " + where);
}

double number_or_inf(const Json& v, const std::string& what) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "Inf") return kInf;
  }
  fail(Errc::config_error, what + ": expected a number or \"inf\"");
}

template <typename T>
T get(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(Errc::config_error, std::string("bad value for '") + key + "'");
  }
}

std::optional<double> get_snr(const Json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  return number_or_inf(j.at(key), key);
}

std::vector<double> parse_snr_grid(const Json& v) {
  std::vector<double> out;
  if (v.is_array()) {
    for (const auto& x : v) out.push_back(number_or_inf(x, "snr_db"));
  } else if (v.is_object()) {
    check_keys(v, {"start", "stop", "step"}, "snr_db");
    const double start = get(v, "start", 0.0), stop = get(v, "stop", 0.0), step = get(v, "step", 1.0);
    if (!(step > 0.0) || stop < start) fail(Errc::config_error, "snr_db: need start <= stop and step > 0");
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i) out.push_back(start + step * static_cast<double>(i));
  } else {
    out.push_back(number_or_inf(v, "snr_db"));
  }
  return out;
}

StbcConfig parse_stbc(const Json& j) {
  check_keys(j, {"family", "constellation", "tv", "coeffs", "shape", "nt"}, "[stbc]");
  StbcConfig s;
  try {
    s.family = family_from_string(get<std::string>(j, "family", "alamouti"));
    s.constellation = constellation_kind_from_string(get<std::string>(j, "constellation", "qpsk"));
  } catch (const Error& e) {
    fail(Errc::config_error, e.what());
  }
  s.tv = get(j, "tv", false);
  s.nt = get<std::size_t>(j, "nt", 2);
  if (j.contains("coeffs"))
    for (const auto& c : j.at("coeffs")) s.coeffs.push_back(complex_from_json(c));
  s.shape = get(j, "shape", std::vector<double>{});
  if (!s.coeffs.empty() && !s.shape.empty()) fail(Errc::config_error, "[stbc]: give coeffs or shape, not both");
  return s;
}

PsoConfig parse_pso(const Json& j, std::uint64_t seed) {
  check_keys(j, {"particles", "iterations", "inertia", "cognitive", "social", "seed", "schedule"}, "[pso]");
  PsoConfig p;
  p.particles = get(j, "particles", p.particles);
  p.iterations = get(j, "iterations", p.iterations);
  p.inertia = get(j, "inertia", p.inertia);
  p.cognitive = get(j, "cognitive", p.cognitive);
  p.social = get(j, "social", p.social);
  p.seed = get(j, "seed", seed);
  if (j.contains("schedule")) {
    p.schedule.tiers.clear();
    for (const auto& t : j.at("schedule")) {
      if (!t.is_array() || t.size() != 2) fail(Errc::config_error, "[pso] schedule entries are [threshold, budget]");
      p.schedule.tiers.emplace_back(number_or_inf(t[0], "schedule threshold"), t[1].get<std::size_t>());
    }
  }
  try {
    p.schedule.validate();
  } catch (const Error& e) {
    fail(Errc::config_error, e.what());
  }
  return p;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Json snr_json(double snr) { return std::isfinite(snr) ? Json(snr) : Json("inf"); }

Json base_manifest(const ExperimentConfig& cfg) {
  return {{"tool", kToolVersion},
          {"experiment", cfg.kind},
          {"seed", cfg.seed},
          {"rng", kRngMethod},
          {"snr_convention", kSnrConvention},
          {"threads", omp_get_max_threads()},
          {"config", cfg.raw}};
}

std::size_t info_bits(const ExperimentConfig& cfg, std::size_t n, std::size_t b) {
  const auto k = static_cast<long long>(std::llround(cfg.rate * static_cast<double>(n * b)));
  if (k < 1 || static_cast<std::size_t>(k) >= n * b) fail(Errc::config_error, "rate leaves no information or no frozen bits");
  return static_cast<std::size_t>(k);
}

double design_snr(const ExperimentConfig& cfg, const std::optional<double>& preferred) {
  if (preferred) return *preferred;
  if (cfg.code.design_snr) return *cfg.code.design_snr;
  if (!cfg.snr_db.empty()) return cfg.snr_db.front();
  fail(Errc::config_error, "no design SNR: set code.design_snr or snr_db");
}

BitChannelRanking ranking_for(const ExperimentConfig& cfg, const SetPartitionMap& spm, const Codebook& cb) {
  RankingOptions ro;
  ro.count_all = cfg.code.count_all;
  ro.nr = cfg.nr;
  return rank_bit_channels(spm, cb, cfg.code.n, design_snr(cfg, std::nullopt), cfg.code.trials,
                           mix64(cfg.seed ^ 0x52414e4bULL), ro);
}

}  // namespace

StbcSpec StbcConfig::build() const {
  std::vector<cplx> c = coeffs;
  if (c.empty() && !shape.empty()) c = shaped_coefficients(family, shape);
  if (c.empty() && raw_arity(family) > 0)
    fail(Errc::config_error, "[stbc]: " + to_string(family) + " needs coeffs or shape");
  return build_stbc(family, std::move(c), make_constellation(constellation), tv, nt);
}

ExperimentConfig parse_config(const Json& j, const std::string& kind_override) {
  check_keys(j,
             {"experiment", "seed", "stbc", "nr", "snr_db", "rate", "target", "pairs", "labelling", "code", "budget",
              "pso", "joint"},
             "config");
  ExperimentConfig cfg;
  cfg.raw = j;
  cfg.kind = kind_override.empty() ? get<std::string>(j, "experiment", "") : kind_override;
  cfg.seed = get<std::uint64_t>(j, "seed", 1);
  cfg.nr = get<std::size_t>(j, "nr", 2);
  if (cfg.nr < 1) fail(Errc::config_error, "nr must be >= 1");
  if (j.contains("snr_db")) cfg.snr_db = parse_snr_grid(j.at("snr_db"));
  cfg.rate = get(j, "rate", 0.5);
  if (!(cfg.rate >= 0.0 && cfg.rate <= 1.0)) fail(Errc::config_error, "rate must lie in [0, 1]");
  if (j.contains("target")) cfg.target = j.at("target").get<double>();
  cfg.pairs = get<std::size_t>(j, "pairs", 8);
  cfg.stbc = parse_stbc(j.value("stbc", Json::object()));

  const Json lab = j.value("labelling", Json::object());
  check_keys(lab, {"measure", "threshold", "identity", "design_snr", "omega_mc", "file"}, "[labelling]");
  try {
    cfg.labelling.measure = measure_from_string(get<std::string>(lab, "measure", "frobenius"));
  } catch (const Error& e) {
    fail(Errc::config_error, e.what());
  }
  cfg.labelling.threshold = get(lab, "threshold", 0.0);
  cfg.labelling.identity = get(lab, "identity", false);
  cfg.labelling.design_snr = get_snr(lab, "design_snr");
  cfg.labelling.omega_mc = get<std::size_t>(lab, "omega_mc", cfg.labelling.omega_mc);
  cfg.labelling.file = get<std::string>(lab, "file", "");

  const Json code = j.value("code", Json::object());
  check_keys(code, {"n", "rule", "design_snr", "trials", "count_all", "realizations", "mc", "growth", "file"}, "[code]");
  cfg.code.n = get<std::size_t>(code, "n", 32);
  cfg.code.rule = get<std::string>(code, "rule", "ranking");
  if (cfg.code.rule != "ranking" && cfg.code.rule != "outage" && cfg.code.rule != "uniform")
    fail(Errc::config_error, "[code] rule must be ranking, outage or uniform");
  cfg.code.design_snr = get_snr(code, "design_snr");
  cfg.code.trials = get<std::size_t>(code, "trials", cfg.code.trials);
  cfg.code.count_all = get(code, "count_all", cfg.code.count_all);
  cfg.code.realizations = get<std::size_t>(code, "realizations", cfg.code.realizations);
  cfg.code.mc = get<std::size_t>(code, "mc", cfg.code.mc);
  cfg.code.growth = get(code, "growth", cfg.code.growth);
  cfg.code.file = get<std::string>(code, "file", "");

  const Json budget = j.value("budget", Json::object());
  check_keys(budget, {"max_frames", "min_errors", "block", "realizations", "mc"}, "[budget]");
  cfg.budget.max_frames = get<std::size_t>(budget, "max_frames", cfg.budget.max_frames);
  cfg.budget.min_errors = get<std::size_t>(budget, "min_errors", cfg.budget.min_errors);
  cfg.budget.block = get<std::size_t>(budget, "block", cfg.budget.block);
  cfg.budget.realizations = get<std::size_t>(budget, "realizations", cfg.budget.realizations);
  cfg.budget.mc = get<std::size_t>(budget, "mc", cfg.budget.mc);
  if (cfg.budget.block < 1) fail(Errc::config_error, "[budget] block must be >= 1");

  cfg.pso = parse_pso(j.value("pso", Json::object()), cfg.seed);

  const Json joint = j.value("joint", Json::object());
  check_keys(joint, {"n", "ranking_trials", "min_errors"}, "[joint]");
  cfg.joint.n = get<std::size_t>(joint, "n", cfg.code.n);
  cfg.joint.ranking_trials = get<std::size_t>(joint, "ranking_trials", cfg.code.trials);
  cfg.joint.min_errors = get<std::size_t>(joint, "min_errors", cfg.budget.min_errors);
  cfg.joint.r_tot = cfg.rate;
  cfg.joint.nr = cfg.nr;
  cfg.joint.measure = cfg.labelling.measure;
  cfg.joint.rel_threshold = cfg.labelling.threshold;
  cfg.joint.seed = cfg.seed;
  return cfg;
}

Json load_config_file(const std::string& path) {
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".toml") == 0) return read_toml_file(path);
  return read_json_file(path);
}

NoiseSpec noise_for(double snr_db, std::size_t l) {
  if (std::isinf(snr_db) && snr_db > 0) return NoiseSpec(1e-30);
  return noise_from_snr_db(snr_db, l);
}

std::string format_g6(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void ResultTable::write_csv(std::ostream& out) const {
  out << "snr_db,metric,value,events,trials,seed\n";
  for (const auto& r : rows)
    out << format_g6(r.snr_db) << ',' << r.metric << ',' << format_g6(r.value) << ',' << r.events << ',' << r.trials
        << ',' << r.seed << '\n';
}

Json ResultTable::to_json() const {
  Json arr = Json::array();
  for (const auto& r : rows) {
    arr.push_back({{"snr_db", snr_json(r.snr_db)},
                   {"metric", r.metric},
                   {"value", std::isfinite(r.value) ? Json(r.value) : Json(format_g6(r.value))},
                   {"events", r.events},
                   {"trials", r.trials},
                   {"seed", r.seed},
                   {"wall_time", r.wall_time}});
  }
  return {{"manifest", manifest}, {"rows", arr}};
}

Codebook build_codebook(const ExperimentConfig& cfg) { return enumerate_codebook(cfg.stbc.build()); }

SetPartitionMap build_labelling(const ExperimentConfig& cfg, const Codebook& cb) {
  if (!cfg.labelling.file.empty()) {
    auto spm = spm_from_json(read_json_file(cfg.labelling.file));
    if (spm.b != cb.bits()) fail(Errc::config_error, "labelling file does not match the codebook size");
    return spm;
  }
  if (cfg.labelling.identity) return identity_map(cb.bits());
  MeasureContext ctx;
  ctx.nr = cfg.nr;
  const Measure m = cfg.labelling.measure;
  if (m == Measure::ubpop_sbc || m == Measure::ubpop_stbc || m == Measure::ubpop_tvsbc) {
    ctx.n0 = noise_for(design_snr(cfg, cfg.labelling.design_snr), cb.spec.l).n0;
    ctx.q = q_from_rate(cfg.rate);
    if (m == Measure::ubpop_tvsbc) ctx.omega = omega_moments(cfg.nr, cfg.labelling.omega_mc, cfg.seed);
  }
  return set_merge_labeling(cb, m, ctx, cfg.labelling.threshold);
}

MlpcmCode build_code(const ExperimentConfig& cfg, const SetPartitionMap& spm, const Codebook& cb) {
  if (!cfg.code.file.empty()) {
    auto code = code_from_json(read_json_file(cfg.code.file));
    if (code.b != cb.bits()) fail(Errc::config_error, "code file does not match the codebook size");
    return code;
  }
  const std::size_t n = cfg.code.n, b = cb.bits();
  const std::size_t k = info_bits(cfg, n, b);
  const auto rank = ranking_for(cfg, spm, cb);
  MlpcmCode code;
  if (cfg.code.rule == "ranking") {
    code = select_information_sets(rank, k);
  } else {
    std::vector<double> rates(b, 1.0);
    if (cfg.code.rule == "outage") {
      const double snr = design_snr(cfg, std::nullopt);
      const auto batch = sample_channel_batch(cb.spec.nt, cfg.nr, cfg.code.realizations, cfg.seed,
                                              streams::make(streams::channel, 100));
      rates = outage_rule_rates(spm, cb, cfg.rate, batch, noise_for(snr, cb.spec.l), cfg.code.growth, cfg.code.mc,
                                mix64(cfg.seed ^ 0x4f555447ULL));
    }
    const auto sizes = rates_to_sizes(rates, n, k);
    code = select_information_sets_per_level(rank, sizes);
  }
  code.design_snr = rank.snr;
  code.ranking_seed = rank.seed;
  code.ranking_trials = rank.trials;
  return code;
}

ResultTable run_outage_sweep(const ExperimentConfig& cfg) {
  if (cfg.snr_db.empty()) fail(Errc::config_error, "outage: snr_db is empty");
  const auto cb = build_codebook(cfg);
  const auto batch = sample_channel_batch(cb.spec.nt, cfg.nr, cfg.budget.realizations, cfg.seed,
                                          streams::make(streams::channel, 0));
  OutageOptions o;
  o.mc = cfg.budget.mc;
  const double rate = cfg.rate * static_cast<double>(cb.bits());
  ResultTable t;
  t.manifest = base_manifest(cfg);
  t.manifest["rate_bits"] = rate;
  t.manifest["spec"] = to_json(cb.spec);
  for (double snr : cfg.snr_db) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto est = outage_estimate(cb, rate, noise_for(snr, cb.spec.l), batch, o, cfg.seed);
    t.rows.push_back({snr, "outage", est.probability, est.outages, est.realizations, cfg.seed, seconds_since(t0)});
    t.rows.push_back({snr, "mi_samples_mean", est.mean_samples, 0, est.realizations, cfg.seed, 0.0});
  }
  return t;
}

ResultTable run_fer_sweep(const ExperimentConfig& cfg) {
  if (cfg.snr_db.empty()) fail(Errc::config_error, "fer: snr_db is empty");
  const auto cb = build_codebook(cfg);
  const auto spm = build_labelling(cfg, cb);
  const auto code = build_code(cfg, spm, cb);
  FerOptions fo;
  fo.max_frames = cfg.budget.max_frames;
  fo.min_errors = cfg.budget.min_errors;
  fo.block = cfg.budget.block;
  fo.nr = cfg.nr;
  ResultTable t;
  t.manifest = base_manifest(cfg);
  t.manifest["spec"] = to_json(cb.spec);
  t.manifest["labelling"] = to_json(spm);
  t.manifest["code"] = to_json(code);
  for (double snr : cfg.snr_db) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = simulate_frames(code, spm, cb, noise_for(snr, cb.spec.l), fo, cfg.seed);
    const double dt = seconds_since(t0);
    t.rows.push_back({snr, "fer", r.fer(), r.frame_errors, r.frames, cfg.seed, dt});
    const std::size_t bits = r.frames * code.k();
    t.rows.push_back({snr, "ber", bits == 0 ? 0.0 : static_cast<double>(r.bit_errors) / static_cast<double>(bits),
                      r.bit_errors, bits, cfg.seed, dt});
  }
  return t;
}

ResultTable run_optimize_stbc(const ExperimentConfig& cfg) {
  if (cfg.snr_db.empty()) fail(Errc::config_error, "optimize-stbc: snr_db is empty");
  const auto space = default_space(cfg.stbc.family);
  const auto constellation = make_constellation(cfg.stbc.constellation);
  OutageObjectiveOptions oo;
  oo.nr = cfg.nr;
  oo.mc = cfg.budget.mc;
  oo.seed = cfg.seed;
  ResultTable t;
  t.manifest = base_manifest(cfg);
  Json results = Json::array();
  for (double snr : cfg.snr_db) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto obj = objective_outage(cfg.stbc.family, constellation, cfg.stbc.tv, snr, cfg.rate, oo);
    const auto res = pso_minimize(obj, space, cfg.pso);
    const std::size_t budget = cfg.pso.schedule.largest();
    t.rows.push_back({snr, "outage", res.value,
                      static_cast<std::size_t>(std::llround(res.value * static_cast<double>(budget))), budget, cfg.seed,
                      seconds_since(t0)});
    Json coeffs = Json::array();
    for (const auto& c : shaped_coefficients(cfg.stbc.family, res.best)) coeffs.push_back(to_json(c));
    Json trace = Json::array();
    for (const auto& e : res.trace) trace.push_back({e.iteration, e.best_value, e.budget});
    results.push_back({{"snr_db", snr_json(snr)},
                       {"shape", res.best},
                       {"coeffs", coeffs},
                       {"value", res.value},
                       {"search_value", res.search_value},
                       {"trace", trace}});
    if (cfg.target && res.value <= *cfg.target) {
      t.rows.push_back({snr, "min_snr_db", snr, 0, 0, cfg.seed, 0.0});
      break;
    }
  }
  t.manifest["results"] = results;
  return t;
}

ResultTable run_design_code(const ExperimentConfig& cfg) {
  const auto cb = build_codebook(cfg);
  const auto spm = build_labelling(cfg, cb);
  const auto t0 = std::chrono::steady_clock::now();
  const auto code = build_code(cfg, spm, cb);
  const double dt = seconds_since(t0);
  ResultTable t;
  t.manifest = base_manifest(cfg);
  t.manifest["artifact"] = to_json(code);
  t.manifest["labelling"] = to_json(spm);
  t.rows.push_back({code.design_snr, "k", static_cast<double>(code.k()), 0, 0, cfg.seed, dt});
  t.rows.push_back({code.design_snr, "r_tot", code.r_tot, 0, 0, cfg.seed, 0.0});
  for (std::size_t b = 1; b <= code.b; ++b)
    t.rows.push_back({code.design_snr, "rate_level" + std::to_string(b), code.rates[b - 1], code.info_sets[b - 1].size(),
                      code.n, cfg.seed, 0.0});
  return t;
}

ResultTable run_label(const ExperimentConfig& cfg) {
  const auto cb = build_codebook(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const auto spm = build_labelling(cfg, cb);
  const double dt = seconds_since(t0);
  MeasureContext ctx;
  ctx.nr = cfg.nr;
  const Measure m = cfg.labelling.measure;
  double snr = std::numeric_limits<double>::quiet_NaN();
  if (m == Measure::ubpop_sbc || m == Measure::ubpop_stbc || m == Measure::ubpop_tvsbc) {
    snr = design_snr(cfg, cfg.labelling.design_snr);
    ctx.n0 = noise_for(snr, cb.spec.l).n0;
    ctx.q = q_from_rate(cfg.rate);
    if (m == Measure::ubpop_tvsbc) ctx.omega = omega_moments(cfg.nr, cfg.labelling.omega_mc, cfg.seed);
  }
  const auto intra = intra_subset_min_distance(cb, spm, m, ctx);
  ResultTable t;
  t.manifest = base_manifest(cfg);
  t.manifest["artifact"] = to_json(spm);
  for (std::size_t b = 1; b <= intra.size(); ++b)
    t.rows.push_back({snr, "intra_min_distance_level" + std::to_string(b), intra[b - 1], 0, 0, cfg.seed,
                      b == 1 ? dt : 0.0});
  return t;
}

ResultTable run_rank(const ExperimentConfig& cfg) {
  const auto cb = build_codebook(cfg);
  const auto spm = build_labelling(cfg, cb);
  const auto t0 = std::chrono::steady_clock::now();
  const auto rank = ranking_for(cfg, spm, cb);
  const double dt = seconds_since(t0);
  ResultTable t;
  t.manifest = base_manifest(cfg);
  t.manifest["artifact"] = to_json(rank);
  for (std::size_t b = 1; b <= rank.b; ++b) {
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < rank.n; ++i) sum += rank.count(b, i);
    t.rows.push_back({rank.snr, "first_errors_level" + std::to_string(b),
                      static_cast<double>(sum) / static_cast<double>(rank.trials), sum, rank.trials, rank.seed,
                      b == 1 ? dt : 0.0});
  }
  return t;
}

ResultTable run_joint(const ExperimentConfig& cfg) {
  if (cfg.snr_db.empty()) fail(Errc::config_error, "joint: snr_db is empty");
  const double snr = cfg.snr_db.front();
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = joint_design(cfg.stbc.family, default_space(cfg.stbc.family),
                                make_constellation(cfg.stbc.constellation), cfg.stbc.tv, snr, cfg.pso, cfg.joint);
  const std::size_t frames = cfg.pso.schedule.largest();
  ResultTable t;
  t.manifest = base_manifest(cfg);
  t.manifest["artifact"] = {{"spec", to_json(res.spec)},
                            {"labelling", to_json(res.spm)},
                            {"code", to_json(res.code)},
                            {"shape", res.search.best}};
  t.rows.push_back({snr, "fer", res.fer, static_cast<std::size_t>(std::llround(res.fer * static_cast<double>(frames))),
                    frames, cfg.seed, seconds_since(t0)});
  return t;
}

ResultTable run_bound_check(const ExperimentConfig& cfg) {
  if (cfg.snr_db.empty()) fail(Errc::config_error, "bound-check: snr_db is empty");
  const auto cb = build_codebook(cfg);
  const std::size_t m = cb.size();
  const bool tv = cb.spec.tv;
  const double q = q_from_rate(cfg.rate);
  std::optional<OmegaMoments> omega;
  if (tv) omega = omega_moments(cfg.nr, cfg.labelling.omega_mc, cfg.seed);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  RandomStream pick(cfg.seed, streams::make(streams::channel, 200));
  const std::size_t want = std::min(cfg.pairs, m * (m - 1) / 2);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  while (pairs.size() < want) {
    auto i = pick.below(m), j = pick.below(m);
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    if (seen.insert({i, j}).second) pairs.emplace_back(i, j);
  }
  const auto batch = sample_channel_batch(cb.spec.nt, cfg.nr, cfg.budget.realizations, cfg.seed,
                                          streams::make(streams::channel, 1));
  ResultTable t;
  t.manifest = base_manifest(cfg);
  t.manifest["q"] = q;
  for (double snr : cfg.snr_db) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto noise = noise_for(snr, cb.spec.l);
    const double limit = -4.0 * noise.n0 * std::log(q);
    double bound_sum = 0.0, mc_sum = 0.0;
    std::size_t events_total = 0;
    for (const auto& [i, j] : pairs) {
      const auto d = difference(cb, i, j);
      double bound;
      if (tv)
        bound = ubpop_tvsbc(d, noise, q, *omega);
      else if (cb.spec.l == 1)
        bound = ubpop_sbc(d, noise, q, cfg.nr);
      else
        bound = ubpop_stbc(d, noise, q, cfg.nr);
      std::size_t events = 0;
#pragma omp parallel for reduction(+ : events) schedule(static)
      for (std::size_t k = 0; k < batch.count(); ++k) {
        const double metric = tv ? tv_pair_metric(d, batch.matrices[k], noise)
                                 : product_frobenius_sq(d, batch.matrices[k]);
        events += metric < limit ? 1 : 0;
      }
      const double p = static_cast<double>(events) / static_cast<double>(batch.count());
      const std::string tag = std::to_string(i) + "_" + std::to_string(j);
      t.rows.push_back({snr, "ubpop_" + tag, bound, 0, 0, cfg.seed, 0.0});
      t.rows.push_back({snr, "mc_" + tag, p, events, batch.count(), cfg.seed, 0.0});
      bound_sum += bound;
      mc_sum += p;
      events_total += events;
    }
    const double np = static_cast<double>(pairs.size());
    t.rows.push_back({snr, "ubpop_mean", bound_sum / np, 0, 0, cfg.seed, 0.0});
    t.rows.push_back({snr, "mc_mean", mc_sum / np, events_total, batch.count() * pairs.size(), cfg.seed,
                      seconds_since(t0)});
  }
  return t;
}

ResultTable run_experiment(const ExperimentConfig& cfg) {
  const std::string& k = cfg.kind;
  if (k == "outage") return run_outage_sweep(cfg);
  if (k == "fer") return run_fer_sweep(cfg);
  if (k == "optimize-stbc") return run_optimize_stbc(cfg);
  if (k == "design-code") return run_design_code(cfg);
  if (k == "label") return run_label(cfg);
  if (k == "rank") return run_rank(cfg);
  if (k == "joint") return run_joint(cfg);
  if (k == "bound-check") return run_bound_check(cfg);
  fail(Errc::config_error, "unknown experiment '" + k + "'");
}

}  // namespace mlpcm
