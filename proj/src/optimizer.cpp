#include "mlpcm/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mlpcm {

void SearchSpace::validate() const {
  require(!lower.empty() && lower.size() == upper.size(), "SearchSpace: bounds must be non-empty and equal length");
  for (std::size_t i = 0; i < lower.size(); ++i)
    require(std::isfinite(lower[i]) && std::isfinite(upper[i]) && lower[i] < upper[i],
            "SearchSpace: need lower < upper in every dimension");
}

SearchSpace default_space(Family family) {
  switch (family) {
    case Family::matrix_b: return {{0.05, 0.0, 0.0}, {1.0, 1.0, 360.0}};
    case Family::matrix_d:
    case Family::matrix_e: return {{0.05, 0.05, 0.0}, {1.0, 1.0, 360.0}};
    case Family::matrix_f: return {{0.0, 0.0, 0.0, 0.0}, {0.95, 360.0, 360.0, 360.0}};
    default: fail(Errc::unsupported, "default_space: " + to_string(family) + " has no free parameters");
  }
}

std::size_t McSchedule::budget(double best) const {
  std::size_t out = tiers.front().second;
  for (const auto& [threshold, count] : tiers)
    if (best < threshold) out = std::max(out, count);
  return out;
}

std::size_t McSchedule::largest() const {
  std::size_t out = 0;
  for (const auto& t : tiers) out = std::max(out, t.second);
  return out;
}

void McSchedule::validate() const {
  require(!tiers.empty(), "mc_schedule: need at least one tier");
  for (std::size_t i = 0; i < tiers.size(); ++i) {
    require(tiers[i].second >= 1, "mc_schedule: budgets must be positive");
    if (i > 0)
      require(tiers[i].first < tiers[i - 1].first && tiers[i].second > tiers[i - 1].second,
              "mc_schedule: budgets must increase strictly as thresholds decrease");
  }
}

PsoResult pso_minimize(const Objective& objective, const SearchSpace& space, const PsoConfig& cfg) {
  space.validate();
  cfg.schedule.validate();
  require(cfg.particles >= 1 && cfg.iterations >= 1, "pso_minimize: need at least one particle and one iteration");
  const std::size_t dims = space.dims(), np = cfg.particles;
  std::vector<std::vector<double>> x(np, std::vector<double>(dims)), v = x, pbest;
  std::vector<double> pbest_value(np), values(np);

  {
    RandomStream rng(cfg.seed, streams::make(streams::pso, 0));
    for (std::size_t p = 0; p < np; ++p)
      for (std::size_t d = 0; d < dims; ++d) {
        const double w = space.upper[d] - space.lower[d];
        x[p][d] = space.lower[d] + w * rng.uniform();
        v[p][d] = 0.2 * w * (2.0 * rng.uniform() - 1.0);
      }
  }

  PsoResult result;
  auto evaluate_all = [&](std::size_t iteration, std::size_t budget) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t p = 0; p < static_cast<std::int64_t>(np); ++p)
      values[static_cast<std::size_t>(p)] = objective(x[static_cast<std::size_t>(p)], budget, iteration);
    for (std::size_t p = 0; p < np; ++p) {
      result.evaluation_budgets.push_back(budget);
      if (std::isnan(values[p])) {
        std::ostringstream msg;
        msg << "pso_minimize: objective returned NaN for particle " << p << " at iteration " << iteration << ", x = [";
        for (std::size_t d = 0; d < dims; ++d) msg << (d ? ", " : "") << x[p][d];
        msg << "]";
        fail(Errc::evaluation_error, msg.str());
      }
    }
  };

  std::size_t budget = cfg.schedule.budget(std::numeric_limits<double>::infinity());
  evaluate_all(0, budget);
  pbest = x;
  pbest_value = values;
  std::size_t g = static_cast<std::size_t>(std::min_element(pbest_value.begin(), pbest_value.end()) - pbest_value.begin());
  result.trace.push_back({0, pbest_value[g], budget});

  for (std::size_t it = 1; it < cfg.iterations; ++it) {
    RandomStream rng(cfg.seed, streams::make(streams::pso, 1), static_cast<std::uint32_t>(it));
    for (std::size_t p = 0; p < np; ++p)
      for (std::size_t d = 0; d < dims; ++d) {
        const double r1 = rng.uniform(), r2 = rng.uniform();
        v[p][d] = cfg.inertia * v[p][d] + cfg.cognitive * r1 * (pbest[p][d] - x[p][d]) +
                  cfg.social * r2 * (pbest[g][d] - x[p][d]);
        double pos = x[p][d] + v[p][d];
        const double lo = space.lower[d], hi = space.upper[d];
        if (pos < lo) {
          pos = lo + (lo - pos);
          v[p][d] = -v[p][d];
        } else if (pos > hi) {
          pos = hi - (pos - hi);
          v[p][d] = -v[p][d];
        }
        x[p][d] = std::clamp(pos, lo, hi);
      }
    budget = cfg.schedule.budget(pbest_value[g]);
    evaluate_all(it, budget);
    for (std::size_t p = 0; p < np; ++p)
      if (values[p] < pbest_value[p]) {
        pbest_value[p] = values[p];
        pbest[p] = x[p];
      }
    g = static_cast<std::size_t>(std::min_element(pbest_value.begin(), pbest_value.end()) - pbest_value.begin());
    result.trace.push_back({it, pbest_value[g], budget});
  }

  result.best = pbest[g];
  result.search_value = pbest_value[g];
  const std::size_t final_budget = cfg.schedule.largest();
  result.value = objective(result.best, final_budget, cfg.iterations);
  result.evaluation_budgets.push_back(final_budget);
  if (std::isnan(result.value)) fail(Errc::evaluation_error, "pso_minimize: objective returned NaN at the final re-evaluation");
  return result;
}

Objective objective_outage(Family family, Constellation constellation, bool tv, double snr_db, double r_tot,
                           const OutageObjectiveOptions& opts) {
  require(r_tot >= 0.0 && r_tot <= 1.0, "objective_outage: r_tot must lie in [0, 1]");
  require(raw_arity(family) > 0, "objective_outage: family has no free parameters", Errc::unsupported);
  CoefficientEncoding encode = opts.encoding;
  if (!encode) encode = [family](std::span<const double> x) { return shaped_coefficients(family, x); };
  return [=](std::span<const double> x, std::size_t budget, std::uint64_t stream) -> double {
    StbcSpec spec;
    try {
      spec = build_stbc(family, encode(x), constellation, tv);
    } catch (const Error& e) {
      if (e.code() == Errc::rank_deficient || e.code() == Errc::constraint_violation ||
          e.code() == Errc::invalid_argument)
        return 1.0;
      throw;
    }
    const auto cb = enumerate_codebook(spec);
    const auto batch =
        sample_channel_batch(spec.nt, opts.nr, budget, opts.seed, streams::make(streams::objective, stream));
    OutageOptions o;
    o.mc = opts.mc;
    return outage_estimate(cb, r_tot * static_cast<double>(spec.bits()), noise_from_snr_db(snr_db, spec.l), batch, o,
                           mix64(opts.seed ^ stream))
        .probability;
  };
}

SnrSearchResult min_snr_for_target(const std::function<double(double)>& evaluate, double target, double lo, double hi,
                                   double step, double tolerance) {
  require(lo < hi, "min_snr_for_target: need lo < hi");
  require(step > 0.0, "min_snr_for_target: step must be positive");
  SnrSearchResult out;
  double best_snr = lo, best_value = std::numeric_limits<double>::infinity();
  const auto points = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < points; ++i) {
    const double snr = lo + step * static_cast<double>(i);
    const double value = evaluate(snr);
    if (!out.evaluations.empty() && value > out.evaluations.back().second + tolerance) out.non_monotone = true;
    out.evaluations.emplace_back(snr, value);
    if (value < best_value) {
      best_value = value;
      best_snr = snr;
    }
    if (value <= target) {
      out.snr = snr;
      out.value = value;
      return out;
    }
  }
  std::ostringstream msg;
  msg << "min_snr_for_target: target " << target << " not reached on [" << lo << ", " << hi << "] dB; best value "
      << best_value << " at " << best_snr << " dB";
  throw SnrNotFound(msg.str(), best_snr, best_value);
}

double joint_pipeline_fer(Family family, std::span<const double> x, const Constellation& constellation, bool tv,
                          double snr_db, std::size_t frames, std::uint64_t stream, const JointOptions& opts,
                          JointResult* out) {
  CoefficientEncoding encode = opts.encoding;
  if (!encode) encode = [family](std::span<const double> v) { return shaped_coefficients(family, v); };
  StbcSpec spec;
  try {
    spec = build_stbc(family, encode(x), constellation, tv);
  } catch (const Error& e) {
    if (e.code() == Errc::rank_deficient || e.code() == Errc::constraint_violation ||
        e.code() == Errc::invalid_argument)
      return 1.0;
    throw;
  }
  const auto cb = enumerate_codebook(spec);
  MeasureContext ctx;
  ctx.nr = opts.nr;
  const auto spm = set_merge_labeling(cb, opts.measure, ctx, opts.rel_threshold);
  RankingOptions ro;
  ro.nr = opts.nr;
  const auto rank = rank_bit_channels(spm, cb, opts.n, snr_db, opts.ranking_trials, mix64(opts.seed ^ 0x4a44), ro);
  const auto k = static_cast<std::size_t>(std::llround(opts.r_tot * static_cast<double>(opts.n * cb.bits())));
  const auto code = select_information_sets(rank, k);
  FerOptions fo;
  fo.max_frames = frames;
  fo.min_errors = opts.min_errors;
  fo.nr = opts.nr;
  const auto fer = simulate_frames(code, spm, cb, noise_from_snr_db(snr_db, spec.l), fo, mix64(opts.seed ^ stream)).fer();
  if (out != nullptr) {
    out->spec = spec;
    out->spm = spm;
    out->code = code;
    out->fer = fer;
  }
  return fer;
}

JointResult joint_design(Family family, const SearchSpace& space, const Constellation& constellation, bool tv,
                         double snr_db, const PsoConfig& cfg, const JointOptions& opts) {
  require(opts.n <= 1024, "joint_design: block length above the desk-scale limit", Errc::too_large);
  Objective objective = [&](std::span<const double> x, std::size_t frames, std::uint64_t stream) {
    return joint_pipeline_fer(family, x, constellation, tv, snr_db, frames, stream, opts);
  };
  JointResult result;
  result.search = pso_minimize(objective, space, cfg);
  joint_pipeline_fer(family, result.search.best, constellation, tv, snr_db, cfg.schedule.largest(), cfg.iterations,
                     opts, &result);
  result.fer = result.search.value;
  return result;
}

}  // namespace mlpcm
