// Serial reference kernels vs the OpenMP ones. Prints wall time, speedup
// and the largest difference between the two results.
//
//   bench_kernels [realizations] [mc]

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "mlpcm/multilevel.hpp"
#include "mlpcm/reference.hpp"

using namespace mlpcm;

namespace {

double time_it(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const char* name, double t_ref, double t_fast, double diff) {
  std::printf("%-24s ref %9.4f s   omp %9.4f s   x%6.2f   max|diff| %.3g\n", name, t_ref, t_fast, t_ref / t_fast, diff);
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t realizations = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 200;
  const std::size_t mc = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 100;
  std::printf("threads %d, realizations %zu, mc %zu\n", omp_get_max_threads(), realizations, mc);

  const auto cb = enumerate_codebook(build_stbc(Family::alamouti, {}, make_constellation(ConstellationKind::qam16), false));
  const auto spm = set_merge_labeling(cb, Measure::frobenius, {}, 0.0);
  const auto noise = noise_from_snr_db(12.0, cb.spec.l);
  const auto batch = sample_channel_batch(2, 2, realizations, 11, streams::make(streams::channel, 0));

  {
    MiSamples ref, fast;
    const double tr = time_it([&] { ref = reference::mi_samples(spm, cb, noise, batch, mc, 5); });
    const double tf = time_it([&] { fast = mi_samples(spm, cb, noise, batch, mc, 5); });
    double diff = 0.0;
    for (std::size_t i = 0; i < ref.values.size(); ++i) diff = std::max(diff, std::abs(ref.values[i] - fast.values[i]));
    report("mi_samples", tr, tf, diff);
  }
  {
    double ref = 0.0, fast = 0.0;
    OutageOptions o;
    o.mc = mc;
    o.early_stop = false;
    const double tr = time_it([&] { ref = reference::outage_probability(cb, 4.0, noise, batch, mc, 5); });
    const double tf = time_it([&] { fast = outage_estimate(cb, 4.0, noise, batch, o, 5).probability; });
    report("outage (fixed mc)", tr, tf, std::abs(ref - fast));
    o.early_stop = true;
    const double te = time_it([&] { fast = outage_estimate(cb, 4.0, noise, batch, o, 5).probability; });
    report("outage (early stop)", tr, te, std::abs(ref - fast));
  }
  {
    const std::size_t n = 1024, reps = 200;
    RandomStream rng(3, 0);
    Bits u(n);
    for (auto& b : u) b = rng.bit();
    Bits a, x;
    const double tr = time_it([&] { a = reference::polar_transform(u); });
    const double tf = time_it([&] {
      for (std::size_t r = 0; r < reps; ++r) x = polar_transform(u);
    });
    report("polar_transform N=1024", tr, tf / static_cast<double>(reps), a == x ? 0.0 : 1.0);
  }
  {
    const int threads = omp_get_max_threads();
    const auto rank = rank_bit_channels(spm, cb, 64, 14.0, 500, 9);
    const auto code = select_information_sets(rank, 256);
    FerOptions fo;
    fo.max_frames = 512;
    fo.min_errors = 1u << 30;
    FerResult r1, rn;
    omp_set_num_threads(1);
    const double t1 = time_it([&] { r1 = simulate_frames(code, spm, cb, noise_from_snr_db(14.0, 2), fo, 1); });
    omp_set_num_threads(threads);
    const double tn = time_it([&] { rn = simulate_frames(code, spm, cb, noise_from_snr_db(14.0, 2), fo, 1); });
    report("simulate_frames 1 vs n", t1, tn, std::abs(r1.fer() - rn.fer()));
  }
  return 0;
}
