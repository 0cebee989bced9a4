// Serial reference vs OpenMP kernels.
//   bench_kernels [threads]

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <vector>

#include "semalloc/harness.hpp"
#include "semalloc/posterior.hpp"

using namespace semalloc;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm-up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count() /
         reps;
}

EvidenceCounts sample_evidence(Count K, Count n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> weights(static_cast<std::size_t>(K));
  std::gamma_distribution<double> g(0.3, 1.0);
  for (double& w : weights) w = g(rng) + 1e-12;
  std::discrete_distribution<std::size_t> draw(weights.begin(), weights.end());
  EvidenceCounts e(K);
  for (Count i = 0; i < n; ++i) e.add(draw(rng), 1);
  return e;
}

double max_abs_diff(const WidthPosterior& a, const WidthPosterior& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.probs.size(); ++i) d = std::max(d, std::abs(a.probs[i] - b.probs[i]));
  return d;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) omp_set_num_threads(std::atoi(argv[1]));
  const int threads = omp_get_max_threads();
  std::printf("threads: %d\n\n%-28s %8s %12s %12s %9s %10s\n", threads, "kernel", "K",
              "serial ms", "parallel ms", "speedup", "max |diff|");

  const InductiveParams params;
  for (Count K : {200, 1000, 4000}) {
    const EvidenceCounts e = sample_evidence(K, 3 * K / 4, 11);
    const int reps = K >= 4000 ? 3 : 20;
    WidthPosterior ref, par;
    const double ts = time_ms([&] { ref = exact_posterior_reference(e, params); }, reps);
    const double tp = time_ms([&] { par = exact_posterior(e, params); }, reps);
    std::printf("%-28s %8ld %12.3f %12.3f %9.2f %10.2e\n", "exact posterior", static_cast<long>(K),
                ts, tp, ts / tp, max_abs_diff(ref, par));
  }
  for (Count K : {200, 1000, 2000}) {
    const EvidenceCounts e = sample_evidence(K, 3 * K / 4, 12);
    const StirlingSummary s = summarize(e);
    const int reps = K >= 2000 ? 2 : 5;
    WidthPosterior ref, par;
    const double ts = time_ms([&] { ref = stirling_posterior_reference(s, K, params); }, reps);
    const double tp = time_ms([&] { par = stirling_posterior(s, K, params); }, reps);
    std::printf("%-28s %8ld %12.3f %12.3f %9.2f %10.2e\n", "stirling (O(K^2) vs O(K))",
                static_cast<long>(K), ts, tp, ts / tp, max_abs_diff(ref, par));
  }

  ExperimentConfig cfg;
  cfg.N_sim = 16;
  omp_set_num_threads(1);
  const double ts = time_ms([&] { run_experiment(cfg); }, 1);
  omp_set_num_threads(threads);
  const double tp = time_ms([&] { run_experiment(cfg); }, 1);
  std::printf("%-28s %8ld %12.3f %12.3f %9.2f %10s\n", "experiment (16 worlds)",
              static_cast<long>(cfg.K), ts, tp, ts / tp, "-");
  return 0;
}
