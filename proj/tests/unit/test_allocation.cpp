#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "semalloc/allocation.hpp"

using namespace semalloc;

namespace {

std::vector<double> as_real(const std::vector<Count>& v) { return {v.begin(), v.end()}; }

// Direct evaluation of the stirling width posterior of `alloc` on [f, K]
// followed by the inner product with p_t, without the library's factoring.
double direct_objective(const std::vector<Count>& alloc, const WidthPosterior& p_t, double lambda,
                        Count K) {
  std::vector<Count> pos;
  for (Count n : alloc)
    if (n > 0) pos.push_back(n);
  const Count f = static_cast<Count>(pos.size());
  double l = 0.0, S = 0.0;
  for (Count n : pos) {
    l += static_cast<double>(n);
    S += std::log(static_cast<double>(n));
  }
  const double alpha = l;
  std::vector<double> pr;
  for (Count w = f; w <= K; ++w) {
    double D = 0.0;
    for (Count i = 0; i <= K - f; ++i) {
      const double v = static_cast<double>(f + i);
      const double beta = (1.0 / v - 1.0 / static_cast<double>(w)) * lambda;
      D += std::exp(log_binomial(K - f, i) + std::lgamma(w * lambda / K) -
                    std::lgamma(v * lambda / K) + (v - w) * lambda / K * std::log(alpha) +
                    f * (std::lgamma(lambda / w) - std::lgamma(lambda / v)) + beta * S);
    }
    pr.push_back(std::exp(log_binomial(K - f, w - f)) / D);
  }
  double z = 0.0;
  for (double x : pr) z += x;
  double obj = 0.0;
  for (Count w = f; w <= K; ++w) obj += p_t.at(w) * pr[static_cast<std::size_t>(w - f)] / z;
  return obj;
}

}  // namespace

TEST_CASE("water level") {
  CHECK(water_level(CapacityVector{{2, 5, 9}}, 9) == doctest::Approx(3.5).epsilon(1e-15));
  CHECK(water_level(CapacityVector{{10, 10, 10, 10}}, 8) == doctest::Approx(2.0));
  CHECK(water_level(CapacityVector{{1, 2, 3}}, 6) >= 3.0);
  CHECK_THROWS_AS(water_level(CapacityVector{{1, 2}}, 4), InfeasibleError);
  CHECK_THROWS_AS(water_level(CapacityVector{{1, 2}}, 0), std::domain_error);
}

TEST_CASE("truncated water-filling") {
  CHECK(truncated_water_fill(CapacityVector{{2, 5, 9}}, 9).values == std::vector<double>{2, 3.5, 3.5});
  CHECK(truncated_water_fill(CapacityVector{{10, 10, 10}}, 6).values == std::vector<double>{2, 2, 2});
  CHECK(truncated_water_fill(CapacityVector{{0, 4}}, 4).values == std::vector<double>{0, 4});
  CHECK(truncated_water_fill(CapacityVector{{1, 2, 3}}, 6).values == std::vector<double>{1, 2, 3});
  CHECK(water_fill_allocation(CapacityVector{{10, 10, 10, 10}}, 8).counts ==
        std::vector<Count>{2, 2, 2, 2});
}

TEST_CASE("rounding") {
  const CapacityVector caps{{2, 5, 9}};
  CHECK(round_allocation(truncated_water_fill(caps, 9), caps, 9).counts == std::vector<Count>{2, 3, 4});
  const ContinuousAllocation whole{{1, 0, 3}, 3.0};
  CHECK(round_allocation(whole, CapacityVector{{1, 4, 5}}, 4).counts == std::vector<Count>{1, 0, 3});
  // equal caps, equal fractions: lower index first
  const CapacityVector eq{{5, 5, 5}};
  CHECK(water_fill_allocation(eq, 7).counts == std::vector<Count>{3, 2, 2});
}

TEST_CASE("rounding error report") {
  const ContinuousAllocation c{{2, 3.5, 3.5}, 3.5};
  CHECK(rounding_error_report(Allocation{{2, 3, 4}}, c).linf == doctest::Approx(0.5));
  CHECK(rounding_error_report(Allocation{{2, 3, 4}}, c).l1 == doctest::Approx(1.0));
  const ContinuousAllocation same{{1, 2}, 2.0};
  CHECK(rounding_error_report(Allocation{{1, 2}}, same).linf == 0.0);
  CHECK(rounding_error_report(Allocation{{1, 2}}, same).l1 == 0.0);
}

TEST_CASE("rounding bounds on random instances") {
  std::mt19937_64 rng(7);
  for (int it = 0; it < 2000; ++it) {
    std::uniform_int_distribution<Count> fdist(1, 12), cdist(0, 15);
    CapacityVector caps;
    const Count f = fdist(rng);
    for (Count j = 0; j < f; ++j) caps.caps.push_back(cdist(rng));
    if (caps.total() == 0) continue;
    const Count B = std::uniform_int_distribution<Count>(1, caps.total())(rng);
    const ContinuousAllocation c = truncated_water_fill(caps, B);
    const Allocation a = round_allocation(c, caps, B);
    CHECK(a.feasible(caps, B));
    const RoundingError r = rounding_error_report(a, c);
    CHECK(r.linf <= 1.0 + 1e-12);
    CHECK(r.l1 <= static_cast<double>(f) + 1e-12);
  }
}

TEST_CASE("alignment objective") {
  const InductiveParams p;
  const WidthPosterior pt{3, 3, {1.0}};
  CHECK(alignment_objective(Allocation{{1, 2, 1}}, pt, p, 3) == doctest::Approx(1.0).epsilon(1e-14));

  const WidthPosterior p4{3, 6, {0.1, 0.2, 0.3, 0.4}};
  // tests/oracle/oracle_values.py
  CHECK(alignment_objective(Allocation{{1, 1, 2}}, p4, p, 6) ==
        doctest::Approx(0.22306509487668114299).epsilon(1e-10));
  CHECK(std::abs(alignment_objective(Allocation{{1, 1, 2}}, p4, p, 6) -
                 direct_objective({1, 1, 2}, p4, 1.0, 6)) < 1e-10);

  std::vector<Count> a{3, 1, 0, 2};
  const double base = alignment_objective(Allocation{a}, p4, p, 6);
  std::sort(a.begin(), a.end());
  do {
    CHECK(alignment_objective(Allocation{a}, p4, p, 6) == base);
  } while (std::next_permutation(a.begin(), a.end()));

  const std::vector<double> real{1.0, 1.0, 2.0};
  CHECK(alignment_objective(real, p4, p, 6) ==
        doctest::Approx(alignment_objective(Allocation{{1, 1, 2}}, p4, p, 6)).epsilon(1e-14));
}

TEST_CASE("enumeration and brute force") {
  CHECK(count_feasible_allocations(CapacityVector{{3, 3}}, 6) == 1);
  CHECK(count_feasible_allocations(CapacityVector{{2, 5, 9}}, 9) == 18);
  std::uint64_t n = 0;
  Count prev_first = -1;
  enumerate_allocations(CapacityVector{{2, 5, 9}}, 9, [&](const std::vector<Count>& v) {
    CHECK(v[0] + v[1] + v[2] == 9);
    CHECK(v[0] >= prev_first);
    prev_first = v[0];
    ++n;
  });
  CHECK(n == 18);

  const InductiveParams p;
  const WidthPosterior pt = exact_posterior(EvidenceCounts(8, std::vector<Count>{3, 3}), p);
  const BruteForceResult forced = brute_force_best(CapacityVector{{3, 3}}, 6, pt, p, 8);
  CHECK(forced.best.counts == std::vector<Count>{3, 3});
  CHECK(forced.evaluated == 1);

  const WidthPosterior sym = exact_posterior(EvidenceCounts(4, std::vector<Count>{10, 10}), p);
  CHECK(brute_force_best(CapacityVector{{10, 10}}, 4, sym, p, 4).best.counts ==
        std::vector<Count>{2, 2});
  const WidthPosterior sym8 = exact_posterior(EvidenceCounts(8, std::vector<Count>{10, 10}), p, false);
  CHECK(brute_force_best(CapacityVector{{10, 10}}, 4, sym8, p, 8, false).best.counts ==
        std::vector<Count>{2, 2});

  const CapacityVector caps{{1, 4, 4}};
  const WidthPosterior pt3 = exact_posterior(EvidenceCounts(10, std::vector<Count>{1, 4, 4}), p);
  const BruteForceResult best = brute_force_best(caps, 5, pt3, p, 10);
  const Allocation wf = water_fill_allocation(caps, 5);
  for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(best.best.counts[j] - wf.counts[j]) <= 1);

  CHECK_THROWS_AS(brute_force_best(CapacityVector{std::vector<Count>(12, 40)}, 200, pt3, p, 20),
                  std::length_error);
}

TEST_CASE("feasibility") {
  const CapacityVector caps{{2, 3}};
  CHECK(Allocation{{2, 1}}.feasible(caps, 3));
  CHECK_FALSE(Allocation{{3, 0}}.feasible(caps, 3));
  CHECK_FALSE(Allocation{{1, 1}}.feasible(caps, 3));
  CHECK(Allocation{{2, 0, 1}}.width() == 2);
}
