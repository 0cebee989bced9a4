#include "semalloc/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace semalloc {
namespace {

// Entries within this distance of an integer are treated as integral when rounding.
constexpr double kSnap = 1e-9;

void check_caps(const CapacityVector& caps) {
  if (caps.caps.empty()) throw std::invalid_argument("capacity vector is empty");
  for (Count c : caps.caps)
    if (c < 0) throw std::invalid_argument("capacities must be non-negative");
}

void check_budget(const CapacityVector& caps, Count budget) {
  check_caps(caps);
  if (budget <= 0) throw std::domain_error("budget must be positive");
  if (budget > caps.total())
    throw InfeasibleError("budget " + std::to_string(budget) + " exceeds total capacity " +
                          std::to_string(caps.total()));
}

double objective_from_summary(const StirlingSummary& s, const WidthPosterior& p_t,
                              const InductiveParams& params, Count K, bool multiplicity) {
  const WidthPosterior p_r = stirling_posterior(s, K, params, multiplicity);
  double acc = 0.0;
  for (Count w = std::max(p_r.f_min, p_t.f_min); w <= std::min(p_r.K, p_t.K); ++w)
    acc += p_t.at(w) * p_r.at(w);
  return acc;
}

}  // namespace

Count CapacityVector::total() const { return std::accumulate(caps.begin(), caps.end(), Count{0}); }

Count Allocation::budget() const { return std::accumulate(counts.begin(), counts.end(), Count{0}); }

Count Allocation::width() const {
  return static_cast<Count>(std::count_if(counts.begin(), counts.end(), [](Count c) { return c > 0; }));
}

bool Allocation::feasible(const CapacityVector& caps, Count budget) const {
  if (counts.size() != caps.size() || this->budget() != budget) return false;
  for (std::size_t j = 0; j < counts.size(); ++j)
    if (counts[j] < 0 || counts[j] > caps.caps[j]) return false;
  return true;
}

double water_level(const CapacityVector& caps, Count budget) {
  check_budget(caps, budget);
  std::vector<Count> sorted = caps.caps;
  std::sort(sorted.begin(), sorted.end());
  // On the segment where the m largest types are still below the level,
  // sum_j min(theta, c_j) = (filled caps) + m * theta.
  double remaining = static_cast<double>(budget);
  auto unfilled = static_cast<double>(sorted.size());
  for (Count c : sorted) {
    if (static_cast<double>(c) * unfilled >= remaining) return remaining / unfilled;
    remaining -= static_cast<double>(c);
    unfilled -= 1.0;
  }
  // Unreachable after check_budget: the last cap always satisfies the test.
  return static_cast<double>(sorted.back());
}

ContinuousAllocation truncated_water_fill(const CapacityVector& caps, Count budget) {
  const double theta = water_level(caps, budget);
  ContinuousAllocation out;
  out.water_level = theta;
  out.values.reserve(caps.size());
  for (Count c : caps.caps) out.values.push_back(std::min(theta, static_cast<double>(c)));
  return out;
}

Allocation round_allocation(const ContinuousAllocation& cont, const CapacityVector& caps,
                            Count budget) {
  check_caps(caps);
  if (cont.values.size() != caps.size())
    throw std::invalid_argument("round_allocation: length mismatch");
  if (budget < 0) throw std::domain_error("round_allocation: negative budget");

  const std::size_t f = caps.size();
  Allocation out;
  out.counts.resize(f);
  std::vector<double> frac(f, 0.0);
  Count assigned = 0;
  for (std::size_t j = 0; j < f; ++j) {
    const double v = cont.values[j];
    if (v < -kSnap || v > static_cast<double>(caps.caps[j]) + kSnap)
      throw std::invalid_argument("round_allocation: continuous value outside [0, cap]");
    double fl = std::floor(v + kSnap);
    fl = std::clamp(fl, 0.0, static_cast<double>(caps.caps[j]));
    out.counts[j] = static_cast<Count>(fl);
    frac[j] = std::max(0.0, v - fl);
    assigned += out.counts[j];
  }
  Count missing = budget - assigned;
  if (missing < 0) throw InfeasibleError("round_allocation: floors already exceed the budget");

  std::vector<std::size_t> order(f);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (frac[a] != frac[b]) return frac[a] > frac[b];
    return caps.caps[a] > caps.caps[b];
  });
  for (std::size_t j : order) {
    if (missing == 0) break;
    if (out.counts[j] < caps.caps[j]) {
      ++out.counts[j];
      --missing;
    }
  }
  if (missing > 0)
    throw InfeasibleError("round_allocation: cannot reach budget under the capacity limits");
  return out;
}

Allocation water_fill_allocation(const CapacityVector& caps, Count budget) {
  return round_allocation(truncated_water_fill(caps, budget), caps, budget);
}

RoundingError rounding_error_report(const Allocation& rounded, const ContinuousAllocation& cont) {
  if (rounded.size() != cont.values.size())
    throw std::invalid_argument("rounding_error_report: length mismatch");
  RoundingError e;
  for (std::size_t j = 0; j < rounded.size(); ++j) {
    const double d = std::abs(static_cast<double>(rounded.counts[j]) - cont.values[j]);
    e.linf = std::max(e.linf, d);
    e.l1 += d;
  }
  return e;
}

double alignment_objective(const Allocation& alloc, const WidthPosterior& p_t,
                           const InductiveParams& params, Count K, bool multiplicity) {
  std::vector<double> counts;
  counts.reserve(alloc.size());
  for (Count c : alloc.counts) {
    if (c < 0) throw std::invalid_argument("alignment_objective: negative count");
    counts.push_back(static_cast<double>(c));
  }
  return alignment_objective(counts, p_t, params, K, multiplicity);
}

double alignment_objective(std::span<const double> counts, const WidthPosterior& p_t,
                           const InductiveParams& params, Count K, bool multiplicity) {
  // Sorted so that S = sum log n_j is bit-identical under permutations.
  std::vector<double> positive;
  for (double c : counts)
    if (c > 0.0) positive.push_back(c);
  if (positive.empty()) throw std::invalid_argument("alignment_objective: all-zero allocation");
  std::sort(positive.begin(), positive.end());
  return objective_from_summary(summarize(positive), p_t, params, K, multiplicity);
}

std::uint64_t count_feasible_allocations(const CapacityVector& caps, Count budget) {
  if (caps.caps.empty() || budget < 0) return 0;
  constexpr std::uint64_t kSat = std::numeric_limits<std::uint64_t>::max();
  const auto b = static_cast<std::size_t>(budget);
  std::vector<std::uint64_t> ways(b + 1, 0), next(b + 1);
  ways[0] = 1;
  for (Count cap : caps.caps) {
    // next[s] = sum_{v=0}^{min(cap, s)} ways[s - v], via a sliding window.
    std::uint64_t window = 0;
    for (std::size_t s = 0; s <= b; ++s) {
      window = ways[s] > kSat - window ? kSat : window + ways[s];
      if (cap >= 0 && s >= static_cast<std::size_t>(cap) + 1 && window != kSat)
        window -= ways[s - static_cast<std::size_t>(cap) - 1];
      next[s] = window;
    }
    ways.swap(next);
  }
  return ways[b];
}

BruteForceResult brute_force_best(const CapacityVector& caps, Count budget,
                                  const WidthPosterior& p_t, const InductiveParams& params,
                                  Count K, bool multiplicity) {
  check_budget(caps, budget);
  const std::uint64_t n = count_feasible_allocations(caps, budget);
  if (n > kMaxEnumeration)
    throw std::length_error("brute_force_best: " + std::to_string(n) +
                            " feasible allocations exceed the enumeration guard");

  std::vector<std::vector<Count>> all;
  all.reserve(static_cast<std::size_t>(n));
  enumerate_allocations(caps, budget, [&](const std::vector<Count>& a) { all.push_back(a); });

  std::vector<double> values(all.size());
  const auto m = static_cast<std::int64_t>(all.size());
#pragma omp parallel for schedule(dynamic, 16) if (m > 256)
  for (std::int64_t i = 0; i < m; ++i)
    values[static_cast<std::size_t>(i)] =
        alignment_objective(Allocation{all[static_cast<std::size_t>(i)]}, p_t, params, K,
                            multiplicity);

  // Lexicographic enumeration order + strict improvement = smallest argmax.
  BruteForceResult out;
  out.evaluated = all.size();
  out.objective = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (values[i] > out.objective) {
      out.objective = values[i];
      out.best.counts = all[i];
    }
  }
  return out;
}

}  // namespace semalloc
