#pragma once

// Single-round message composition: truncated water-filling, integer
// rounding, the posterior-alignment objective and an exhaustive oracle.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "semalloc/inductive.hpp"
#include "semalloc/posterior.hpp"

namespace semalloc {

/// Budget cannot be met under the capacity limits.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-type upper bounds n_j on what can be transmitted.
struct CapacityVector {
  std::vector<Count> caps;

  std::size_t size() const { return caps.size(); }
  Count total() const;
};

/// Integer per-type transmission counts n_j'.
struct Allocation {
  std::vector<Count> counts;

  std::size_t size() const { return counts.size(); }
  Count budget() const;
  Count width() const;  // number of positive entries
  bool feasible(const CapacityVector& caps, Count budget) const;

  friend bool operator==(const Allocation&, const Allocation&) = default;
};

/// Real-valued relaxation n_j^cont = min(theta, n_j).
struct ContinuousAllocation {
  std::vector<double> values;
  double water_level = 0.0;
};

/// theta with sum_j min(theta, caps_j) = budget. O(f log f).
double water_level(const CapacityVector& caps, Count budget);

ContinuousAllocation truncated_water_fill(const CapacityVector& caps, Count budget);

/// Largest-remainder rounding of a continuous allocation: floor everything,
/// then hand the missing units to the largest fractional parts, ties to the
/// larger capacity and then the lower index.
Allocation round_allocation(const ContinuousAllocation& cont, const CapacityVector& caps,
                            Count budget);

/// truncated_water_fill followed by round_allocation.
Allocation water_fill_allocation(const CapacityVector& caps, Count budget);

struct RoundingError {
  double linf = 0.0;
  double l1 = 0.0;
};

RoundingError rounding_error_report(const Allocation& rounded, const ContinuousAllocation& cont);

/// sum_w p_t(w) p_r(w), where p_r is the Stirling-form posterior of a
/// receiver holding the allocation. Zero entries do not count towards f_r.
double alignment_objective(const Allocation& alloc, const WidthPosterior& p_t,
                           const InductiveParams& params, Count K, bool multiplicity = true);

/// Same objective with real-valued counts.
double alignment_objective(std::span<const double> counts, const WidthPosterior& p_t,
                           const InductiveParams& params, Count K, bool multiplicity = true);

/// Number of integer vectors with sum = budget and 0 <= a_j <= caps_j,
/// saturating at UINT64_MAX.
std::uint64_t count_feasible_allocations(const CapacityVector& caps, Count budget);

/// Calls `visit` for each feasible integer allocation in lexicographic order.
template <typename Visitor>
void enumerate_allocations(const CapacityVector& caps, Count budget, Visitor&& visit);

struct BruteForceResult {
  Allocation best;
  double objective = 0.0;
  std::uint64_t evaluated = 0;
};

inline constexpr std::uint64_t kMaxEnumeration = 1'000'000;

/// Exhaustive argmax of alignment_objective; ties go to the lexicographically
/// smallest allocation. Throws std::length_error beyond kMaxEnumeration.
BruteForceResult brute_force_best(const CapacityVector& caps, Count budget,
                                  const WidthPosterior& p_t, const InductiveParams& params,
                                  Count K, bool multiplicity = true);

// ---- template implementation ----------------------------------------------

namespace detail {
template <typename Visitor>
void enumerate_rec(const std::vector<Count>& caps, const std::vector<Count>& suffix_cap,
                   std::size_t j, Count left, std::vector<Count>& cur, Visitor& visit) {
  if (j + 1 == caps.size()) {
    if (left <= caps[j]) {
      cur[j] = left;
      visit(static_cast<const std::vector<Count>&>(cur));
    }
    return;
  }
  const Count rest = suffix_cap[j + 1];
  const Count lo = left > rest ? left - rest : 0;
  const Count hi = left < caps[j] ? left : caps[j];
  for (Count v = lo; v <= hi; ++v) {
    cur[j] = v;
    enumerate_rec(caps, suffix_cap, j + 1, left - v, cur, visit);
  }
}
}  // namespace detail

template <typename Visitor>
void enumerate_allocations(const CapacityVector& caps, Count budget, Visitor&& visit) {
  if (caps.caps.empty() || budget < 0 || budget > caps.total()) return;
  std::vector<Count> suffix(caps.size() + 1, 0);
  for (std::size_t j = caps.size(); j-- > 0;) suffix[j] = suffix[j + 1] + caps.caps[j];
  std::vector<Count> cur(caps.size(), 0);
  detail::enumerate_rec(caps.caps, suffix, 0, budget, cur, visit);
}

}  // namespace semalloc
