#pragma once

// Transmitter policies. All allocations here are indexed by the
// transmitter's observed types (position k <-> type id types[k]).

#include <cstdint>
#include <random>
#include <vector>

#include "semalloc/allocation.hpp"
#include "semalloc/inductive.hpp"

namespace semalloc {

using Rng = std::mt19937_64;

enum class Norm { kL1, kL2, kLinf };

/// ||a - b|| for integer vectors; kL2 returns the Euclidean norm.
double deviation_norm(std::span<const Count> a, std::span<const Count> b, Norm norm);
double deviation_norm(std::span<const double> a, std::span<const double> b, Norm norm);

/// Transmitter evidence plus what has already been sent.
class TransmitterState {
 public:
  TransmitterState() = default;
  explicit TransmitterState(const EvidenceCounts& evidence);

  /// Type ids (0-based, ascending) of the observed types.
  const std::vector<std::size_t>& types() const { return types_; }
  const CapacityVector& pool() const { return pool_; }
  const std::vector<Count>& sent() const { return sent_; }
  Count round() const { return round_; }
  Count num_types() const { return num_types_; }

  /// r_j(t) = n_j - sum of earlier allocations.
  CapacityVector remaining() const;
  Count remaining_total() const;

  /// Adds a message to the sent tally and advances the round counter.
  void record(const Allocation& msg);

  /// Expands a per-observed-type allocation to all K types.
  std::vector<Count> expand(const Allocation& msg) const;

 private:
  std::vector<std::size_t> types_;
  CapacityVector pool_;
  std::vector<Count> sent_;
  Count round_ = 0;
  Count num_types_ = 0;
};

struct CandidatePool {
  std::vector<Allocation> messages;

  std::size_t size() const { return messages.size(); }
};

// ---- water-filling strategies ----------------------------------------------

struct LongTermPlan {
  Allocation target;                // budget T * B
  std::vector<Allocation> schedule;  // T messages of budget B
};

/// Water-fill the whole horizon at once, then split the target into T
/// messages by repeatedly water-filling the residual target with budget B.
LongTermPlan wf_long_plan(const CapacityVector& pool, Count rounds, Count budget);

/// Water-filling of budget B against the remaining capacities.
Allocation wf_greedy_round(const TransmitterState& state, Count budget);

// ---- baselines -------------------------------------------------------------

/// Cont-information greedy: B sequential picks of the type maximizing
/// cont(l, l_g, w, lambda) on the receiver's running counts, w frozen at the
/// receiver's width at round start. Ties go to the lowest type.
Allocation scld_round(const TransmitterState& state, const EvidenceCounts& receiver, Count budget,
                      double lambda);

/// B uniform draws without replacement from the remaining constituent instances.
Allocation random_free_round(const TransmitterState& state, Count budget, Rng& rng);

/// Uniform choice among unused chunks; marks the chosen chunk used.
std::size_t random_chunk_round(const CandidatePool& chunks, std::vector<bool>& used, Rng& rng);

/// Consecutive runs of `budget` observations (in draw order) as messages.
/// A trailing partial run is dropped.
CandidatePool evidence_chunks(const std::vector<std::size_t>& draws,
                              const TransmitterState& state, Count budget);

// ---- candidate-pool selection ----------------------------------------------

/// Exhaustive search up to this many subsets, greedy + swap beyond.
inline constexpr std::uint64_t kMaxExactSubsets = 100'000;

struct SubsetSelection {
  std::vector<std::size_t> indices;  // ascending
  double deviation = 0.0;
  bool exact = false;
};

/// Size-T' subset whose summed allocation is closest to `target` while the
/// cumulative allocation stays within `caps`.
SubsetSelection select_subset_longterm(const CandidatePool& pool, std::size_t count,
                                       const CapacityVector& caps, const Allocation& target,
                                       Norm norm = Norm::kL2);

/// Unused, cap-feasible message minimizing ||sent + A_m - step_target||.
std::size_t select_greedy_per_round(const CandidatePool& pool, const std::vector<bool>& used,
                                    std::span<const Count> sent, const Allocation& step_target,
                                    const CapacityVector& caps, Norm norm = Norm::kL2);

/// WF^(t): water-filling with cumulative budget t * B against the original caps.
Allocation ideal_cumulative_target(const CapacityVector& caps, Count round, Count budget);

}  // namespace semalloc
