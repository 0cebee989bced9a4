#pragma once

// Receiver side: accumulated evidence, lazily refreshed width posterior and
// MAP selection among a finite hypothesis set.

#include <optional>
#include <vector>

#include "semalloc/inductive.hpp"
#include "semalloc/posterior.hpp"

namespace semalloc {

/// Categorical distribution over the K attributive types.
struct Hypothesis {
  std::size_t id = 0;
  std::vector<double> dist;

  void validate() const;
};

enum class PosteriorMethod { kExact, kStirling };

class ReceiverState {
 public:
  explicit ReceiverState(Count num_types) : received_(num_types) {}

  /// Adds a K-length message. The channel is error-free.
  void ingest(std::span<const Count> msg);

  const EvidenceCounts& received() const { return received_; }
  const std::vector<std::vector<Count>>& history() const { return history_; }
  bool stale() const { return !posterior_.has_value(); }

  /// Width posterior of the received evidence; uniform over [1, K] while empty.
  const WidthPosterior& posterior(const InductiveParams& params, PosteriorMethod method,
                                  bool multiplicity);

 private:
  EvidenceCounts received_;
  std::vector<std::vector<Count>> history_;
  std::optional<WidthPosterior> posterior_;
};

/// log p(received | h_i) + log prior_i with a uniform prior (the multinomial
/// coefficient is common to all hypotheses and dropped). A hypothesis that
/// gives zero probability to a received type scores -infinity unless
/// `smoothing` > 0 is added to every entry before renormalizing.
std::vector<double> score_hypotheses(const EvidenceCounts& received,
                                     const std::vector<Hypothesis>& hypotheses,
                                     double smoothing = 0.0);

/// Argmax of the scores; ties go to the lowest position. Returns nullopt
/// when every score is -infinity (no hypothesis is consistent).
std::optional<std::size_t> map_select(std::span<const double> scores);

}  // namespace semalloc
