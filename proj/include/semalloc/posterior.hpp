#pragma once

// Width posteriors p(C^w | E) for w in [f, K] and distances between them.
//
// Two evaluation routes are provided for each posterior:
//   - production kernels, OpenMP-parallel over widths,
//   - serial references that evaluate every term directly from the closed
//     form (the Stirling reference is the literal O(K^2) double sum).
// Tests and bench/ compare the two.

#include <span>
#include <vector>

#include "semalloc/inductive.hpp"

namespace semalloc {

/// Probability vector over constituent widths w in [f_min, K].
struct WidthPosterior {
  Count f_min = 1;
  Count K = 1;
  std::vector<double> probs;

  Count size() const { return static_cast<Count>(probs.size()); }
  /// p(w); zero outside [f_min, K].
  double at(Count w) const {
    return (w < f_min || w > K) ? 0.0 : probs[static_cast<std::size_t>(w - f_min)];
  }

  /// Uniform over [f_min, K]. Used as the receiver's belief before any evidence.
  static WidthPosterior uniform(Count f_min, Count K);
};

/// Sufficient statistics of an evidence set for the Stirling-form posterior.
/// Counts may be real-valued (continuous relaxation of an allocation).
struct StirlingSummary {
  Count width = 0;         // f
  double sum_log = 0.0;    // S = sum_j log n_j over observed types
  double total = 0.0;      // l
};

StirlingSummary summarize(const EvidenceCounts& evidence);
StirlingSummary summarize(std::span<const double> counts);

// ---- posteriors -----------------------------------------------------------

/// Exact posterior from ratios of Pochhammer symbols. With `multiplicity`
/// each width carries C(K - f, w - f) constituents.
WidthPosterior exact_posterior(const EvidenceCounts& evidence, const InductiveParams& params,
                               bool multiplicity = true);

/// Stirling-approximated posterior. Depends on the evidence only through
/// (f, S = sum_j log n_j, l). The (w, i) double sum of the denominator is
/// factorized, so one evaluation costs O(K) log-gamma calls.
WidthPosterior stirling_posterior(const EvidenceCounts& evidence, const InductiveParams& params,
                                  bool multiplicity = true);
WidthPosterior stirling_posterior(const StirlingSummary& summary, Count K,
                                  const InductiveParams& params, bool multiplicity = true);

/// Serial term-by-term evaluations, kept as oracles for the kernels above.
WidthPosterior exact_posterior_reference(const EvidenceCounts& evidence,
                                         const InductiveParams& params, bool multiplicity = true);
WidthPosterior stirling_posterior_reference(const StirlingSummary& summary, Count K,
                                            const InductiveParams& params,
                                            bool multiplicity = true);

// ---- distances ------------------------------------------------------------

/// Both posteriors on the common width grid [min(f_p, f_q), max(K_p, K_q)],
/// zero-padded.
std::pair<std::vector<double>, std::vector<double>> align_supports(const WidthPosterior& p,
                                                                   const WidthPosterior& q);

/// 1 - <p, q> / (|p| |q|). Throws std::domain_error on a zero vector.
double cosine_distance(std::span<const double> p, std::span<const double> q);
double cosine_distance(const WidthPosterior& p, const WidthPosterior& q);

/// sum_w p(w) log(p(w) / q(w)) in nats; +infinity when p is not absolutely
/// continuous w.r.t. q.
double kl_divergence(std::span<const double> p, std::span<const double> q);
double kl_divergence(const WidthPosterior& p, const WidthPosterior& q);

double total_variation(const WidthPosterior& p, const WidthPosterior& q);

/// Stable log(sum_i exp(v_i)). Throws std::invalid_argument on empty input.
double log_sum_exp(std::span<const double> values);

}  // namespace semalloc
