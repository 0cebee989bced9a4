#pragma once

// Inductive logical probability primitives: degree of confirmation,
// cont-information, log-gamma based Pochhammer symbols and the
// attributive-constituent capacity.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace semalloc {

using Count = std::int64_t;

/// Per-type observation counts n_j over K attributive-constituent types.
///
/// Types are 0-based internally (j in [0, K)). The width f (number of types
/// with n_j > 0) and the total l are maintained incrementally.
class EvidenceCounts {
 public:
  EvidenceCounts() = default;
  explicit EvidenceCounts(Count num_types);
  EvidenceCounts(Count num_types, std::span<const Count> counts);

  Count num_types() const { return static_cast<Count>(counts_.size()); }
  Count width() const { return width_; }
  Count total() const { return total_; }

  Count operator[](std::size_t j) const { return counts_[j]; }
  const std::vector<Count>& counts() const { return counts_; }

  void add(std::size_t j, Count n);
  void add(std::span<const Count> delta);

  /// Counts of the observed types only, in type order.
  std::vector<Count> positive_counts() const;

  friend bool operator==(const EvidenceCounts&, const EvidenceCounts&) = default;

 private:
  std::vector<Count> counts_;
  Count width_ = 0;
  Count total_ = 0;
};

enum class AlphaMode { kFixed, kFromEvidence };

/// Prior coefficient lambda and inductive generalization coefficient alpha.
struct InductiveParams {
  double lambda = 1.0;
  AlphaMode alpha_mode = AlphaMode::kFromEvidence;
  double fixed_alpha = 0.0;

  /// lambda(w). Constant for now; width-dependent priors hook in here.
  double lambda_at(Count /*width*/) const { return lambda; }

  /// alpha for a body of evidence with `total` observations.
  double alpha_for(double total) const {
    return alpha_mode == AlphaMode::kFixed ? fixed_alpha : total;
  }

  void validate() const;
};

/// c(g, e) = (l_g + lambda/w) / (l + lambda).
double confirmation(Count l, Count l_g, Count w, double lambda);

/// 1 - confirmation.
double cont_information(Count l, Count l_g, Count w, double lambda);

/// log Gamma(x), x > 0. Thread-safe.
double log_gamma(double x);

/// log of the shifted factorial Gamma(x + a) / Gamma(x).
double log_pochhammer(double a, double x);

/// log C(n, k) via log-gamma differences.
double log_binomial(Count n, Count k);

/// K = 4^(|P| * |E|^2) / 2. Throws std::range_error if K overflows 64 bits.
std::uint64_t attributive_capacity(std::uint64_t num_predicates, std::uint64_t num_entities);

}  // namespace semalloc
