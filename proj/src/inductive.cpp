#include "semalloc/inductive.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace semalloc {

EvidenceCounts::EvidenceCounts(Count num_types) {
  if (num_types < 1) throw std::invalid_argument("EvidenceCounts: K must be positive");
  counts_.assign(static_cast<std::size_t>(num_types), 0);
}

EvidenceCounts::EvidenceCounts(Count num_types, std::span<const Count> counts)
    : EvidenceCounts(num_types) {
  if (static_cast<Count>(counts.size()) > num_types)
    throw std::invalid_argument("EvidenceCounts: more counts than types");
  for (std::size_t j = 0; j < counts.size(); ++j) add(j, counts[j]);
}

void EvidenceCounts::add(std::size_t j, Count n) {
  if (j >= counts_.size()) throw std::out_of_range("EvidenceCounts: type index out of range");
  if (n < 0) throw std::invalid_argument("EvidenceCounts: negative count");
  if (n == 0) return;
  if (counts_[j] == 0) ++width_;
  counts_[j] += n;
  total_ += n;
}

void EvidenceCounts::add(std::span<const Count> delta) {
  if (delta.size() > counts_.size())
    throw std::invalid_argument("EvidenceCounts: delta longer than type space");
  for (std::size_t j = 0; j < delta.size(); ++j) add(j, delta[j]);
}

std::vector<Count> EvidenceCounts::positive_counts() const {
  std::vector<Count> out;
  out.reserve(static_cast<std::size_t>(width_));
  for (Count n : counts_)
    if (n > 0) out.push_back(n);
  return out;
}

void InductiveParams::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::domain_error("lambda must be a finite non-negative number");
  if (alpha_mode == AlphaMode::kFixed && (!(fixed_alpha >= 0.0) || !std::isfinite(fixed_alpha)))
    throw std::domain_error("fixed alpha must be a finite non-negative number");
}

double confirmation(Count l, Count l_g, Count w, double lambda) {
  if (l < 0 || l_g < 0 || l_g > l) throw std::domain_error("confirmation: need 0 <= l_g <= l");
  if (w < 1) throw std::domain_error("confirmation: width must be >= 1");
  if (!(lambda >= 0.0)) throw std::domain_error("confirmation: lambda must be >= 0");
  if (l == 0 && lambda == 0.0)
    throw std::domain_error("confirmation: degenerate denominator (l = 0, lambda = 0)");
  return (static_cast<double>(l_g) + lambda / static_cast<double>(w)) /
         (static_cast<double>(l) + lambda);
}

double cont_information(Count l, Count l_g, Count w, double lambda) {
  return 1.0 - confirmation(l, l_g, w, lambda);
}

double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: argument must be positive");
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

double log_pochhammer(double a, double x) {
  if (!(x > 0.0)) throw std::domain_error("log_pochhammer: x must be positive");
  if (!(a >= 0.0)) throw std::domain_error("log_pochhammer: a must be non-negative");
  if (a == 0.0) return 0.0;
  return log_gamma(x + a) - log_gamma(x);
}

double log_binomial(Count n, Count k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  if (k == 0 || k == n) return 0.0;
  return log_gamma(static_cast<double>(n) + 1.0) - log_gamma(static_cast<double>(k) + 1.0) -
         log_gamma(static_cast<double>(n - k) + 1.0);
}

std::uint64_t attributive_capacity(std::uint64_t num_predicates, std::uint64_t num_entities) {
  if (num_predicates < 1 || num_entities < 1)
    throw std::domain_error("attributive_capacity: inputs must be >= 1");
  // 4^e / 2 = 2^(2e - 1); representable iff 2e - 1 <= 63.
  constexpr std::uint64_t kMaxExponent = 32;
  if (num_entities > kMaxExponent || num_entities * num_entities > kMaxExponent ||
      num_predicates > kMaxExponent / (num_entities * num_entities))
    throw std::range_error("attributive_capacity: 4^(|P|*|E|^2)/2 overflows 64 bits (|P|=" +
                           std::to_string(num_predicates) +
                           ", |E|=" + std::to_string(num_entities) + ")");
  const std::uint64_t exponent = num_predicates * num_entities * num_entities;
  return std::uint64_t{1} << (2 * exponent - 1);
}

}  // namespace semalloc
