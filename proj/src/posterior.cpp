#include "semalloc/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace semalloc {
namespace {

void check_inputs(Count width, Count K, const InductiveParams& params) {
  params.validate();
  if (!(params.lambda > 0.0)) throw std::domain_error("posterior: lambda must be > 0");
  if (width < 1) throw std::invalid_argument("posterior: no evidence (f = 0)");
  if (K < width) throw std::invalid_argument("posterior: K must be >= f");
}

WidthPosterior normalize_log_mass(Count f, Count K, std::vector<double> log_mass) {
  const double z = log_sum_exp(log_mass);
  if (!std::isfinite(z)) throw std::domain_error("posterior: log normalizer is not finite");
  WidthPosterior out{f, K, std::move(log_mass)};
  for (double& v : out.probs) v = std::exp(v - z);
  return out;
}

// alpha^((f + i - w) lambda / K) in log space, with 0 * log 0 = 0.
double alpha_term(double exponent, double alpha) {
  if (exponent == 0.0) return 0.0;
  if (alpha == 0.0) throw std::domain_error("stirling_posterior: alpha = 0 with nonzero exponent");
  return exponent * std::log(alpha);
}

}  // namespace

WidthPosterior WidthPosterior::uniform(Count f_min, Count K) {
  if (f_min < 1 || K < f_min) throw std::invalid_argument("uniform posterior: need 1 <= f <= K");
  const auto n = static_cast<std::size_t>(K - f_min + 1);
  return WidthPosterior{f_min, K, std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

StirlingSummary summarize(const EvidenceCounts& evidence) {
  StirlingSummary s;
  for (Count n : evidence.counts()) {
    if (n <= 0) continue;
    ++s.width;
    s.sum_log += std::log(static_cast<double>(n));
    s.total += static_cast<double>(n);
  }
  return s;
}

StirlingSummary summarize(std::span<const double> counts) {
  StirlingSummary s;
  for (double n : counts) {
    if (n < 0.0) throw std::invalid_argument("summarize: negative count");
    if (n == 0.0) continue;
    ++s.width;
    s.sum_log += std::log(n);
    s.total += n;
  }
  return s;
}

// ---- exact ----------------------------------------------------------------

WidthPosterior exact_posterior(const EvidenceCounts& evidence, const InductiveParams& params,
                               bool multiplicity) {
  const Count f = evidence.width();
  const Count K = evidence.num_types();
  check_inputs(f, K, params);
  const double alpha = params.alpha_for(static_cast<double>(evidence.total()));

  // Group observed counts by value: sum_j logpoch(n_j, x) = sum_v m_v logpoch(v, x).
  std::map<Count, Count> histogram;
  for (Count n : evidence.counts())
    if (n > 0) ++histogram[n];
  const std::vector<std::pair<Count, Count>> groups(histogram.begin(), histogram.end());

  const Count n_widths = K - f + 1;
  std::vector<double> log_mass(static_cast<std::size_t>(n_widths));

#pragma omp parallel for schedule(static) if (n_widths > 64)
  for (Count k = 0; k < n_widths; ++k) {
    const Count w = f + k;
    const double lam = params.lambda_at(w);
    double v = log_pochhammer(alpha, static_cast<double>(w) * lam / static_cast<double>(K));
    const double x = lam / static_cast<double>(w);
    const double lg_x = log_gamma(x);
    for (const auto& [value, mult] : groups)
      v += static_cast<double>(mult) * (log_gamma(static_cast<double>(value) + x) - lg_x);
    if (multiplicity) v += log_binomial(K - f, w - f);
    log_mass[static_cast<std::size_t>(k)] = v;
  }
  return normalize_log_mass(f, K, std::move(log_mass));
}

WidthPosterior exact_posterior_reference(const EvidenceCounts& evidence,
                                         const InductiveParams& params, bool multiplicity) {
  const Count f = evidence.width();
  const Count K = evidence.num_types();
  check_inputs(f, K, params);
  const double alpha = params.alpha_for(static_cast<double>(evidence.total()));

  std::vector<double> log_mass;
  for (Count w = f; w <= K; ++w) {
    const double lam = params.lambda_at(w);
    double v = log_pochhammer(alpha, static_cast<double>(w) * lam / static_cast<double>(K));
    for (Count n : evidence.counts())
      if (n > 0) v += log_pochhammer(static_cast<double>(n), lam / static_cast<double>(w));
    if (multiplicity) v += log_binomial(K - f, w - f);
    log_mass.push_back(v);
  }
  return normalize_log_mass(f, K, std::move(log_mass));
}

// ---- Stirling -------------------------------------------------------------

WidthPosterior stirling_posterior(const EvidenceCounts& evidence, const InductiveParams& params,
                                  bool multiplicity) {
  return stirling_posterior(summarize(evidence), evidence.num_types(), params, multiplicity);
}

WidthPosterior stirling_posterior(const StirlingSummary& summary, Count K,
                                  const InductiveParams& params, bool multiplicity) {
  const Count f = summary.width;
  check_inputs(f, K, params);
  const double lam = params.lambda;
  const double alpha = params.alpha_for(summary.total);
  const double S = summary.sum_log;
  const double Kd = static_cast<double>(K);
  const Count n_widths = K - f + 1;
  const auto n = static_cast<std::size_t>(n_widths);

  if (alpha == 0.0 && n_widths > 1)
    throw std::domain_error("stirling_posterior: alpha = 0 with nonzero exponent");
  const double log_alpha = alpha > 0.0 ? std::log(alpha) : 0.0;

  const double fd = static_cast<double>(f);
  const double alpha_slope = lam / Kd * log_alpha;

  // With w = f + k the (w, i) term of the denominator separates as
  //   term(k, i) = inner[i] - outer[k]
  //   inner[i] = log C(K-f, i) - lgG((f+i) lam/K) + i a - f lgG(lam/(f+i)) + lam S/(f+i)
  //   outer[k] = -lgG(w lam/K) + k a - f lgG(lam/w) + lam S/w,   a = (lam/K) log alpha
  // so log D(w) = LSE_i(inner) - outer[k] and the LSE is shared by all widths.
  std::vector<double> lbinom(n), inner(n), outer(n);
#pragma omp parallel for schedule(static) if (n_widths > 64)
  for (std::size_t k = 0; k < n; ++k) {
    const double w = static_cast<double>(f + static_cast<Count>(k));
    const double kd = static_cast<double>(k);
    lbinom[k] = log_binomial(K - f, static_cast<Count>(k));
    const double lg_prior = log_gamma(w * lam / Kd);
    const double lg_inst = log_gamma(lam / w);
    inner[k] = lbinom[k] - lg_prior + kd * alpha_slope - fd * lg_inst + lam * S / w;
    outer[k] = -lg_prior + kd * alpha_slope - fd * lg_inst + lam * S / w;
  }
  const double shared = log_sum_exp(inner);

  std::vector<double> log_mass(n);
  for (std::size_t k = 0; k < n; ++k)
    log_mass[k] = -(shared - outer[k]) + (multiplicity ? lbinom[k] : 0.0);
  return normalize_log_mass(f, K, std::move(log_mass));
}

WidthPosterior stirling_posterior_reference(const StirlingSummary& summary, Count K,
                                            const InductiveParams& params, bool multiplicity) {
  const Count f = summary.width;
  check_inputs(f, K, params);
  const double lam = params.lambda;
  const double alpha = params.alpha_for(summary.total);
  const double Kd = static_cast<double>(K);
  const double fd = static_cast<double>(f);

  std::vector<double> log_mass;
  std::vector<double> terms;
  for (Count w = f; w <= K; ++w) {
    const double wd = static_cast<double>(w);
    terms.clear();
    for (Count i = 0; i <= K - f; ++i) {
      const double fi = static_cast<double>(f + i);
      const double beta = (1.0 / fi - 1.0 / wd) * lam;
      terms.push_back(log_binomial(K - f, i) + log_gamma(wd * lam / Kd) -
                      log_gamma(fi * lam / Kd) + alpha_term((fi - wd) * lam / Kd, alpha) +
                      fd * (log_gamma(lam / wd) - log_gamma(lam / fi)) + beta * summary.sum_log);
    }
    double v = -log_sum_exp(terms);
    if (multiplicity) v += log_binomial(K - f, w - f);
    log_mass.push_back(v);
  }
  return normalize_log_mass(f, K, std::move(log_mass));
}

// ---- distances ------------------------------------------------------------

std::pair<std::vector<double>, std::vector<double>> align_supports(const WidthPosterior& p,
                                                                   const WidthPosterior& q) {
  const Count lo = std::min(p.f_min, q.f_min);
  const Count hi = std::max(p.K, q.K);
  std::vector<double> a, b;
  a.reserve(static_cast<std::size_t>(hi - lo + 1));
  b.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (Count w = lo; w <= hi; ++w) {
    a.push_back(p.at(w));
    b.push_back(q.at(w));
  }
  return {std::move(a), std::move(b)};
}

double cosine_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("cosine_distance: length mismatch");
  double dot = 0.0, pp = 0.0, qq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    dot += p[i] * q[i];
    pp += p[i] * p[i];
    qq += q[i] * q[i];
  }
  if (pp == 0.0 || qq == 0.0) throw std::domain_error("cosine_distance: zero vector");
  const double d = 1.0 - dot / (std::sqrt(pp) * std::sqrt(qq));
  return std::clamp(d, 0.0, 1.0);
}

double cosine_distance(const WidthPosterior& p, const WidthPosterior& q) {
  const auto [a, b] = align_supports(p, q);
  return cosine_distance(a, b);
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: length mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(kl, 0.0);
}

double kl_divergence(const WidthPosterior& p, const WidthPosterior& q) {
  const auto [a, b] = align_supports(p, q);
  return kl_divergence(a, b);
}

double total_variation(const WidthPosterior& p, const WidthPosterior& q) {
  const auto [a, b] = align_supports(p, q);
  double tv = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] - b[i]);
  return 0.5 * tv;
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("log_sum_exp: empty input");
  if (values.size() == 1) return values[0];
  const double peak = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(peak)) return peak;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - peak);
  return peak + std::log(acc);
}

}  // namespace semalloc
