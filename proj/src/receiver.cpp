#include "semalloc/receiver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace semalloc {

void Hypothesis::validate() const {
  if (dist.empty()) throw std::invalid_argument("hypothesis has an empty distribution");
  double sum = 0.0;
  for (double p : dist) {
    if (!(p >= 0.0)) throw std::invalid_argument("hypothesis probabilities must be >= 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("hypothesis does not sum to 1");
}

void ReceiverState::ingest(std::span<const Count> msg) {
  received_.add(msg);
  history_.emplace_back(msg.begin(), msg.end());
  posterior_.reset();
}

const WidthPosterior& ReceiverState::posterior(const InductiveParams& params,
                                               PosteriorMethod method, bool multiplicity) {
  if (!posterior_) {
    if (received_.width() == 0)
      posterior_ = WidthPosterior::uniform(1, received_.num_types());
    else if (method == PosteriorMethod::kExact)
      posterior_ = exact_posterior(received_, params, multiplicity);
    else
      posterior_ = stirling_posterior(received_, params, multiplicity);
  }
  return *posterior_;
}

std::vector<double> score_hypotheses(const EvidenceCounts& received,
                                     const std::vector<Hypothesis>& hypotheses, double smoothing) {
  if (hypotheses.empty()) throw std::invalid_argument("score_hypotheses: empty hypothesis set");
  if (smoothing < 0.0) throw std::invalid_argument("score_hypotheses: negative smoothing");
  const auto K = static_cast<std::size_t>(received.num_types());
  const double log_prior = -std::log(static_cast<double>(hypotheses.size()));

  std::vector<double> scores;
  scores.reserve(hypotheses.size());
  for (const Hypothesis& h : hypotheses) {
    if (h.dist.size() != K) throw std::invalid_argument("score_hypotheses: dimension mismatch");
    const double norm = 1.0 + smoothing * static_cast<double>(K);
    double s = log_prior;
    for (std::size_t j = 0; j < K && std::isfinite(s); ++j) {
      const Count n = received[j];
      if (n == 0) continue;
      const double p = (h.dist[j] + smoothing) / norm;
      s = p > 0.0 ? s + static_cast<double>(n) * std::log(p)
                  : -std::numeric_limits<double>::infinity();
    }
    scores.push_back(s);
  }
  return scores;
}

std::optional<std::size_t> map_select(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("map_select: no scores");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  if (scores[best] == -std::numeric_limits<double>::infinity()) return std::nullopt;
  return best;
}

}  // namespace semalloc
