#include "semalloc/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace semalloc {
namespace {

template <typename T>
double norm_impl(std::span<const T> a, std::span<const T> b, Norm norm) {
  if (a.size() != b.size()) throw std::invalid_argument("deviation_norm: length mismatch");
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = std::abs(static_cast<double>(a[j]) - static_cast<double>(b[j]));
    switch (norm) {
      case Norm::kL1: acc += d; break;
      case Norm::kL2: acc += d * d; break;
      case Norm::kLinf: acc = std::max(acc, d); break;
    }
  }
  return norm == Norm::kL2 ? std::sqrt(acc) : acc;
}

void require_budget(Count available, Count budget, const char* who) {
  if (budget <= 0) throw std::domain_error(std::string(who) + ": budget must be positive");
  if (available < budget)
    throw InfeasibleError(std::string(who) + ": remaining capacity " + std::to_string(available) +
                          " is below the budget " + std::to_string(budget));
}

bool fits(std::span<const Count> base, const Allocation& msg, const CapacityVector& caps) {
  for (std::size_t j = 0; j < msg.size(); ++j)
    if (base[j] + msg.counts[j] > caps.caps[j]) return false;
  return true;
}

// C(n, k), saturating.
std::uint64_t choose(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  long double r = 1.0L;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * static_cast<long double>(n - k + i) / static_cast<long double>(i);
    if (r > 1e19L) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(std::llround(r));
}

}  // namespace

double deviation_norm(std::span<const Count> a, std::span<const Count> b, Norm norm) {
  return norm_impl(a, b, norm);
}

double deviation_norm(std::span<const double> a, std::span<const double> b, Norm norm) {
  return norm_impl(a, b, norm);
}

// ---- TransmitterState -------------------------------------------------------

TransmitterState::TransmitterState(const EvidenceCounts& evidence)
    : num_types_(evidence.num_types()) {
  for (std::size_t j = 0; j < evidence.counts().size(); ++j) {
    if (evidence[j] > 0) {
      types_.push_back(j);
      pool_.caps.push_back(evidence[j]);
    }
  }
  if (types_.empty()) throw std::invalid_argument("TransmitterState: evidence is empty");
  sent_.assign(types_.size(), 0);
}

CapacityVector TransmitterState::remaining() const {
  CapacityVector r;
  r.caps.resize(pool_.size());
  for (std::size_t j = 0; j < pool_.size(); ++j) r.caps[j] = pool_.caps[j] - sent_[j];
  return r;
}

Count TransmitterState::remaining_total() const {
  return pool_.total() - std::accumulate(sent_.begin(), sent_.end(), Count{0});
}

void TransmitterState::record(const Allocation& msg) {
  if (msg.size() != sent_.size()) throw std::invalid_argument("record: length mismatch");
  for (std::size_t j = 0; j < sent_.size(); ++j) {
    if (msg.counts[j] < 0 || sent_[j] + msg.counts[j] > pool_.caps[j])
      throw InfeasibleError("record: message exceeds remaining capacity");
  }
  for (std::size_t j = 0; j < sent_.size(); ++j) sent_[j] += msg.counts[j];
  ++round_;
}

std::vector<Count> TransmitterState::expand(const Allocation& msg) const {
  if (msg.size() != types_.size()) throw std::invalid_argument("expand: length mismatch");
  std::vector<Count> out(static_cast<std::size_t>(num_types_), 0);
  for (std::size_t k = 0; k < types_.size(); ++k) out[types_[k]] = msg.counts[k];
  return out;
}

// ---- water-filling ----------------------------------------------------------

LongTermPlan wf_long_plan(const CapacityVector& pool, Count rounds, Count budget) {
  if (rounds <= 0) throw std::domain_error("wf_long_plan: rounds must be positive");
  require_budget(pool.total(), rounds * budget, "wf_long_plan");
  LongTermPlan plan;
  plan.target = water_fill_allocation(pool, rounds * budget);
  CapacityVector residual{plan.target.counts};
  for (Count t = 0; t < rounds; ++t) {
    Allocation msg = water_fill_allocation(residual, budget);
    for (std::size_t j = 0; j < residual.size(); ++j) residual.caps[j] -= msg.counts[j];
    plan.schedule.push_back(std::move(msg));
  }
  return plan;
}

Allocation wf_greedy_round(const TransmitterState& state, Count budget) {
  require_budget(state.remaining_total(), budget, "wf_greedy_round");
  return water_fill_allocation(state.remaining(), budget);
}

// ---- baselines --------------------------------------------------------------

Allocation scld_round(const TransmitterState& state, const EvidenceCounts& receiver, Count budget,
                      double lambda) {
  require_budget(state.remaining_total(), budget, "scld_round");
  if (receiver.num_types() != state.num_types())
    throw std::invalid_argument("scld_round: receiver and transmitter type spaces differ");

  const CapacityVector left = state.remaining();
  const std::vector<std::size_t>& types = state.types();
  const Count width = std::max<Count>(receiver.width(), 1);
  Count total = receiver.total();
  Allocation picks{std::vector<Count>(types.size(), 0)};

  for (Count b = 0; b < budget; ++b) {
    std::size_t best = types.size();
    double best_cont = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < types.size(); ++k) {
      if (left.caps[k] - picks.counts[k] <= 0) continue;
      const Count l_g = receiver[types[k]] + picks.counts[k];
      const double c = cont_information(total, l_g, width, lambda);
      if (c > best_cont) {
        best_cont = c;
        best = k;
      }
    }
    ++picks.counts[best];
    ++total;
  }
  return picks;
}

Allocation random_free_round(const TransmitterState& state, Count budget, Rng& rng) {
  require_budget(state.remaining_total(), budget, "random_free_round");
  std::vector<Count> left = state.remaining().caps;
  Count pool_size = state.remaining_total();
  Allocation out{std::vector<Count>(left.size(), 0)};
  for (Count b = 0; b < budget; ++b) {
    std::uniform_int_distribution<Count> pick(0, pool_size - 1);
    Count u = pick(rng);
    std::size_t k = 0;
    while (u >= left[k]) u -= left[k++];
    --left[k];
    ++out.counts[k];
    --pool_size;
  }
  return out;
}

std::size_t random_chunk_round(const CandidatePool& chunks, std::vector<bool>& used, Rng& rng) {
  if (used.size() != chunks.size()) throw std::invalid_argument("random_chunk_round: bad used mask");
  std::vector<std::size_t> unused;
  for (std::size_t m = 0; m < chunks.size(); ++m)
    if (!used[m]) unused.push_back(m);
  if (unused.empty()) throw InfeasibleError("random_chunk_round: chunk pool exhausted");
  std::uniform_int_distribution<std::size_t> pick(0, unused.size() - 1);
  const std::size_t m = unused[pick(rng)];
  used[m] = true;
  return m;
}

CandidatePool evidence_chunks(const std::vector<std::size_t>& draws,
                              const TransmitterState& state, Count budget) {
  if (budget <= 0) throw std::domain_error("evidence_chunks: budget must be positive");
  std::vector<std::size_t> position(static_cast<std::size_t>(state.num_types()),
                                    state.types().size());
  for (std::size_t k = 0; k < state.types().size(); ++k) position[state.types()[k]] = k;

  CandidatePool pool;
  const auto b = static_cast<std::size_t>(budget);
  for (std::size_t start = 0; start + b <= draws.size(); start += b) {
    Allocation msg{std::vector<Count>(state.types().size(), 0)};
    for (std::size_t i = start; i < start + b; ++i) {
      const std::size_t k = position.at(draws[i]);
      if (k == state.types().size())
        throw std::invalid_argument("evidence_chunks: draw of an unobserved type");
      ++msg.counts[k];
    }
    pool.messages.push_back(std::move(msg));
  }
  return pool;
}

// ---- candidate-pool selection -----------------------------------------------

Allocation ideal_cumulative_target(const CapacityVector& caps, Count round, Count budget) {
  return water_fill_allocation(caps, round * budget);
}

SubsetSelection select_subset_longterm(const CandidatePool& pool, std::size_t count,
                                       const CapacityVector& caps, const Allocation& target,
                                       Norm norm) {
  const std::size_t M = pool.size();
  if (count > M) throw std::invalid_argument("select_subset_longterm: T' exceeds pool size");
  if (target.size() != caps.size()) throw std::invalid_argument("select_subset_longterm: bad target");
  for (const Allocation& m : pool.messages)
    if (m.size() != caps.size()) throw std::invalid_argument("select_subset_longterm: bad message");

  const std::size_t f = caps.size();
  SubsetSelection best;
  best.deviation = std::numeric_limits<double>::infinity();

  auto within_caps = [&](const std::vector<Count>& sum) {
    for (std::size_t j = 0; j < f; ++j)
      if (sum[j] > caps.caps[j]) return false;
    return true;
  };

  if (choose(M, count) <= kMaxExactSubsets) {
    best.exact = true;
    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<Count> sum(f);
    while (true) {
      std::fill(sum.begin(), sum.end(), 0);
      for (std::size_t m : idx)
        for (std::size_t j = 0; j < f; ++j) sum[j] += pool.messages[m].counts[j];
      if (within_caps(sum)) {
        const double d = deviation_norm(sum, target.counts, norm);
        if (d < best.deviation) {
          best.deviation = d;
          best.indices = idx;
        }
      }
      // next combination in lexicographic order
      std::size_t i = count;
      while (i > 0 && idx[i - 1] == M - count + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t k = i; k < count; ++k) idx[k] = idx[k - 1] + 1;
    }
    if (best.indices.size() != count || !std::isfinite(best.deviation))
      throw InfeasibleError("select_subset_longterm: no cap-feasible subset");
    return best;
  }

  // Greedy construction.
  std::vector<bool> in(M, false);
  std::vector<Count> sum(f, 0);
  std::vector<std::size_t> chosen;
  for (std::size_t step = 0; step < count; ++step) {
    std::size_t pick = M;
    double pick_dev = std::numeric_limits<double>::infinity();
    std::vector<Count> trial(f);
    for (std::size_t m = 0; m < M; ++m) {
      if (in[m] || !fits(sum, pool.messages[m], caps)) continue;
      for (std::size_t j = 0; j < f; ++j) trial[j] = sum[j] + pool.messages[m].counts[j];
      const double d = deviation_norm(trial, target.counts, norm);
      if (d < pick_dev) {
        pick_dev = d;
        pick = m;
      }
    }
    if (pick == M) throw InfeasibleError("select_subset_longterm: no cap-feasible subset");
    in[pick] = true;
    chosen.push_back(pick);
    for (std::size_t j = 0; j < f; ++j) sum[j] += pool.messages[pick].counts[j];
  }

  // One pass of first-improvement pairwise swaps.
  double current = deviation_norm(sum, target.counts, norm);
  std::vector<Count> trial(f);
  for (std::size_t s = 0; s < chosen.size(); ++s) {
    for (std::size_t m = 0; m < M; ++m) {
      if (in[m]) continue;
      const Allocation& out_msg = pool.messages[chosen[s]];
      const Allocation& in_msg = pool.messages[m];
      for (std::size_t j = 0; j < f; ++j) trial[j] = sum[j] - out_msg.counts[j] + in_msg.counts[j];
      if (!within_caps(trial)) continue;
      const double d = deviation_norm(trial, target.counts, norm);
      if (d < current) {
        current = d;
        sum = trial;
        in[chosen[s]] = false;
        in[m] = true;
        chosen[s] = m;
      }
    }
  }
  std::sort(chosen.begin(), chosen.end());
  best.indices = std::move(chosen);
  best.deviation = current;
  best.exact = false;
  return best;
}

std::size_t select_greedy_per_round(const CandidatePool& pool, const std::vector<bool>& used,
                                    std::span<const Count> sent, const Allocation& step_target,
                                    const CapacityVector& caps, Norm norm) {
  if (used.size() != pool.size()) throw std::invalid_argument("select_greedy_per_round: bad used mask");
  if (sent.size() != caps.size() || step_target.size() != caps.size())
    throw std::invalid_argument("select_greedy_per_round: length mismatch");
  std::size_t pick = pool.size();
  double pick_dev = std::numeric_limits<double>::infinity();
  std::vector<Count> trial(caps.size());
  for (std::size_t m = 0; m < pool.size(); ++m) {
    if (used[m] || !fits(sent, pool.messages[m], caps)) continue;
    for (std::size_t j = 0; j < caps.size(); ++j) trial[j] = sent[j] + pool.messages[m].counts[j];
    const double d = deviation_norm(trial, step_target.counts, norm);
    if (d < pick_dev) {
      pick_dev = d;
      pick = m;
    }
  }
  if (pick == pool.size()) throw InfeasibleError("select_greedy_per_round: no feasible candidate");
  return pick;
}

}  // namespace semalloc
