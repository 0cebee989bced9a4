#include "semalloc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

namespace semalloc {
namespace {

std::vector<double> dirichlet(Count K, double concentration, Count support, Rng& rng) {
  const auto k = static_cast<std::size_t>(K);
  std::vector<std::size_t> active(k);
  std::iota(active.begin(), active.end(), std::size_t{0});
  if (support > 0 && support < K) {
    // partial Fisher-Yates
    for (std::size_t i = 0; i < static_cast<std::size_t>(support); ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, k - 1);
      std::swap(active[i], active[pick(rng)]);
    }
    active.resize(static_cast<std::size_t>(support));
    std::sort(active.begin(), active.end());
  }
  std::gamma_distribution<double> gamma(concentration, 1.0);
  std::vector<double> dist(k, 0.0);
  double total = 0.0;
  // Gamma draws with small shape can underflow to zero; redraw the (rare) all-zero case.
  while (total <= 0.0) {
    total = 0.0;
    for (std::size_t j : active) {
      dist[j] = gamma(rng);
      total += dist[j];
    }
  }
  for (double& p : dist) p /= total;
  return dist;
}

WidthPosterior belief(const EvidenceCounts& evidence, const ExperimentConfig& config) {
  const InductiveParams params = config.inductive();
  return config.posterior == PosteriorMethod::kExact
             ? exact_posterior(evidence, params, config.multiplicity)
             : stirling_posterior(evidence, params, config.multiplicity);
}

std::vector<double> as_real(const std::vector<Count>& v) {
  return {v.begin(), v.end()};
}

// Exceptions cannot cross an OpenMP region; workers park them here.
void rethrow_first(const std::vector<std::exception_ptr>& errors) {
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(master ^ mix64(index + 0x9E3779B97F4A7C15ULL));
}

World generate_world(const ExperimentConfig& config, Rng& rng) {
  config.validate();
  World world;
  for (Count i = 0; i < config.K_hypo; ++i) {
    world.hypotheses.push_back(
        Hypothesis{static_cast<std::size_t>(i),
                   dirichlet(config.K, config.dirichlet_concentration, config.hypothesis_support,
                             rng)});
  }
  std::uniform_int_distribution<std::size_t> pick_truth(0, world.hypotheses.size() - 1);
  world.truth = pick_truth(rng);

  const std::vector<double>& truth = world.hypotheses[world.truth].dist;
  std::discrete_distribution<std::size_t> draw(truth.begin(), truth.end());
  world.evidence = EvidenceCounts(config.K);
  world.draws.reserve(static_cast<std::size_t>(config.N_obs));
  for (Count n = 0; n < config.N_obs; ++n) {
    const std::size_t j = draw(rng);
    world.draws.push_back(j);
    world.evidence.add(j, 1);
  }
  return world;
}

EpisodeResult run_episode(const ExperimentConfig& config, const World& world, Strategy strategy,
                          Rng& rng, std::uint64_t sim_id) {
  const InductiveParams params = config.inductive();
  TransmitterState tx(world.evidence);
  ReceiverState rx(config.K);
  const WidthPosterior p_t = belief(world.evidence, config);
  const std::vector<double> tx_counts = as_real(world.evidence.counts());

  EpisodeResult out;
  const Count feasible_rounds = std::min(config.T, tx.remaining_total() / config.B);
  LongTermPlan plan;
  if (strategy == Strategy::kWfLong && feasible_rounds > 0)
    plan = wf_long_plan(tx.pool(), feasible_rounds, config.B);
  CandidatePool chunks;
  std::vector<bool> used;
  if (strategy == Strategy::kRandomChunk) {
    chunks = evidence_chunks(world.draws, tx, config.B);
    used.assign(chunks.size(), false);
  }

  for (Count t = 1; t <= config.T; ++t) {
    Allocation msg;
    try {
      switch (strategy) {
        case Strategy::kRandomFree: msg = random_free_round(tx, config.B, rng); break;
        case Strategy::kRandomChunk: msg = chunks.messages.at(random_chunk_round(chunks, used, rng)); break;
        case Strategy::kScld: msg = scld_round(tx, rx.received(), config.B, config.lambda); break;
        case Strategy::kWfGreedy: msg = wf_greedy_round(tx, config.B); break;
        case Strategy::kWfLong:
          if (t > feasible_rounds) throw InfeasibleError("wf-long: horizon exceeds capacity");
          msg = plan.schedule[static_cast<std::size_t>(t - 1)];
          break;
      }
    } catch (const InfeasibleError&) {
      out.truncated = true;
      break;
    }
    tx.record(msg);
    std::vector<Count> expanded = tx.expand(msg);
    rx.ingest(expanded);
    out.messages.push_back(std::move(expanded));

    const WidthPosterior& p_r = rx.posterior(params, config.posterior, config.multiplicity);
    const std::vector<double> rx_counts = as_real(rx.received().counts());
    const std::vector<double> scores =
        score_hypotheses(rx.received(), world.hypotheses, config.smoothing);
    const auto map = map_select(scores);

    RoundMetrics m;
    m.sim_id = sim_id;
    m.strategy = strategy;
    m.round = t;
    m.cosine_distance = cosine_distance(p_t, p_r);
    m.cosine_distance_counts = cosine_distance(tx_counts, rx_counts);
    m.kl_divergence = kl_divergence(p_t, p_r);
    m.map_correct = map && *map == world.truth ? 1 : 0;
    m.cumulative_sent = rx.received().total();
    m.f_r = rx.received().width();
    out.rows.push_back(m);
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto n_sim = static_cast<std::size_t>(config.N_sim);
  const std::vector<Strategy>& strategies = config.strategy;
  std::vector<std::vector<EpisodeResult>> episodes(n_sim);
  std::vector<std::exception_ptr> errors(n_sim);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t s = 0; s < static_cast<std::int64_t>(n_sim); ++s) try {
    const auto sim = static_cast<std::uint64_t>(s);
    const std::uint64_t seed = derive_seed(config.seed, sim);
    Rng world_rng(seed);
    const World world = generate_world(config, world_rng);
    std::vector<EpisodeResult>& mine = episodes[sim];
    for (Strategy st : strategies) {
      // Stream keyed by the strategy itself, so subsets of strategies replay identically.
      Rng rng(derive_seed(seed, 1 + static_cast<std::uint64_t>(st)));
      mine.push_back(run_episode(config, world, st, rng, sim));
    }
  } catch (...) {
    errors[static_cast<std::size_t>(s)] = std::current_exception();
  }
  rethrow_first(errors);

  ExperimentResult result;
  for (std::size_t k = 0; k < strategies.size(); ++k) {
    for (std::size_t sim = 0; sim < n_sim; ++sim) {
      const EpisodeResult& ep = episodes[sim][k];
      if (ep.truncated) ++result.truncated_episodes;
      result.rows.insert(result.rows.end(), ep.rows.begin(), ep.rows.end());
    }
  }
  result.aggregate = aggregate(result.rows, strategies);
  return result;
}

SeriesStat series_stat(const std::vector<double>& xs) {
  SeriesStat s;
  s.n = static_cast<Count>(xs.size());
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stderr_ = std::sqrt(ss / static_cast<double>(xs.size() - 1)) /
                std::sqrt(static_cast<double>(xs.size()));
  }
  return s;
}

CandidatePool ideal_step_pool(const CapacityVector& caps, Count rounds, Count budget) {
  CandidatePool pool;
  std::vector<Count> prev(caps.size(), 0);
  for (Count t = 1; t <= rounds; ++t) {
    const Allocation cur = ideal_cumulative_target(caps, t, budget);
    Allocation step{std::vector<Count>(caps.size())};
    for (std::size_t j = 0; j < caps.size(); ++j) {
      step.counts[j] = cur.counts[j] - prev[j];
      if (step.counts[j] < 0)
        throw InfeasibleError("ideal_step_pool: cumulative target is not monotone");
    }
    prev = cur.counts;
    pool.messages.push_back(std::move(step));
  }
  return pool;
}

std::vector<AggregateRow> aggregate(const std::vector<RoundMetrics>& rows,
                                    const std::vector<Strategy>& order) {
  struct Acc {
    std::vector<double> cos, cos_counts, kl, acc, fr;
    Count kl_inf = 0;
  };
  std::map<std::pair<int, Count>, Acc> groups;
  for (const RoundMetrics& r : rows) {
    Acc& a = groups[{static_cast<int>(r.strategy), r.round}];
    a.cos.push_back(r.cosine_distance);
    a.cos_counts.push_back(r.cosine_distance_counts);
    if (std::isfinite(r.kl_divergence)) a.kl.push_back(r.kl_divergence);
    else ++a.kl_inf;
    a.acc.push_back(static_cast<double>(r.map_correct));
    a.fr.push_back(static_cast<double>(r.f_r));
  }
  std::vector<AggregateRow> out;
  for (Strategy s : order) {
    for (const auto& [key, a] : groups) {
      if (key.first != static_cast<int>(s)) continue;
      AggregateRow row;
      row.strategy = s;
      row.round = key.second;
      row.cosine = series_stat(a.cos);
      row.cosine_counts = series_stat(a.cos_counts);
      row.kl = series_stat(a.kl);
      row.accuracy = series_stat(a.acc);
      row.f_r = series_stat(a.fr);
      row.kl_infinite = a.kl_inf;
      out.push_back(row);
    }
  }
  return out;
}

// ---- CSV --------------------------------------------------------------------

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.8e", v);
  return buf;
}

void write_csv(std::ostream& out, const std::vector<RoundMetrics>& rows) {
  out << kCsvHeader << '\n';
  for (const RoundMetrics& r : rows) {
    out << r.sim_id << ',' << to_string(r.strategy) << ',' << r.round << ','
        << format_real(r.cosine_distance) << ',' << format_real(r.cosine_distance_counts) << ','
        << format_real(r.kl_divergence) << ',' << r.map_correct << ',' << r.cumulative_sent << ','
        << r.f_r << '\n';
  }
}

std::vector<RoundMetrics> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw std::runtime_error("read_csv: unexpected header '" + line + "'");
  std::vector<RoundMetrics> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9)
      throw std::runtime_error("read_csv: line " + std::to_string(line_no) + " has " +
                               std::to_string(cells.size()) + " columns");
    try {
      RoundMetrics r;
      r.sim_id = std::stoull(cells[0]);
      r.strategy = parse_strategy(cells[1]);
      r.round = std::stoll(cells[2]);
      r.cosine_distance = std::stod(cells[3]);
      r.cosine_distance_counts = std::stod(cells[4]);
      r.kl_divergence = std::stod(cells[5]);
      r.map_correct = std::stoi(cells[6]);
      r.cumulative_sent = std::stoll(cells[7]);
      r.f_r = std::stoll(cells[8]);
      rows.push_back(r);
    } catch (const std::exception& e) {
      throw std::runtime_error("read_csv: line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

// ---- convergence ------------------------------------------------------------

CandidatePool perturbed_chunk_pool(const World& world, const TransmitterState& state, Count budget,
                                   Count variants, Rng& rng) {
  CandidatePool pool = evidence_chunks(world.draws, state, budget);
  const std::size_t base = pool.size();
  const CapacityVector& caps = state.pool();
  const std::size_t f = caps.size();
  if (f < 2) return pool;
  std::uniform_int_distribution<std::size_t> any_type(0, f - 1);
  for (std::size_t m = 0; m < base; ++m) {
    for (Count v = 0; v < variants; ++v) {
      Allocation msg = pool.messages[m];
      std::vector<std::size_t> donors;
      for (std::size_t j = 0; j < f; ++j)
        if (msg.counts[j] > 0) donors.push_back(j);
      std::uniform_int_distribution<std::size_t> pick_donor(0, donors.size() - 1);
      const std::size_t from = donors[pick_donor(rng)];
      std::size_t to = any_type(rng);
      // Bounded retry for a receiving type with spare capacity.
      for (int tries = 0; tries < 16 && (to == from || msg.counts[to] + 1 > caps.caps[to]); ++tries)
        to = any_type(rng);
      if (to == from || msg.counts[to] + 1 > caps.caps[to]) continue;
      --msg.counts[from];
      ++msg.counts[to];
      pool.messages.push_back(std::move(msg));
    }
  }
  return pool;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need >= 2 points");
  for (double v : y)
    if (v <= 0.0) return -std::numeric_limits<double>::infinity();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

ConvergenceReport convergence_study(const ExperimentConfig& config, const std::vector<Count>& grid,
                                    PoolSpec pool_spec) {
  config.validate();
  if (grid.empty()) throw std::invalid_argument("convergence_study: empty grid");
  for (Count g : grid)
    if (g <= 0) throw std::invalid_argument("convergence_study: grid entries must be positive");
  const Count horizon = *std::max_element(grid.begin(), grid.end());
  const auto n_sim = static_cast<std::size_t>(config.N_sim);

  std::vector<std::vector<double>> greedy(n_sim), subset(n_sim);
  std::vector<std::vector<int>> exact(n_sim);
  std::vector<std::exception_ptr> errors(n_sim);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t s = 0; s < static_cast<std::int64_t>(n_sim); ++s) try {
    const auto sim = static_cast<std::size_t>(s);
    const std::uint64_t seed = derive_seed(config.seed, sim);
    Rng rng(seed);
    const World world = generate_world(config, rng);
    const TransmitterState tx(world.evidence);
    const CapacityVector& caps = tx.pool();
    if (horizon * config.B > caps.total())
      throw InfeasibleError("convergence_study: T' * B exceeds the evidence size");
    Rng pool_rng(derive_seed(seed, 0xC0FFEE));
    const CandidatePool pool =
        pool_spec == PoolSpec::kIdealSteps
            ? ideal_step_pool(caps, horizon, config.B)
            : perturbed_chunk_pool(world, tx, config.B, config.pool_variants, pool_rng);
    if (static_cast<Count>(pool.size()) < horizon)
      throw InfeasibleError("convergence_study: candidate pool smaller than T'");

    // Greedy per-round selection; T' grid points are prefixes of one run.
    std::vector<bool> used(pool.size(), false);
    std::vector<Count> sent(caps.size(), 0);
    std::vector<double> dev_at(static_cast<std::size_t>(horizon) + 1, 0.0);
    for (Count t = 1; t <= horizon; ++t) {
      const Allocation target = ideal_cumulative_target(caps, t, config.B);
      const std::size_t m = select_greedy_per_round(pool, used, sent, target, caps, config.norm);
      used[m] = true;
      for (std::size_t j = 0; j < sent.size(); ++j) sent[j] += pool.messages[m].counts[j];
      dev_at[static_cast<std::size_t>(t)] = deviation_norm(sent, target.counts, Norm::kLinf);
    }
    for (Count g : grid) {
      greedy[sim].push_back(dev_at[static_cast<std::size_t>(g)]);
      const Allocation target = ideal_cumulative_target(caps, g, config.B);
      const SubsetSelection sel =
          select_subset_longterm(pool, static_cast<std::size_t>(g), caps, target, config.norm);
      std::vector<Count> sum(caps.size(), 0);
      for (std::size_t m : sel.indices)
        for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += pool.messages[m].counts[j];
      subset[sim].push_back(deviation_norm(sum, target.counts, Norm::kLinf));
      exact[sim].push_back(sel.exact ? 1 : 0);
    }
  } catch (...) {
    errors[static_cast<std::size_t>(s)] = std::current_exception();
  }
  rethrow_first(errors);

  ConvergenceReport report;
  std::vector<double> xs, ys;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    ConvergencePoint p;
    p.rounds = grid[g];
    for (std::size_t sim = 0; sim < n_sim; ++sim) {
      p.greedy_deviation += greedy[sim][g];
      p.subset_deviation += subset[sim][g];
      p.exact_subsets += exact[sim][g];
    }
    p.greedy_deviation /= static_cast<double>(n_sim);
    p.subset_deviation /= static_cast<double>(n_sim);
    report.points.push_back(p);
    xs.push_back(static_cast<double>(p.rounds));
    ys.push_back(p.greedy_deviation);
  }
  report.greedy_slope = grid.size() >= 2 ? loglog_slope(xs, ys) : 0.0;
  return report;
}

}  // namespace semalloc
