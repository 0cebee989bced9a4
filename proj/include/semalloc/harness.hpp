#pragma once

// Synthetic Dirichlet-multinomial worlds, episode execution, replication
// and the candidate-pool convergence study.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "semalloc/config.hpp"
#include "semalloc/receiver.hpp"
#include "semalloc/strategies.hpp"

namespace semalloc {

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Per-episode seed: mix64(master ^ mix64(index + 0x9E3779B97F4A7C15)).
/// Depends only on (master, index), never on execution order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

struct World {
  std::vector<Hypothesis> hypotheses;
  std::size_t truth = 0;
  EvidenceCounts evidence;          // transmitter counts over K types
  std::vector<std::size_t> draws;   // observation sequence (type ids)
};

/// K_hypo Dirichlet(concentration) hypotheses (optionally on a random
/// support of `hypothesis_support` types), a uniform truth, and N_obs
/// categorical draws from the truth.
World generate_world(const ExperimentConfig& config, Rng& rng);

struct RoundMetrics {
  std::uint64_t sim_id = 0;
  Strategy strategy = Strategy::kRandomFree;
  Count round = 0;
  double cosine_distance = 0.0;         // width posteriors
  double cosine_distance_counts = 0.0;  // type-count vectors
  double kl_divergence = 0.0;           // KL(p_t || p_r), may be +inf
  int map_correct = 0;
  Count cumulative_sent = 0;
  Count f_r = 0;
};

struct EpisodeResult {
  std::vector<RoundMetrics> rows;
  bool truncated = false;  // strategy ran out of capacity before round T
  std::vector<std::vector<Count>> messages;  // K-length, per round
};

/// Runs one strategy for T rounds against a fixed world. The transmitter
/// posterior is computed once; the receiver refreshes after each message.
EpisodeResult run_episode(const ExperimentConfig& config, const World& world, Strategy strategy,
                          Rng& rng, std::uint64_t sim_id = 0);

struct SeriesStat {
  double mean = 0.0;
  double stderr_ = 0.0;
  Count n = 0;
};

struct AggregateRow {
  Strategy strategy = Strategy::kRandomFree;
  Count round = 0;
  SeriesStat cosine, cosine_counts, kl, accuracy, f_r;
  Count kl_infinite = 0;  // rows excluded from the KL mean
};

struct ExperimentResult {
  std::vector<RoundMetrics> rows;  // strategy-major, then sim, then round
  std::vector<AggregateRow> aggregate;
  Count truncated_episodes = 0;
};

/// N_sim worlds from derived seeds; every configured strategy runs on each
/// world. Episodes run in parallel; output is independent of thread count.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Mean and standard error of the mean (sample sd / sqrt(n)); 0 for n < 2.
SeriesStat series_stat(const std::vector<double>& xs);

/// Mean and standard error per (strategy, round), finite KL only.
std::vector<AggregateRow> aggregate(const std::vector<RoundMetrics>& rows,
                                    const std::vector<Strategy>& order);

// ---- CSV --------------------------------------------------------------------

inline constexpr const char* kCsvHeader =
    "sim_id,strategy,round,cosine_distance,cosine_distance_counts,kl_divergence,map_correct,"
    "cumulative_sent,f_r";

/// Reals in fixed 9-significant-digit scientific notation.
std::string format_real(double v);
void write_csv(std::ostream& out, const std::vector<RoundMetrics>& rows);
std::vector<RoundMetrics> read_csv(std::istream& in);

// ---- convergence ------------------------------------------------------------

struct ConvergencePoint {
  Count rounds = 0;                 // T'
  double greedy_deviation = 0.0;    // mean over worlds of max_j |N_j - WF_j|
  double subset_deviation = 0.0;
  Count exact_subsets = 0;          // worlds where subset search was exhaustive
};

struct ConvergenceReport {
  std::vector<ConvergencePoint> points;
  double greedy_slope = 0.0;  // least-squares slope of log deviation vs log T'
};

/// Candidate pool of the evidence chunks plus `variants` singleton-perturbed
/// copies of each chunk (one unit moved between two observed types).
CandidatePool perturbed_chunk_pool(const World& world, const TransmitterState& state, Count budget,
                                   Count variants, Rng& rng);

enum class PoolSpec {
  kPerturbedChunks,  // evidence chunks plus singleton-perturbed variants
  kIdealSteps,       // WF^(t) - WF^(t-1) for t = 1..max(grid)
};

/// For each T' in the grid and each of N_sim worlds: greedy per-round
/// selection tracked against WF^(t), subset selection against WF^(T').
ConvergenceReport convergence_study(const ExperimentConfig& config, const std::vector<Count>& grid,
                                    PoolSpec pool_spec = PoolSpec::kPerturbedChunks);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace semalloc
