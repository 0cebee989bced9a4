#pragma once

// Experiment configuration and its flat `key = value` text format.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "semalloc/inductive.hpp"
#include "semalloc/receiver.hpp"
#include "semalloc/strategies.hpp"

namespace semalloc {

enum class Strategy { kRandomFree, kRandomChunk, kScld, kWfGreedy, kWfLong };

inline constexpr Strategy kAllStrategies[] = {Strategy::kRandomFree, Strategy::kRandomChunk,
                                              Strategy::kScld, Strategy::kWfGreedy,
                                              Strategy::kWfLong};

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view name);
std::vector<Strategy> parse_strategy_list(std::string_view list);  // "all" or comma separated

std::string_view to_string(Norm n);
std::string_view to_string(PosteriorMethod m);

/// Malformed configuration or override; `line` is 0 for overrides.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Defaults reproduce the reference setup (K = 1000, N_obs = 750, T = 20,
/// B = 5, lambda = 1, K_hypo = 10, N_sim = 50).
struct ExperimentConfig {
  Count K = 1000;
  Count N_obs = 750;
  Count T = 20;
  Count B = 5;
  double lambda = 1.0;
  AlphaMode alpha_mode = AlphaMode::kFromEvidence;
  double alpha = 0.0;  // used when alpha_mode is kFixed
  Count K_hypo = 10;
  Count N_sim = 50;
  std::uint64_t seed = 20240601;
  std::vector<Strategy> strategy{std::begin(kAllStrategies), std::end(kAllStrategies)};
  double dirichlet_concentration = 0.1;
  Count hypothesis_support = 0;  // 0: full support over K types
  Norm norm = Norm::kL2;
  bool multiplicity = true;
  PosteriorMethod posterior = PosteriorMethod::kExact;
  double smoothing = 0.0;
  Count pool_variants = 4;  // singleton-perturbed variants per chunk (convergence study)

  InductiveParams inductive() const;
  void validate() const;

  /// Applies one `key = value` assignment. Throws ConfigError.
  void set(std::string_view key, std::string_view value, int line = 0);

  /// Parses a config document; unspecified keys keep their defaults.
  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::string& path);

  /// Canonical `key = value` rendering of every field.
  std::string to_text() const;
};

/// Splits "KEY=VALUE".
std::pair<std::string, std::string> split_override(std::string_view kv);

}  // namespace semalloc
