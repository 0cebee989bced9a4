// semalloc: run experiments, sweeps, oracle checks and convergence studies.
//
// Exit codes: 0 success, 1 runtime failure (including failed checks),
// 2 usage or configuration error.

#include <omp.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "semalloc/allocation.hpp"
#include "semalloc/config.hpp"
#include "semalloc/harness.hpp"

namespace fs = std::filesystem;
using namespace semalloc;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;

// Input problems detected before any work starts.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string strategies;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "config file (key = value per line)");
  cmd->add_option("--override", c.overrides, "KEY=VALUE, applied after the config file")
      ->take_all()
      ->allow_extra_args(false);
  cmd->add_option("--strategies", c.strategies, "comma-separated strategy list, or 'all'");
}

ExperimentConfig load_config(const Common& c) {
  ExperimentConfig cfg = c.config_path.empty() ? ExperimentConfig{}
                                               : ExperimentConfig::load(c.config_path);
  for (const std::string& kv : c.overrides) {
    const auto [key, value] = split_override(kv);
    try {
      cfg.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("--override ") + kv + ": " + e.what());
    }
  }
  if (!c.strategies.empty()) cfg.strategy = parse_strategy_list(c.strategies);
  cfg.validate();
  return cfg;
}

void write_file(const std::string& path, const std::string& text) {
  if (const fs::path parent = fs::path(path).parent_path(); !parent.empty())
    fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out.flush()) throw std::runtime_error("write to '" + path + "' failed");
}

std::string csv_text(const std::vector<RoundMetrics>& rows) {
  std::ostringstream os;
  write_csv(os, rows);
  return os.str();
}

void print_summary(std::ostream& os, const ExperimentConfig& cfg, const ExperimentResult& r) {
  char line[256];
  std::snprintf(line, sizeof line, "%-13s %5s %22s %22s %10s %8s\n", "strategy", "round",
                "cosine (mean+-se)", "kl (mean+-se)", "accuracy", "f_r");
  os << line;
  for (const AggregateRow& a : r.aggregate) {
    if (a.round != cfg.T) continue;
    std::snprintf(line, sizeof line, "%-13s %5ld %12.6f+-%-8.6f %12.4f+-%-8.4f %10.3f %8.1f\n",
                  std::string(to_string(a.strategy)).c_str(), static_cast<long>(a.round),
                  a.cosine.mean, a.cosine.stderr_, a.kl.mean, a.kl.stderr_, a.accuracy.mean,
                  a.f_r.mean);
    os << line;
  }
  if (r.truncated_episodes > 0)
    os << r.truncated_episodes << " episode(s) ran out of evidence before round " << cfg.T << "\n";
}

// ---- run --------------------------------------------------------------------

int cmd_run(const Common& common, const std::string& out) {
  const ExperimentConfig cfg = load_config(common);
  const ExperimentResult r = run_experiment(cfg);
  write_file(out, csv_text(r.rows));
  print_summary(std::cout, cfg, r);
  return kOk;
}

// ---- sweep ------------------------------------------------------------------

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) throw UsageError("empty entry in value list '" + s + "'");
    out.push_back(item);
  }
  return out;
}

int cmd_sweep(const Common& common, const std::string& axis, const std::string& values,
              const std::string& out_dir) {
  static const char* axes[] = {"B", "N_obs", "lambda", "dirichlet_concentration"};
  if (std::find(std::begin(axes), std::end(axes), axis) == std::end(axes))
    throw UsageError("sweep axis must be one of B, N_obs, lambda, dirichlet_concentration");
  const std::vector<std::string> points = split_list(values);
  if (points.empty()) throw UsageError("sweep needs at least one value");

  std::vector<ExperimentConfig> configs;
  for (const std::string& v : points) {
    Common c = common;
    c.overrides.push_back(axis + "=" + v);
    configs.push_back(load_config(c));
  }

  std::ostringstream summary;
  summary << "axis,value,strategy,round,cosine_mean,cosine_stderr,kl_mean,kl_stderr,kl_infinite,"
             "accuracy_mean,accuracy_stderr,f_r_mean,csv\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const ExperimentResult r = run_experiment(configs[i]);
    const std::string name = "sweep_" + axis + "_" + points[i] + ".csv";
    write_file((fs::path(out_dir) / name).string(), csv_text(r.rows));
    for (const AggregateRow& a : r.aggregate) {
      if (a.round != configs[i].T) continue;
      summary << axis << ',' << points[i] << ',' << to_string(a.strategy) << ',' << a.round << ','
              << format_real(a.cosine.mean) << ',' << format_real(a.cosine.stderr_) << ','
              << format_real(a.kl.mean) << ',' << format_real(a.kl.stderr_) << ','
              << a.kl_infinite << ',' << format_real(a.accuracy.mean) << ','
              << format_real(a.accuracy.stderr_) << ',' << format_real(a.f_r.mean) << ',' << name
              << '\n';
    }
    std::cout << axis << " = " << points[i] << "\n";
    print_summary(std::cout, configs[i], r);
  }
  write_file((fs::path(out_dir) / "summary.csv").string(), summary.str());
  return kOk;
}

// ---- oracle-check -----------------------------------------------------------

struct OracleOptions {
  Count max_f = 4, max_B = 8, max_cap = 6, instances = 100, K = 20;
  std::uint64_t seed = 20240601;
  std::string list_path;
};

int cmd_oracle_check(const OracleOptions& o) {
  if (o.instances <= 0) throw UsageError("--instances must be positive");
  if (o.max_f <= 0 || o.max_B <= 0 || o.max_cap <= 0)
    throw UsageError("--max-f, --max-b and --max-cap must be positive");
  if (o.K < o.max_f) throw UsageError("--K must be at least --max-f");
  const CapacityVector widest{std::vector<Count>(static_cast<std::size_t>(o.max_f), o.max_cap)};
  // The allocation count is symmetric and unimodal in B, peaking at total / 2.
  const std::uint64_t worst =
      count_feasible_allocations(widest, std::min(o.max_B, widest.total() / 2 + widest.total() % 2));
  if (worst > kMaxEnumeration)
    throw UsageError("bounds allow " + std::to_string(worst) +
                     " allocations per instance, above the enumeration guard of " +
                     std::to_string(kMaxEnumeration));

  struct Instance {
    std::vector<Count> caps;
    Count budget;
  };
  std::mt19937_64 rng(o.seed);
  std::vector<Instance> list;
  for (Count i = 0; i < o.instances; ++i) {
    const Count f = std::uniform_int_distribution<Count>(1, o.max_f)(rng);
    Instance in;
    Count total = 0;
    for (Count j = 0; j < f; ++j)
      total += in.caps.emplace_back(std::uniform_int_distribution<Count>(1, o.max_cap)(rng));
    in.budget = std::uniform_int_distribution<Count>(1, std::min(o.max_B, total))(rng);
    list.push_back(std::move(in));
  }

  const InductiveParams params;
  Count dominance_fail = 0, rounding_fail = 0;
  double worst_margin = 0.0;
  std::ostringstream listing;
  listing << "index,caps,budget,continuous_objective,best_integer_objective,linf,l1\n";
  for (std::size_t i = 0; i < list.size(); ++i) {
    const CapacityVector caps{list[i].caps};
    const Count B = list[i].budget;
    const WidthPosterior p_t = exact_posterior(EvidenceCounts(o.K, caps.caps), params);
    const ContinuousAllocation cont = truncated_water_fill(caps, B);
    const double cont_obj = alignment_objective(cont.values, p_t, params, o.K);
    const BruteForceResult best = brute_force_best(caps, B, p_t, params, o.K);
    const double margin = best.objective - cont_obj;
    worst_margin = std::max(worst_margin, margin);
    if (margin > 1e-9) ++dominance_fail;

    const Allocation rounded = round_allocation(cont, caps, B);
    const RoundingError e = rounding_error_report(rounded, cont);
    if (!rounded.feasible(caps, B) || e.linf > 1.0 || e.l1 > static_cast<double>(caps.size()))
      ++rounding_fail;

    listing << i << ",";
    for (std::size_t j = 0; j < caps.size(); ++j) listing << (j ? " " : "") << caps.caps[j];
    listing << ',' << B << ',' << format_real(cont_obj) << ',' << format_real(best.objective) << ','
            << format_real(e.linf) << ',' << format_real(e.l1) << '\n';
  }
  if (!o.list_path.empty()) write_file(o.list_path, listing.str());

  std::cout << "instances: " << list.size() << " (K = " << o.K << ", seed = " << o.seed << ")\n"
            << "continuous dominance: " << list.size() - dominance_fail << " pass, " << dominance_fail
            << " fail (worst margin " << format_real(worst_margin) << ")\n"
            << "rounding bounds:      " << list.size() - rounding_fail << " pass, " << rounding_fail
            << " fail\n";
  return dominance_fail == 0 && rounding_fail == 0 ? kOk : kRuntime;
}

// ---- convergence ------------------------------------------------------------

int cmd_convergence(const Common& common, const std::string& grid_text, const std::string& pool,
                    const std::string& out) {
  std::vector<Count> grid;
  for (const std::string& g : split_list(grid_text)) {
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(g.c_str(), &end, 10);
    if (errno != 0 || *end != '\0' || v <= 0) throw UsageError("bad grid entry '" + g + "'");
    grid.push_back(v);
  }
  if (grid.empty()) throw UsageError("--grid needs at least one entry");
  PoolSpec spec;
  if (pool == "chunks") spec = PoolSpec::kPerturbedChunks;
  else if (pool == "ideal") spec = PoolSpec::kIdealSteps;
  else throw UsageError("--pool must be 'chunks' or 'ideal'");

  const ExperimentConfig cfg = load_config(common);
  const ConvergenceReport r = convergence_study(cfg, grid, spec);
  std::ostringstream table;
  table << "rounds,greedy_deviation,subset_deviation,exact_subsets\n";
  for (const ConvergencePoint& p : r.points)
    table << p.rounds << ',' << format_real(p.greedy_deviation) << ','
          << format_real(p.subset_deviation) << ',' << p.exact_subsets << '\n';
  if (!out.empty()) write_file(out, table.str());
  std::cout << table.str() << "greedy log-log slope: " << format_real(r.greedy_slope) << "\n";
  return kOk;
}

// ---- plot-data --------------------------------------------------------------

int cmd_plot_data(const std::string& in_path, const std::string& series, const std::string& out) {
  static const char* metrics[] = {"cosine_distance", "cosine_distance_counts", "kl_divergence",
                                  "map_correct", "cumulative_sent", "f_r"};
  if (std::find(std::begin(metrics), std::end(metrics), series) == std::end(metrics))
    throw UsageError("unknown series '" + series + "'");
  std::ifstream in(in_path);
  if (!in) throw UsageError("cannot read '" + in_path + "'");
  std::vector<RoundMetrics> rows;
  try {
    rows = read_csv(in);
  } catch (const std::runtime_error& e) {
    throw UsageError(e.what());
  }

  auto value = [&](const RoundMetrics& r) -> double {
    if (series == "cosine_distance") return r.cosine_distance;
    if (series == "cosine_distance_counts") return r.cosine_distance_counts;
    if (series == "kl_divergence") return r.kl_divergence;
    if (series == "map_correct") return r.map_correct;
    if (series == "cumulative_sent") return static_cast<double>(r.cumulative_sent);
    return static_cast<double>(r.f_r);
  };
  std::vector<Strategy> order;
  std::map<std::pair<int, Count>, std::vector<double>> groups;
  std::map<std::pair<int, Count>, Count> dropped;
  for (const RoundMetrics& r : rows) {
    if (std::find(order.begin(), order.end(), r.strategy) == order.end()) order.push_back(r.strategy);
    const auto key = std::make_pair(static_cast<int>(r.strategy), r.round);
    const double v = value(r);
    if (std::isfinite(v)) groups[key].push_back(v);
    else ++dropped[key];
  }

  std::ostringstream table;
  table << "# series " << series << "\n# strategy round mean stderr n non_finite\n";
  for (Strategy s : order)
    for (const auto& [key, xs] : groups) {
      if (key.first != static_cast<int>(s)) continue;
      const SeriesStat st = series_stat(xs);
      table << to_string(s) << ' ' << key.second << ' ' << format_real(st.mean) << ' '
            << format_real(st.stderr_) << ' ' << st.n << ' ' << dropped[key] << '\n';
    }
  if (out.empty()) std::cout << table.str();
  else write_file(out, table.str());
  return kOk;
}

void apply_thread_limit() {
  const char* env = std::getenv("SEMALLOC_THREADS");
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  errno = 0;
  const long n = std::strtol(env, &end, 10);
  if (errno != 0 || *end != '\0' || n <= 0)
    throw UsageError(std::string("SEMALLOC_THREADS must be a positive integer, got '") + env + "'");
  omp_set_num_threads(static_cast<int>(n));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic evidence allocation experiments"};
  app.require_subcommand(1);

  Common common;
  std::string out;

  auto* run = app.add_subcommand("run", "run every configured strategy and write the per-round CSV");
  add_common(run, common);
  run->add_option("--out", out, "CSV output path")->required();

  std::string axis, values;
  auto* sweep = app.add_subcommand("sweep", "repeat run over one axis; one CSV per point + summary.csv");
  add_common(sweep, common);
  sweep->add_option("--axis", axis, "B, N_obs, lambda or dirichlet_concentration")->required();
  sweep->add_option("--values", values, "comma-separated values")->required();
  sweep->add_option("--out", out, "output directory")->required();

  OracleOptions oracle;
  auto* check = app.add_subcommand("oracle-check", "brute-force allocation checks on random instances");
  check->add_option("--max-f", oracle.max_f, "largest number of types");
  check->add_option("--max-b", oracle.max_B, "largest budget");
  check->add_option("--max-cap", oracle.max_cap, "largest per-type capacity");
  check->add_option("--instances", oracle.instances, "number of random instances");
  check->add_option("--K", oracle.K, "type-space size for the posteriors");
  check->add_option("--seed", oracle.seed, "instance generator seed");
  check->add_option("--out", oracle.list_path, "optional per-instance CSV");

  std::string grid = "5,10,20,40", pool = "chunks";
  auto* conv = app.add_subcommand("convergence", "greedy and subset selection deviation vs rounds");
  add_common(conv, common);
  conv->add_option("--grid", grid, "comma-separated T' values");
  conv->add_option("--pool", pool, "candidate pool: chunks or ideal");
  conv->add_option("--out", out, "optional CSV table path");

  std::string input, series = "cosine_distance";
  auto* plot = app.add_subcommand("plot-data", "per-round mean and stderr per strategy from a run CSV");
  plot->add_option("--in", input, "run CSV")->required();
  plot->add_option("--series", series, "column to aggregate");
  plot->add_option("--out", out, "table path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    apply_thread_limit();
    if (*run) return cmd_run(common, out);
    if (*sweep) return cmd_sweep(common, axis, values, out);
    if (*check) return cmd_oracle_check(oracle);
    if (*conv) return cmd_convergence(common, grid, pool, out);
    if (*plot) return cmd_plot_data(input, series, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
