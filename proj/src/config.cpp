#include "semalloc/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace semalloc {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_int(std::string_view key, std::string_view v, int line) {
  T out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ConfigError("key '" + std::string(key) + "': expected an integer, got '" +
                          std::string(v) + "'",
                      line);
  return out;
}

double parse_real(std::string_view key, std::string_view v, int line) {
  // from_chars for double is available in libstdc++ 11.
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError("key '" + std::string(key) + "': expected a real number, got '" +
                          std::string(v) + "'",
                      line);
  return out;
}

bool parse_bool(std::string_view key, std::string_view v, int line) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw ConfigError("key '" + std::string(key) + "': expected true/false, got '" + std::string(v) +
                        "'",
                    line);
}

std::string render_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kRandomFree: return "random-free";
    case Strategy::kRandomChunk: return "random-chunk";
    case Strategy::kScld: return "scld";
    case Strategy::kWfGreedy: return "wf-greedy";
    case Strategy::kWfLong: return "wf-long";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  for (Strategy s : kAllStrategies)
    if (to_string(s) == name) return s;
  throw ConfigError("unknown strategy '" + std::string(name) + "'");
}

std::vector<Strategy> parse_strategy_list(std::string_view list) {
  list = trim(list);
  if (list == "all") return {std::begin(kAllStrategies), std::end(kAllStrategies)};
  std::vector<Strategy> out;
  if (list.empty()) throw ConfigError("empty strategy list");
  while (true) {
    const auto comma = list.find(',');
    const std::string_view item = trim(list.substr(0, comma));
    if (item.empty()) throw ConfigError("empty entry in strategy list");
    const Strategy s = parse_strategy(item);
    for (Strategy seen : out)
      if (seen == s) throw ConfigError("duplicate strategy '" + std::string(item) + "'");
    out.push_back(s);
    if (comma == std::string_view::npos) break;
    list = list.substr(comma + 1);
  }
  return out;
}

std::string_view to_string(Norm n) {
  switch (n) {
    case Norm::kL1: return "l1";
    case Norm::kL2: return "l2";
    case Norm::kLinf: return "linf";
  }
  return "?";
}

std::string_view to_string(PosteriorMethod m) {
  return m == PosteriorMethod::kExact ? "exact" : "stirling";
}

InductiveParams ExperimentConfig::inductive() const {
  InductiveParams p;
  p.lambda = lambda;
  p.alpha_mode = alpha_mode;
  p.fixed_alpha = alpha;
  return p;
}

void ExperimentConfig::validate() const {
  auto positive = [](Count v, const char* key) {
    if (v <= 0) throw ConfigError(std::string("key '") + key + "' must be positive");
  };
  positive(K, "K");
  positive(N_obs, "N_obs");
  positive(T, "T");
  positive(B, "B");
  positive(K_hypo, "K_hypo");
  positive(N_sim, "N_sim");
  positive(pool_variants + 1, "pool_variants + 1");
  if (!(lambda > 0.0)) throw ConfigError("key 'lambda' must be > 0");
  if (alpha_mode == AlphaMode::kFixed && !(alpha >= 0.0))
    throw ConfigError("key 'alpha_mode' must be 'derived' or a non-negative number");
  if (!(dirichlet_concentration > 0.0))
    throw ConfigError("key 'dirichlet_concentration' must be > 0");
  if (hypothesis_support < 0 || hypothesis_support > K)
    throw ConfigError("key 'hypothesis_support' must lie in [0, K]");
  if (smoothing < 0.0) throw ConfigError("key 'smoothing' must be >= 0");
  if (strategy.empty()) throw ConfigError("key 'strategy' selects no strategy");
}

void ExperimentConfig::set(std::string_view key, std::string_view value, int line) {
  key = trim(key);
  value = trim(value);
  if (value.empty()) throw ConfigError("key '" + std::string(key) + "' has no value", line);
  try {
    if (key == "K") K = parse_int<Count>(key, value, line);
    else if (key == "N_obs") N_obs = parse_int<Count>(key, value, line);
    else if (key == "T") T = parse_int<Count>(key, value, line);
    else if (key == "B") B = parse_int<Count>(key, value, line);
    else if (key == "lambda") lambda = parse_real(key, value, line);
    else if (key == "alpha_mode") {
      if (value == "derived") {
        alpha_mode = AlphaMode::kFromEvidence;
      } else {
        alpha_mode = AlphaMode::kFixed;
        alpha = parse_real(key, value, line);
      }
    } else if (key == "K_hypo") K_hypo = parse_int<Count>(key, value, line);
    else if (key == "N_sim") N_sim = parse_int<Count>(key, value, line);
    else if (key == "seed") seed = parse_int<std::uint64_t>(key, value, line);
    else if (key == "strategy") strategy = parse_strategy_list(value);
    else if (key == "dirichlet_concentration") dirichlet_concentration = parse_real(key, value, line);
    else if (key == "hypothesis_support") hypothesis_support = parse_int<Count>(key, value, line);
    else if (key == "norm") {
      if (value == "l1") norm = Norm::kL1;
      else if (value == "l2") norm = Norm::kL2;
      else if (value == "linf") norm = Norm::kLinf;
      else throw ConfigError("key 'norm': expected l1, l2 or linf", line);
    } else if (key == "multiplicity") multiplicity = parse_bool(key, value, line);
    else if (key == "posterior") {
      if (value == "exact") posterior = PosteriorMethod::kExact;
      else if (value == "stirling") posterior = PosteriorMethod::kStirling;
      else throw ConfigError("key 'posterior': expected exact or stirling", line);
    } else if (key == "smoothing") smoothing = parse_real(key, value, line);
    else if (key == "pool_variants") pool_variants = parse_int<Count>(key, value, line);
    else throw ConfigError("unknown key '" + std::string(key) + "'", line);
  } catch (const ConfigError& e) {
    if (e.line() == 0 && line > 0) throw ConfigError(e.what(), line);
    throw;
  }
}

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  ExperimentConfig cfg;
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
    cfg.set(line.substr(0, eq), line.substr(eq + 1), line_no);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream os;
  os << "K = " << K << "\n"
     << "N_obs = " << N_obs << "\n"
     << "T = " << T << "\n"
     << "B = " << B << "\n"
     << "lambda = " << render_real(lambda) << "\n"
     << "alpha_mode = " << (alpha_mode == AlphaMode::kFromEvidence ? "derived" : render_real(alpha))
     << "\n"
     << "K_hypo = " << K_hypo << "\n"
     << "N_sim = " << N_sim << "\n"
     << "seed = " << seed << "\n"
     << "strategy = ";
  for (std::size_t i = 0; i < strategy.size(); ++i) os << (i ? "," : "") << to_string(strategy[i]);
  os << "\n"
     << "dirichlet_concentration = " << render_real(dirichlet_concentration) << "\n"
     << "hypothesis_support = " << hypothesis_support << "\n"
     << "norm = " << to_string(norm) << "\n"
     << "multiplicity = " << (multiplicity ? "true" : "false") << "\n"
     << "posterior = " << to_string(posterior) << "\n"
     << "smoothing = " << render_real(smoothing) << "\n"
     << "pool_variants = " << pool_variants << "\n";
  return os.str();
}

std::pair<std::string, std::string> split_override(std::string_view kv) {
  const auto eq = kv.find('=');
  if (eq == std::string_view::npos || trim(kv.substr(0, eq)).empty())
    throw ConfigError("override '" + std::string(kv) + "' is not of the form KEY=VALUE");
  return {std::string(trim(kv.substr(0, eq))), std::string(trim(kv.substr(eq + 1)))};
}

}  // namespace semalloc
