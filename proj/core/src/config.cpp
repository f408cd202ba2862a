#include "levytree/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace levytree {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(trim(s.substr(start)));
      return out;
    }
    out.push_back(trim(s.substr(start, pos - start)));
    start = pos + 1;
  }
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
  throw std::invalid_argument("config: key '" + key + "' expects " + expected +
                              ", got '" + value + "'");
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double x = std::stod(value, &used);
    if (used != value.size() || std::isnan(x)) bad_value(key, value, "a number");
    return x;
  } catch (const std::invalid_argument&) {
    bad_value(key, value, "a number");
  } catch (const std::out_of_range&) {
    bad_value(key, value, "a representable number");
  }
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  std::int64_t x = 0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), x);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    bad_value(key, value, "an integer");
  }
  return x;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t x = 0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), x);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    bad_value(key, value, "an unsigned integer");
  }
  return x;
}

std::vector<double> parse_double_list(const std::string& key,
                                      const std::string& value) {
  std::vector<double> out;
  for (const std::string& item : split(value, ',')) {
    if (item.empty()) bad_value(key, value, "a comma-separated number list");
    out.push_back(parse_double(key, item));
  }
  return out;
}

std::vector<std::int64_t> parse_int_list(const std::string& key,
                                         const std::string& value) {
  std::vector<std::int64_t> out;
  for (const std::string& item : split(value, ',')) {
    if (item.empty()) bad_value(key, value, "a comma-separated integer list");
    out.push_back(parse_int(key, item));
  }
  return out;
}

std::vector<LevyAtom> parse_atoms(const std::string& key,
                                  const std::string& value) {
  std::vector<LevyAtom> out;
  for (const std::string& item : split(value, ',')) {
    const std::size_t colon = item.find(':');
    if (colon == std::string::npos) {
      bad_value(key, value, "'r:mass' pairs separated by commas");
    }
    out.push_back(LevyAtom{parse_double(key, trim(item.substr(0, colon))),
                           parse_double(key, trim(item.substr(colon + 1)))});
  }
  return out;
}

BranchingMechanism mechanism_from_keys(
    const std::map<std::string, std::string>& kv) {
  double alpha = 0.0;
  double beta = 0.5;
  std::string levy = "none";
  if (const auto it = kv.find("mechanism.alpha"); it != kv.end()) {
    alpha = parse_double(it->first, it->second);
  }
  const bool beta_given = kv.count("mechanism.beta") > 0;
  if (beta_given) beta = parse_double("mechanism.beta", kv.at("mechanism.beta"));
  if (const auto it = kv.find("mechanism.levy"); it != kv.end()) {
    levy = it->second;
  }

  if (levy == "none") {
    return BranchingMechanism::quadratic(beta, alpha);
  }
  if (levy == "stable") {
    const auto c0_it = kv.find("mechanism.c0");
    const auto g_it = kv.find("mechanism.gamma");
    if (c0_it == kv.end() || g_it == kv.end()) {
      throw std::invalid_argument(
          "config: mechanism.levy = stable needs mechanism.c0 and "
          "mechanism.gamma");
    }
    return BranchingMechanism::stable(parse_double(c0_it->first, c0_it->second),
                                      parse_double(g_it->first, g_it->second),
                                      alpha, beta_given ? beta : 0.0);
  }
  if (levy == "atoms") {
    const auto a_it = kv.find("mechanism.atoms");
    if (a_it == kv.end()) {
      throw std::invalid_argument(
          "config: mechanism.levy = atoms needs mechanism.atoms");
    }
    return BranchingMechanism::with_atoms(
        parse_atoms(a_it->first, a_it->second), alpha,
        beta_given ? beta : 0.0);
  }
  bad_value("mechanism.levy", levy, "one of none, stable, atoms");
}

OffspringLaw offspring_from_keys(const std::map<std::string, std::string>& kv) {
  std::string name = "poisson";
  if (const auto it = kv.find("offspring"); it != kv.end()) name = it->second;
  if (name == "poisson") return OffspringLaw::poisson();
  if (name == "geometric") return OffspringLaw::geometric();
  if (name == "stable_tail") {
    const auto g_it = kv.find("offspring.gamma");
    if (g_it == kv.end()) {
      throw std::invalid_argument(
          "config: offspring = stable_tail needs offspring.gamma");
    }
    std::int64_t n_max = 1000000;
    if (const auto it = kv.find("offspring.n_max"); it != kv.end()) {
      n_max = parse_int(it->first, it->second);
    }
    return OffspringLaw::stable_tail(parse_double(g_it->first, g_it->second),
                                     n_max);
  }
  bad_value("offspring", name, "one of poisson, geometric, stable_tail");
}

const char* const kKnownKeys[] = {
    "kind",           "n",
    "replicas",       "beta",
    "thresholds",     "orders",
    "master_seed",    "out",
    "edge_scale",     "node_mass_scale",
    "pilot_reps",     "threads",
    "tree_json",      "offspring",
    "offspring.gamma", "offspring.n_max",
    "mechanism.alpha", "mechanism.beta",
    "mechanism.levy",  "mechanism.c0",
    "mechanism.gamma", "mechanism.atoms",
};

}  // namespace

std::string kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::gen: return "gen";
    case ExperimentKind::mark: return "mark";
    case ExperimentKind::cuts: return "cuts";
    case ExperimentKind::theorem31: return "theorem31";
    case ExperimentKind::corollary32: return "corollary32";
    case ExperimentKind::rayleigh: return "rayleigh";
    case ExperimentKind::zmoments: return "zmoments";
    case ExperimentKind::calibrate: return "calibrate";
  }
  throw std::logic_error("kind_name: bad enum value");
}

ExperimentKind kind_from_name(const std::string& name) {
  for (const ExperimentKind k :
       {ExperimentKind::gen, ExperimentKind::mark, ExperimentKind::cuts,
        ExperimentKind::theorem31, ExperimentKind::corollary32,
        ExperimentKind::rayleigh, ExperimentKind::zmoments,
        ExperimentKind::calibrate}) {
    if (kind_name(k) == name) return k;
  }
  throw std::invalid_argument("config: unknown experiment kind '" + name +
                              "'");
}

ExperimentConfig ExperimentConfig::from_string(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  " is not 'key = value'");
    }
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) {
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  " has an empty key");
    }
    kv[key] = trim(t.substr(eq + 1));
  }

  for (const auto& [key, value] : kv) {
    if (std::find_if(std::begin(kKnownKeys), std::end(kKnownKeys),
                     [&key](const char* k) { return key == k; }) ==
        std::end(kKnownKeys)) {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }

  ExperimentConfig cfg;
  cfg.mechanism = mechanism_from_keys(kv);
  cfg.offspring = offspring_from_keys(kv);
  if (const auto it = kv.find("kind"); it != kv.end()) {
    cfg.kind = kind_from_name(it->second);
  }
  if (const auto it = kv.find("n"); it != kv.end()) {
    const std::int64_t n = parse_int(it->first, it->second);
    if (n < 1 || n > 1000000000) bad_value("n", it->second, "1 <= n <= 1e9");
    cfg.n = VertexId(n);
  }
  if (const auto it = kv.find("replicas"); it != kv.end()) {
    cfg.replicas = parse_int(it->first, it->second);
  }
  if (const auto it = kv.find("beta"); it != kv.end()) {
    cfg.beta = parse_double(it->first, it->second);
  } else {
    cfg.beta = cfg.mechanism.beta();
  }
  if (const auto it = kv.find("thresholds"); it != kv.end()) {
    cfg.thresholds = parse_double_list(it->first, it->second);
  }
  if (const auto it = kv.find("orders"); it != kv.end()) {
    cfg.orders = parse_int_list(it->first, it->second);
  }
  if (const auto it = kv.find("master_seed"); it != kv.end()) {
    cfg.master_seed = parse_u64(it->first, it->second);
  }
  if (const auto it = kv.find("out"); it != kv.end()) {
    cfg.out_dir = it->second;
  }
  if (const auto it = kv.find("edge_scale"); it != kv.end()) {
    cfg.edge_scale = parse_double(it->first, it->second);
  }
  if (const auto it = kv.find("node_mass_scale"); it != kv.end()) {
    cfg.node_mass_scale = parse_double(it->first, it->second);
  }
  if (const auto it = kv.find("pilot_reps"); it != kv.end()) {
    cfg.pilot_reps = parse_int(it->first, it->second);
  }
  if (const auto it = kv.find("threads"); it != kv.end()) {
    const std::int64_t t = parse_int(it->first, it->second);
    if (t < 0 || t > 4096) bad_value("threads", it->second, "0 <= threads <= 4096");
    cfg.threads = int(t);
  }
  if (const auto it = kv.find("tree_json"); it != kv.end()) {
    cfg.tree_json = it->second;
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str());
}

void ExperimentConfig::validate() const {
  if (replicas < 1) {
    throw std::invalid_argument("config: replicas must be >= 1");
  }
  if (replicas > 100000000) {
    throw std::invalid_argument("config: replicas must be <= 1e8");
  }
  if ((kind == ExperimentKind::corollary32 ||
       kind == ExperimentKind::rayleigh) &&
      !mechanism.is_brownian()) {
    throw std::invalid_argument("config: kind " + kind_name(kind) +
                                " needs the Brownian mechanism");
  }
  const bool tree_kind =
      kind == ExperimentKind::gen || kind == ExperimentKind::mark ||
      kind == ExperimentKind::cuts || kind == ExperimentKind::theorem31 ||
      kind == ExperimentKind::corollary32 ||
      kind == ExperimentKind::rayleigh || kind == ExperimentKind::calibrate;
  if (tree_kind && n < 2) {
    throw std::invalid_argument("config: n must be >= 2 for kind " +
                                kind_name(kind));
  }
  if (!(beta >= 0.0)) {
    throw std::invalid_argument("config: beta must be >= 0");
  }
  if (thresholds.empty()) {
    throw std::invalid_argument("config: thresholds must be nonempty");
  }
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > 0.0)) {
      throw std::invalid_argument("config: thresholds must be > 0");
    }
    if (i > 0 && !(thresholds[i] < thresholds[i - 1])) {
      throw std::invalid_argument(
          "config: thresholds must be strictly descending");
    }
  }
  if (orders.empty()) {
    throw std::invalid_argument("config: orders must be nonempty");
  }
  for (const std::int64_t k : orders) {
    if (k < 1 || k > 64) {
      throw std::invalid_argument("config: orders must lie in [1, 64]");
    }
  }
  if (out_dir.empty()) {
    throw std::invalid_argument("config: out must be nonempty");
  }
  if (!(edge_scale >= 0.0)) {
    throw std::invalid_argument("config: edge_scale must be >= 0");
  }
  if (!(node_mass_scale >= 0.0)) {
    throw std::invalid_argument("config: node_mass_scale must be >= 0");
  }
  if (pilot_reps < 1) {
    throw std::invalid_argument("config: pilot_reps must be >= 1");
  }
  if (kind == ExperimentKind::zmoments) {
    const bool pure_quadratic = mechanism.levy_kind() == LevyKind::none &&
                                mechanism.alpha() == 0.0 &&
                                mechanism.beta() > 0.0;
    const bool pure_stable = mechanism.levy_kind() == LevyKind::stable &&
                             mechanism.alpha() == 0.0 &&
                             mechanism.beta() == 0.0;
    if (!pure_quadratic && !pure_stable) {
      throw std::invalid_argument(
          "config: zmoments needs a pure quadratic or pure stable mechanism");
    }
  }
  if (kind == ExperimentKind::calibrate && !offspring.finite_variance()) {
    throw std::invalid_argument(
        "config: calibrate needs a finite-variance offspring law");
  }
}

std::string ExperimentConfig::to_json_string() const {
  nlohmann::json off{{"name", offspring.name()}};
  if (offspring.kind() == OffspringLaw::Kind::stable_tail) {
    off["gamma"] = offspring.gamma();
  }
  nlohmann::json j{
      {"kind", kind_name(kind)},
      {"mechanism", nlohmann::json::parse(mechanism_to_config_json(mechanism))},
      {"offspring", off},
      {"n", n},
      {"replicas", replicas},
      {"beta", beta},
      {"thresholds", thresholds},
      {"orders", orders},
      {"master_seed", master_seed},
      {"out", out_dir},
      {"edge_scale", edge_scale},
      {"node_mass_scale", node_mass_scale},
      {"pilot_reps", pilot_reps},
      {"threads", threads},
  };
  if (!tree_json.empty()) j["tree_json"] = tree_json;
  return j.dump();
}

}  // namespace levytree
