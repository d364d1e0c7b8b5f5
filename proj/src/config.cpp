#include "p3o/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace p3o {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::pair<std::string, std::string>> tokenize(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
    pairs.emplace_back(key, val);
  }
  return pairs;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
}

long parse_long(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const long x = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw ConfigError("key '" + key + "': expected true/false, got '" + v + "'");
}

std::vector<int> parse_hidden(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::istringstream in(v);
  std::string tok;
  while (std::getline(in, tok, ',')) out.push_back(static_cast<int>(parse_long(key, trim(tok))));
  if (out.empty()) throw ConfigError("key '" + key + "': empty size list");
  return out;
}

void apply(TrainConfig& cfg, const std::string& key, const std::string& v) {
  if (key == "env") cfg.env = v;
  else if (key == "total_steps") cfg.total_steps = parse_long(key, v);
  else if (key == "horizon") cfg.horizon = static_cast<int>(parse_long(key, v));
  else if (key == "n_actors") cfg.n_actors = static_cast<int>(parse_long(key, v));
  else if (key == "epochs") cfg.epochs = static_cast<int>(parse_long(key, v));
  else if (key == "minibatch") cfg.minibatch = static_cast<int>(parse_long(key, v));
  else if (key == "lr_policy") cfg.lr_policy = parse_double(key, v);
  else if (key == "lr_value") cfg.lr_value = parse_double(key, v);
  else if (key == "lr_schedule") {
    if (v == "fixed") cfg.schedule = Schedule::fixed;
    else if (v == "linear_decay") cfg.schedule = Schedule::linear_decay;
    else throw ConfigError("key 'lr_schedule': expected fixed|linear_decay, got '" + v + "'");
  } else if (key == "variant") cfg.objective.variant = variant_from_string(v);
  else if (key == "tau") cfg.objective.tau = parse_double(key, v);
  else if (key == "epsilon") cfg.objective.epsilon = parse_double(key, v);
  else if (key == "beta_kl") cfg.objective.beta_kl = parse_double(key, v);
  else if (key == "beta_s") cfg.objective.beta_s = parse_double(key, v);
  else if (key == "entropy_coef") cfg.objective.entropy_coef = parse_double(key, v);
  else if (key == "vf_coef") cfg.objective.vf_coef = parse_double(key, v);
  else if (key == "gamma") cfg.gamma = parse_double(key, v);
  else if (key == "gamma_v") cfg.gamma_v = parse_double(key, v);
  else if (key == "lambda_gae") cfg.lambda_gae = parse_double(key, v);
  else if (key == "estimator") {
    if (v == "gae") cfg.estimator = Estimator::gae;
    else if (v == "nstep") cfg.estimator = Estimator::nstep;
    else throw ConfigError("key 'estimator': expected gae|nstep, got '" + v + "'");
  } else if (key == "normalize_adv") cfg.normalize_adv = parse_bool(key, v);
  else if (key == "seed") cfg.seed = static_cast<uint64_t>(parse_long(key, v));
  else if (key == "eval_every") cfg.eval_every = static_cast<int>(parse_long(key, v));
  else if (key == "eval_episodes") cfg.eval_episodes = static_cast<int>(parse_long(key, v));
  else if (key == "deon_scope") {
    if (v == "final_epoch") cfg.deon_scope = DeonScope::final_epoch;
    else if (v == "all_epochs") cfg.deon_scope = DeonScope::all_epochs;
    else throw ConfigError("key 'deon_scope': expected final_epoch|all_epochs, got '" + v + "'");
  } else if (key == "hidden") cfg.hidden = parse_hidden(key, v);
  else throw ConfigError("unknown key '" + key + "'");
}

}  // namespace

TrainConfig parse_config(const std::string& text) {
  const auto pairs = tokenize(text);
  std::string env = "pole";
  for (const auto& [k, v] : pairs)
    if (k == "env") env = v;
  TrainConfig cfg = default_config(env);
  for (const auto& [k, v] : pairs) apply(cfg, k, v);
  return cfg;
}

TrainConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const TrainConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "env = " << cfg.env << "\n";
  os << "total_steps = " << cfg.total_steps << "\n";
  os << "horizon = " << cfg.horizon << "\n";
  os << "n_actors = " << cfg.n_actors << "\n";
  os << "epochs = " << cfg.epochs << "\n";
  os << "minibatch = " << cfg.minibatch << "\n";
  os << "lr_policy = " << cfg.lr_policy << "\n";
  os << "lr_value = " << cfg.lr_value << "\n";
  os << "lr_schedule = " << (cfg.schedule == Schedule::fixed ? "fixed" : "linear_decay") << "\n";
  os << "variant = " << variant_name(cfg.objective.variant) << "\n";
  os << "tau = " << cfg.objective.tau << "\n";
  os << "epsilon = " << cfg.objective.epsilon << "\n";
  os << "beta_kl = " << cfg.objective.beta_kl << "\n";
  os << "beta_s = " << cfg.objective.beta_s << "\n";
  os << "entropy_coef = " << cfg.objective.entropy_coef << "\n";
  os << "vf_coef = " << cfg.objective.vf_coef << "\n";
  os << "gamma = " << cfg.gamma << "\n";
  os << "gamma_v = " << cfg.gamma_v << "\n";
  os << "lambda_gae = " << cfg.lambda_gae << "\n";
  os << "estimator = " << (cfg.estimator == Estimator::gae ? "gae" : "nstep") << "\n";
  os << "normalize_adv = " << (cfg.normalize_adv ? "true" : "false") << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "eval_every = " << cfg.eval_every << "\n";
  os << "eval_episodes = " << cfg.eval_episodes << "\n";
  os << "deon_scope = "
     << (cfg.deon_scope == DeonScope::final_epoch ? "final_epoch" : "all_epochs") << "\n";
  os << "hidden = ";
  for (size_t i = 0; i < cfg.hidden.size(); ++i) os << (i ? "," : "") << cfg.hidden[i];
  os << "\n";
  return os.str();
}

}  // namespace p3o
