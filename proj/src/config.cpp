#include "slicead/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>

#include "slicead/csv.hpp"
#include "slicead/error.hpp"

namespace slicead {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(std::string_view v, std::string_view key) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      if (v[i] == '\\' && i + 2 < v.size()) ++i;
      out += v[i];
    }
    return out;
  }
  if (!v.empty() && v.front() == '"') throw Error(ErrorCode::kConfig, std::string(key) + ": unterminated string");
  return std::string(v);
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

double as_double(std::string_view v, std::string_view key) {
  try {
    return csv::to_double(v, 0);
  } catch (const Error&) {
    throw Error(ErrorCode::kConfig, std::string(key) + ": expected a number, got '" + std::string(v) + "'");
  }
}

std::int64_t as_int(std::string_view v, std::string_view key) {
  try {
    return csv::to_int(v, 0);
  } catch (const Error&) {
    throw Error(ErrorCode::kConfig, std::string(key) + ": expected an integer, got '" + std::string(v) + "'");
  }
}

bool as_bool(std::string_view v, std::string_view key) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw Error(ErrorCode::kConfig, std::string(key) + ": expected true or false");
}

std::string fmt(double v) { return csv::format_double(v); }

}  // namespace

void RunConfig::set(std::string_view key, std::string_view raw) {
  std::string k(key);
  if (k.find('.') == std::string::npos) {
    static const std::map<std::string, std::string, std::less<>> section_of{
        {"rsl", "paths"},           {"capacity", "paths"},    {"acm_table", "paths"}, {"flows", "paths"},
        {"sr", "paths"},            {"catalog", "paths"},     {"forecast", "paths"},  {"calibration", "paths"},
        {"qtable", "paths"},        {"bundle", "paths"},      {"name", "policy"},     {"lambda", "policy"},
        {"epsilon0", "policy"},     {"epsilon_decay", "policy"}, {"epsilon_min", "policy"},
        {"kappa", "policy"},        {"lo_threshold", "policy"}, {"delta", "policy"},  {"horizon", "run"},
        {"lookback", "run"},        {"seed", "run"},          {"output_dir", "run"},  {"normalize", "run"}};
    const auto it = section_of.find(k);
    if (it == section_of.end()) throw Error(ErrorCode::kConfig, k + ": unknown key");
    k = it->second + "." + k;
  }
  const std::string v = unquote(trim(raw), k);
  if (k == "paths.rsl") rsl = v;
  else if (k == "paths.capacity") capacity = v;
  else if (k == "paths.acm_table") acm_table = v;
  else if (k == "paths.flows") flows = v;
  else if (k == "paths.sr") sr = v;
  else if (k == "paths.catalog") catalog = v;
  else if (k == "paths.forecast") forecast = v;
  else if (k == "paths.calibration") calibration = v;
  else if (k == "paths.qtable") qtable = v;
  else if (k == "paths.bundle") bundle = v;
  else if (k == "policy.name") policy = v;
  else if (k == "policy.lambda") lambda = as_double(v, k);
  else if (k == "policy.epsilon0") epsilon0 = as_double(v, k);
  else if (k == "policy.epsilon_decay") epsilon_decay = as_double(v, k);
  else if (k == "policy.epsilon_min") epsilon_min = as_double(v, k);
  else if (k == "policy.kappa") kappa = as_double(v, k);
  else if (k == "policy.lo_threshold") lo_threshold = static_cast<int>(as_int(v, k));
  else if (k == "policy.delta") delta = as_double(v, k);
  else if (k == "run.horizon") horizon = static_cast<int>(as_int(v, k));
  else if (k == "run.lookback") lookback = static_cast<int>(as_int(v, k));
  else if (k == "run.seed") {
    if (v.empty()) {
      seed.reset();
    } else {
      const std::int64_t s = as_int(v, k);
      if (s < 0) throw Error(ErrorCode::kConfig, k + ": must be >= 0");
      seed = static_cast<std::uint64_t>(s);
    }
  } else if (k == "run.output_dir") output_dir = v;
  else if (k == "run.normalize") normalize = as_bool(v, k);
  else throw Error(ErrorCode::kConfig, k + ": unknown key");
}

RunConfig RunConfig::parse(std::string_view text) {
  RunConfig c;
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view l = trim(line);
    if (l.empty() || l.front() == '#') continue;
    if (l.front() == '[') {
      if (l.back() != ']') throw Error(ErrorCode::kConfig, "line " + std::to_string(line_no) + ": bad section");
      section = std::string(trim(l.substr(1, l.size() - 2)));
      if (section != "paths" && section != "policy" && section != "run") {
        throw Error(ErrorCode::kConfig, "line " + std::to_string(line_no) + ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = l.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kConfig, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(l.substr(0, eq)));
    if (section.empty()) throw Error(ErrorCode::kConfig, key + ": key outside a section");
    c.set(section + "." + key, l.substr(eq + 1));
  }
  return c;
}

std::string RunConfig::serialize() const {
  std::string o = "[paths]\n";
  o += "rsl = " + quote(rsl) + "\n";
  o += "capacity = " + quote(capacity) + "\n";
  o += "acm_table = " + quote(acm_table) + "\n";
  o += "flows = " + quote(flows) + "\n";
  o += "sr = " + quote(sr) + "\n";
  o += "catalog = " + quote(catalog) + "\n";
  o += "forecast = " + quote(forecast) + "\n";
  o += "calibration = " + quote(calibration) + "\n";
  o += "qtable = " + quote(qtable) + "\n";
  o += "bundle = " + quote(bundle) + "\n";
  o += "\n[policy]\n";
  o += "name = " + quote(policy) + "\n";
  o += "lambda = " + fmt(lambda) + "\n";
  o += "epsilon0 = " + fmt(epsilon0) + "\n";
  o += "epsilon_decay = " + fmt(epsilon_decay) + "\n";
  o += "epsilon_min = " + fmt(epsilon_min) + "\n";
  o += "kappa = " + fmt(kappa) + "\n";
  o += "lo_threshold = " + std::to_string(lo_threshold) + "\n";
  o += "delta = " + fmt(delta) + "\n";
  o += "\n[run]\n";
  o += "horizon = " + std::to_string(horizon) + "\n";
  o += "lookback = " + std::to_string(lookback) + "\n";
  o += "seed = " + (seed ? std::to_string(*seed) : std::string("\"\"")) + "\n";
  o += "output_dir = " + quote(output_dir) + "\n";
  o += "normalize = " + std::string(normalize ? "true" : "false") + "\n";
  return o;
}

void RunConfig::validate(bool check_files) const {
  if (!is_policy_name(policy)) {
    throw Error(ErrorCode::kConfig, "policy.name: unknown policy '" + policy + "'");
  }
  if (horizon < 1) throw Error(ErrorCode::kConfig, "run.horizon: must be >= 1");
  if (lookback < 1) throw Error(ErrorCode::kConfig, "run.lookback: must be >= 1");
  if (lambda < 0.0) throw Error(ErrorCode::kConfig, "policy.lambda: must be >= 0");
  if (!(delta > 0.0)) throw Error(ErrorCode::kConfig, "policy.delta: must be > 0");
  if (!(kappa > 0.0)) throw Error(ErrorCode::kConfig, "policy.kappa: must be > 0");
  if (epsilon0 < 0.0 || epsilon0 > 1.0) throw Error(ErrorCode::kConfig, "policy.epsilon0: must be in [0, 1]");
  if (epsilon_min < 0.0 || epsilon_min > 1.0) throw Error(ErrorCode::kConfig, "policy.epsilon_min: must be in [0, 1]");
  if (epsilon_decay <= 0.0 || epsilon_decay > 1.0) throw Error(ErrorCode::kConfig, "policy.epsilon_decay: must be in (0, 1]");
  if (lo_threshold < 0 || lo_threshold > 20) throw Error(ErrorCode::kConfig, "policy.lo_threshold: must be in [0, 20]");
  if (bundle.empty() && rsl.empty() && capacity.empty()) {
    throw Error(ErrorCode::kConfig, "paths.rsl: one of rsl, capacity or bundle is required");
  }
  if (!check_files) return;
  const std::pair<const char*, const std::string*> files[] = {
      {"paths.rsl", &rsl},       {"paths.capacity", &capacity}, {"paths.flows", &flows},
      {"paths.sr", &sr},         {"paths.catalog", &catalog},   {"paths.forecast", &forecast},
      {"paths.calibration", &calibration}, {"paths.qtable", &qtable}, {"paths.bundle", &bundle}};
  for (const auto& [name, path] : files) {
    if (!path->empty() && !std::filesystem::exists(*path)) {
      throw Error(ErrorCode::kConfig, std::string(name) + ": file not found '" + *path + "'");
    }
  }
  if (acm_table != "af60" && acm_table != "wave" && !std::filesystem::exists(acm_table)) {
    throw Error(ErrorCode::kConfig, "paths.acm_table: file not found '" + acm_table + "'");
  }
}

QLearningParams RunConfig::q_params() const {
  QLearningParams p;
  p.lambda = lambda;
  p.epsilon0 = epsilon0;
  p.epsilon_decay = epsilon_decay;
  p.epsilon_min = epsilon_min;
  return p;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  if (const char* env = std::getenv("AWARESAC_SEED"); env != nullptr && *env != '\0') {
    try {
      const std::int64_t v = csv::to_int(env, 0);
      if (v >= 0) return static_cast<std::uint64_t>(v);
    } catch (const Error&) {
    }
    throw Error(ErrorCode::kConfig, "AWARESAC_SEED: expected a non-negative integer");
  }
  return 0;
}

}  // namespace slicead
