#ifndef SPAM_CONFIG_HPP
#define SPAM_CONFIG_HPP

// Flat key = value configuration for the CLI, grouped under bracketed
// sections.  Fail-closed: unknown sections or keys are errors.  Full-line
// comments start with '#' or ';'.  Paths are resolved relative to the config
// file's directory.
//
// Sections and keys:
//   [problem]  file, seed, n, d, lambda, hetero_scale
//   [schedule] kind, delta, sigma2, f_est, gamma, p
//   [run]      algorithm, K, B, local_steps, warmup_samples,
//              warmup_stratified, seed, record_lyapunov, lyapunov_constant,
//              prox_client, cohort_sampling, trace
//   [sweep]    p, gamma, local_steps, B, seeds, cap, floor_tail
//
// delta / sigma2 / f_est accept "auto" (computed from the loaded problem) or
// a float.  gamma entries accept a float or the forms "<c>/delta", "<c>/L",
// "<c>/(delta+L)".  local_steps accepts a count or "exact".  List-valued keys
// are comma-separated.

#include "spam/optim.hpp"

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace spam {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

namespace cfgdetail {

inline std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) throw ConfigError("empty entry in list value: '" + s + "'");
    out.push_back(tok);
  }
  if (out.empty()) throw ConfigError("empty list value");
  return out;
}

inline double parse_double(const std::string& key, const std::string& s) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + s + "'");
  }
}

inline long parse_long(const std::string& key, const std::string& s) {
  try {
    size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + s + "'");
  }
}

inline uint64_t parse_u64(const std::string& key, const std::string& s) {
  try {
    size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size() || s[0] == '-') throw std::invalid_argument("trailing");
    return static_cast<uint64_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an unsigned integer, got '" + s + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + s + "'");
}

}  // namespace cfgdetail

// Raw parse result: section -> ordered key/value pairs (duplicates rejected).
struct IniFile {
  std::map<std::string, std::map<std::string, std::string>> sections;
};

inline IniFile parse_ini_text(const std::string& text, const std::string& origin = "<string>") {
  IniFile ini;
  std::stringstream in(text);
  std::string line;
  std::string section;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = cfgdetail::trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) {
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
      }
      section = cfgdetail::trim(t.substr(1, t.size() - 2));
      ini.sections[section];  // empty sections are legal
      continue;
    }
    const size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    if (section.empty()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": key outside any section");
    }
    const std::string key = cfgdetail::trim(t.substr(0, eq));
    const std::string value = cfgdetail::trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    }
    auto& sec = ini.sections[section];
    if (sec.count(key)) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    sec[key] = value;
  }
  return ini;
}

inline IniFile parse_ini_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_ini_text(ss.str(), path);
}

// An "auto or number" field.
struct AutoValue {
  bool is_auto = true;
  double value = 0.0;
  static AutoValue parse(const std::string& key, const std::string& s) {
    AutoValue v;
    if (s == "auto") return v;
    v.is_auto = false;
    v.value = cfgdetail::parse_double(key, s);
    return v;
  }
};

// gamma entries: plain float or "<c>/delta", "<c>/L", "<c>/(delta+L)".
enum class GammaForm { literal, over_delta, over_L, over_delta_plus_L };

struct GammaExpr {
  GammaForm form = GammaForm::literal;
  double coeff = 0.0;
  std::string token;

  static GammaExpr parse(const std::string& key, const std::string& s) {
    GammaExpr e;
    e.token = s;
    const size_t slash = s.find('/');
    if (slash == std::string::npos) {
      e.form = GammaForm::literal;
      e.coeff = cfgdetail::parse_double(key, s);
      return e;
    }
    e.coeff = cfgdetail::parse_double(key, cfgdetail::trim(s.substr(0, slash)));
    const std::string denom = cfgdetail::trim(s.substr(slash + 1));
    if (denom == "delta") {
      e.form = GammaForm::over_delta;
    } else if (denom == "L") {
      e.form = GammaForm::over_L;
    } else if (denom == "(delta+L)" || denom == "(delta + L)") {
      e.form = GammaForm::over_delta_plus_L;
    } else {
      throw ConfigError("key '" + key + "': unknown stepsize denominator '" + denom + "'");
    }
    return e;
  }

  double resolve(double delta, double L) const {
    switch (form) {
      case GammaForm::literal:
        return coeff;
      case GammaForm::over_delta:
        if (!(delta > 0.0)) throw ConfigError("stepsize '" + token + "' needs delta > 0");
        return coeff / delta;
      case GammaForm::over_L:
        if (!(L > 0.0)) throw ConfigError("stepsize '" + token + "' needs L > 0");
        return coeff / L;
      case GammaForm::over_delta_plus_L:
        if (!(delta + L > 0.0)) throw ConfigError("stepsize '" + token + "' needs delta + L > 0");
        return coeff / (delta + L);
    }
    throw ConfigError("unreachable stepsize form");
  }
};

struct ProblemSection {
  std::string file;  // empty = generate in memory from the fields below
  uint64_t seed = 0;
  long n = 10;
  long d = 100;
  double lambda = 0.1;
  double hetero_scale = 1.0;
};

struct ScheduleSection {
  std::string kind = "constant";
  AutoValue delta;   // auto
  AutoValue sigma2;  // auto
  AutoValue f_est;   // auto
  std::vector<GammaExpr> gamma;  // empty = kind default
  std::vector<double> p;         // empty = kind default
};

struct RunSection {
  std::string algorithm = "spam_exact";
  long K = 1000;
  long B = 1;
  long local_steps = -1;  // -1 = exact
  long warmup_samples = 0;
  bool warmup_stratified = false;
  uint64_t seed = 0;
  bool seed_set = false;
  bool record_lyapunov = false;
  std::string lyapunov_constant = "appendix";
  std::string prox_client = "cohort";
  std::string cohort_sampling = "without_replacement";
  std::string trace = "trace.csv";
};

struct SweepSection {
  std::vector<double> p;
  std::vector<GammaExpr> gamma;
  std::vector<long> local_steps;  // -1 = exact
  std::vector<long> B;
  std::vector<uint64_t> seeds;
  long cap = 10000;
  double floor_tail = 0.25;
};

struct CliConfig {
  ProblemSection problem;
  ScheduleSection schedule;
  RunSection run;
  SweepSection sweep;
  bool has_problem = false;
  bool has_schedule = false;
  bool has_run = false;
  bool has_sweep = false;
  std::string config_dir;  // for resolving relative paths
};

namespace cfgdetail {

inline long parse_local_steps(const std::string& key, const std::string& s) {
  if (s == "exact") return -1;
  const long v = parse_long(key, s);
  if (v < 0) throw ConfigError("key '" + key + "': local step count must be >= 0 or 'exact'");
  return v;
}

inline void require_known(const std::string& section, const std::map<std::string, std::string>& kv,
                          const std::set<std::string>& known) {
  for (const auto& [k, v] : kv) {
    (void)v;
    if (!known.count(k)) {
      throw ConfigError("unknown key '" + k + "' in section [" + section + "]");
    }
  }
}

}  // namespace cfgdetail

inline CliConfig interpret_config(const IniFile& ini, const std::string& config_dir) {
  CliConfig cfg;
  cfg.config_dir = config_dir;
  static const std::set<std::string> known_sections = {"problem", "schedule", "run", "sweep"};
  for (const auto& [name, kv] : ini.sections) {
    (void)kv;
    if (!known_sections.count(name)) throw ConfigError("unknown section [" + name + "]");
  }

  if (auto it = ini.sections.find("problem"); it != ini.sections.end()) {
    cfg.has_problem = true;
    const auto& kv = it->second;
    cfgdetail::require_known("problem", kv,
                             {"file", "seed", "n", "d", "lambda", "hetero_scale"});
    if (kv.count("file")) cfg.problem.file = kv.at("file");
    if (kv.count("seed")) cfg.problem.seed = cfgdetail::parse_u64("seed", kv.at("seed"));
    if (kv.count("n")) cfg.problem.n = cfgdetail::parse_long("n", kv.at("n"));
    if (kv.count("d")) cfg.problem.d = cfgdetail::parse_long("d", kv.at("d"));
    if (kv.count("lambda")) cfg.problem.lambda = cfgdetail::parse_double("lambda", kv.at("lambda"));
    if (kv.count("hetero_scale")) {
      cfg.problem.hetero_scale = cfgdetail::parse_double("hetero_scale", kv.at("hetero_scale"));
    }
    if (cfg.problem.n < 1) throw ConfigError("[problem] n must be >= 1");
    if (cfg.problem.d < 1) throw ConfigError("[problem] d must be >= 1");
    if (cfg.problem.lambda < 0.0) throw ConfigError("[problem] lambda must be >= 0");
    if (cfg.problem.hetero_scale < 0.0) throw ConfigError("[problem] hetero_scale must be >= 0");
  }

  if (auto it = ini.sections.find("schedule"); it != ini.sections.end()) {
    cfg.has_schedule = true;
    const auto& kv = it->second;
    cfgdetail::require_known("schedule", kv, {"kind", "delta", "sigma2", "f_est", "gamma", "p"});
    if (kv.count("kind")) cfg.schedule.kind = kv.at("kind");
    static const std::set<std::string> kinds = {"constant", "decaying", "pp_constant",
                                                "pp_decaying", "custom"};
    if (!kinds.count(cfg.schedule.kind)) {
      throw ConfigError("[schedule] unknown kind '" + cfg.schedule.kind + "'");
    }
    if (kv.count("delta")) cfg.schedule.delta = AutoValue::parse("delta", kv.at("delta"));
    if (kv.count("sigma2")) cfg.schedule.sigma2 = AutoValue::parse("sigma2", kv.at("sigma2"));
    if (kv.count("f_est")) cfg.schedule.f_est = AutoValue::parse("f_est", kv.at("f_est"));
    if (kv.count("gamma")) {
      for (const std::string& tok : cfgdetail::split_list(kv.at("gamma"))) {
        cfg.schedule.gamma.push_back(GammaExpr::parse("gamma", tok));
      }
    }
    if (kv.count("p")) {
      for (const std::string& tok : cfgdetail::split_list(kv.at("p"))) {
        cfg.schedule.p.push_back(cfgdetail::parse_double("p", tok));
      }
    }
    if (cfg.schedule.kind == "custom" && (cfg.schedule.gamma.empty() || cfg.schedule.p.empty())) {
      throw ConfigError("[schedule] custom kind requires both gamma and p");
    }
  }

  if (auto it = ini.sections.find("run"); it != ini.sections.end()) {
    cfg.has_run = true;
    const auto& kv = it->second;
    cfgdetail::require_known(
        "run", kv,
        {"algorithm", "K", "B", "local_steps", "warmup_samples", "warmup_stratified", "seed",
         "record_lyapunov", "lyapunov_constant", "prox_client", "cohort_sampling", "trace"});
    if (kv.count("algorithm")) cfg.run.algorithm = kv.at("algorithm");
    static const std::set<std::string> algos = {"spam_exact", "spam_inexact", "spam_pp",
                                                "spam_ppa", "sgd_baseline"};
    if (!algos.count(cfg.run.algorithm)) {
      throw ConfigError("[run] unknown algorithm '" + cfg.run.algorithm + "'");
    }
    if (kv.count("K")) cfg.run.K = cfgdetail::parse_long("K", kv.at("K"));
    if (cfg.run.K < 0) throw ConfigError("[run] K must be >= 0");
    if (kv.count("B")) cfg.run.B = cfgdetail::parse_long("B", kv.at("B"));
    if (cfg.run.B < 1) throw ConfigError("[run] B must be >= 1");
    if (kv.count("local_steps")) {
      cfg.run.local_steps = cfgdetail::parse_local_steps("local_steps", kv.at("local_steps"));
    }
    if (kv.count("warmup_samples")) {
      cfg.run.warmup_samples = cfgdetail::parse_long("warmup_samples", kv.at("warmup_samples"));
      if (cfg.run.warmup_samples < 0) throw ConfigError("[run] warmup_samples must be >= 0");
    }
    if (kv.count("warmup_stratified")) {
      cfg.run.warmup_stratified =
          cfgdetail::parse_bool("warmup_stratified", kv.at("warmup_stratified"));
    }
    if (kv.count("seed")) {
      cfg.run.seed = cfgdetail::parse_u64("seed", kv.at("seed"));
      cfg.run.seed_set = true;
    }
    if (kv.count("record_lyapunov")) {
      cfg.run.record_lyapunov = cfgdetail::parse_bool("record_lyapunov", kv.at("record_lyapunov"));
    }
    if (kv.count("lyapunov_constant")) {
      cfg.run.lyapunov_constant = kv.at("lyapunov_constant");
      if (cfg.run.lyapunov_constant != "main_text" && cfg.run.lyapunov_constant != "appendix") {
        throw ConfigError("[run] lyapunov_constant must be main_text or appendix");
      }
    }
    if (kv.count("prox_client")) {
      cfg.run.prox_client = kv.at("prox_client");
      if (cfg.run.prox_client != "cohort" && cfg.run.prox_client != "fresh") {
        throw ConfigError("[run] prox_client must be cohort or fresh");
      }
    }
    if (kv.count("cohort_sampling")) {
      cfg.run.cohort_sampling = kv.at("cohort_sampling");
      if (cfg.run.cohort_sampling != "without_replacement" &&
          cfg.run.cohort_sampling != "with_replacement") {
        throw ConfigError("[run] cohort_sampling must be without_replacement or with_replacement");
      }
    }
    if (kv.count("trace")) cfg.run.trace = kv.at("trace");
  }

  if (auto it = ini.sections.find("sweep"); it != ini.sections.end()) {
    cfg.has_sweep = true;
    const auto& kv = it->second;
    cfgdetail::require_known("sweep", kv,
                             {"p", "gamma", "local_steps", "B", "seeds", "cap", "floor_tail"});
    if (kv.count("p")) {
      for (const std::string& tok : cfgdetail::split_list(kv.at("p"))) {
        cfg.sweep.p.push_back(cfgdetail::parse_double("p", tok));
      }
    }
    if (kv.count("gamma")) {
      for (const std::string& tok : cfgdetail::split_list(kv.at("gamma"))) {
        cfg.sweep.gamma.push_back(GammaExpr::parse("gamma", tok));
      }
    }
    if (kv.count("local_steps")) {
      for (const std::string& tok : cfgdetail::split_list(kv.at("local_steps"))) {
        cfg.sweep.local_steps.push_back(cfgdetail::parse_local_steps("local_steps", tok));
      }
    }
    if (kv.count("B")) {
      for (const std::string& tok : cfgdetail::split_list(kv.at("B"))) {
        const long b = cfgdetail::parse_long("B", tok);
        if (b < 1) throw ConfigError("[sweep] B entries must be >= 1");
        cfg.sweep.B.push_back(b);
      }
    }
    if (kv.count("seeds")) {
      for (const std::string& tok : cfgdetail::split_list(kv.at("seeds"))) {
        cfg.sweep.seeds.push_back(cfgdetail::parse_u64("seeds", tok));
      }
    }
    if (kv.count("cap")) {
      cfg.sweep.cap = cfgdetail::parse_long("cap", kv.at("cap"));
      if (cfg.sweep.cap < 1) throw ConfigError("[sweep] cap must be >= 1");
    }
    if (kv.count("floor_tail")) {
      cfg.sweep.floor_tail = cfgdetail::parse_double("floor_tail", kv.at("floor_tail"));
      if (!(cfg.sweep.floor_tail > 0.0) || cfg.sweep.floor_tail > 1.0) {
        throw ConfigError("[sweep] floor_tail must lie in (0, 1]");
      }
    }
  }

  return cfg;
}

inline CliConfig load_config(const std::string& path) {
  const IniFile ini = parse_ini_file(path);
  const std::string dir = std::filesystem::path(path).parent_path().string();
  return interpret_config(ini, dir.empty() ? "." : dir);
}

// Resolves a path from the config file's directory.
inline std::string resolve_config_path(const CliConfig& cfg, const std::string& rel) {
  std::filesystem::path p(rel);
  if (p.is_absolute()) return rel;
  return (std::filesystem::path(cfg.config_dir) / p).string();
}

}  // namespace spam

#endif  // SPAM_CONFIG_HPP
