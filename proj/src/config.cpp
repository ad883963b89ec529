// SPDX-License-Identifier: Apache-2.0
#include "jmd/config.hpp"

#include <fstream>
#include <sstream>

namespace jmd {

namespace {

using nlohmann::json;

struct Reader {
  const json& node;
  std::string path;

  std::string key(const std::string& k) const { return path.empty() ? k : path + "." + k; }

  void reject_unknown(const std::set<std::string>& allowed) const {
    if (!node.is_object()) throw ConfigError("config: '" + (path.empty() ? "<root>" : path) + "' must be an object");
    for (const auto& [k, v] : node.items())
      if (!allowed.count(k)) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        throw ConfigError("config: unknown key '" + key(k) + "' (allowed: " + list + ")");
      }
  }

  template <class T>
  void get(const std::string& k, T& out) const {
    if (!node.contains(k)) return;
    try {
      out = node.at(k).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("config: bad value for '" + key(k) + "': " + e.what());
    }
  }
};

DetectorEntry default_entry(DetectorId id, const JammerSpec& jammer) {
  DetectorEntry e;
  e.id = id;
  e.cfg.I = jammer.I;
  e.cfg.t_max = default_t_max(jammer.kind);
  return e;
}

std::vector<DetectorEntry> default_detectors(const JammerSpec& jammer) {
  std::vector<DetectorEntry> v;
  for (DetectorId id : {DetectorId::Sandman, DetectorId::Maed, DetectorId::PosBox, DetectorId::PosJed,
                        DetectorId::GPosBox, DetectorId::GPosJed, DetectorId::Unmitigated})
    v.push_back(default_entry(id, jammer));
  return v;
}

EclipseMode mode_from_string(const std::string& s, const std::string& key) {
  if (s == "def1") return EclipseMode::PerfectCsi;
  if (s == "def2") return EclipseMode::ChannelEst;
  throw ConfigError("config: '" + key + "' must be def1 or def2, got '" + s + "'");
}

void validate(const ExperimentConfig& c) {
  try {
    c.scenario.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.trials < 1) throw ConfigError("config: 'trials' must be >= 1");
  if (c.rate_trials < 1) throw ConfigError("config: 'rate_tradeoff.trials' must be >= 1");
  if (c.snr_db.empty()) throw ConfigError("config: 'snr_db' must not be empty");
  if (!(c.snr_step > 0.0) || c.snr_hi < c.snr_lo) throw ConfigError("config: 'rate_tradeoff' SNR grid is empty");
  if (!(c.rho_db == c.rho_db)) throw ConfigError("config: 'rho_db' must be a number");
  for (int R : c.R_grid)
    if (R < 0 || R > c.scenario.L - c.scenario.T)
      throw ConfigError("config: 'rate_tradeoff.R_grid' entries must lie in [0, L - T]");
  for (std::size_t i = 0; i < c.detectors.size(); ++i) {
    const auto& d = c.detectors[i];
    const std::string k = "detectors[" + std::to_string(i) + "]";
    try {
      d.cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("config: '" + k + "': " + e.what());
    }
    if (c.scenario.U + d.cfg.I > c.scenario.B)
      throw ConfigError("config: '" + k + ".I': B >= U + I violated for the assumed jammer rank");
  }
  const auto& e = c.eclipse;
  if (e.D < 1) throw ConfigError("config: 'eclipse.D' must be >= 1");
  if (e.trials < 1) throw ConfigError("config: 'eclipse.trials' must be >= 1");
  for (int u : e.U)
    if (u < 1) throw ConfigError("config: 'eclipse.U' entries must be >= 1");
  for (int w : e.w0)
    if (w < 0 || w > e.D) throw ConfigError("config: 'eclipse.w0' entries must lie in [0, D]");
}

}  // namespace

#ifndef JMD_BUILD_ID
#define JMD_BUILD_ID "unknown"
#endif

std::string build_id() { return JMD_BUILD_ID; }

int default_t_max(JammerKind kind) { return is_multi_antenna_class(kind) ? 50 : 30; }

std::string to_string(EclipseMode mode) { return mode == EclipseMode::PerfectCsi ? "def1" : "def2"; }

SweepConfig ExperimentConfig::sweep() const {
  SweepConfig s;
  s.scenario = scenario;
  s.detectors = detectors;
  s.snr_db = snr_db;
  s.rho_db = rho_db;
  s.trials = trials;
  s.seed = seed;
  s.threads = threads;
  return s;
}

RateConfig ExperimentConfig::rate() const {
  RateConfig r;
  r.scenario = scenario;
  r.detectors = detectors;
  r.R_grid = R_grid;
  r.snr_lo = snr_lo;
  r.snr_hi = snr_hi;
  r.snr_step = snr_step;
  r.mer_threshold = mer_threshold;
  r.rho_db = rho_db;
  r.trials = rate_trials;
  r.seed = seed;
  r.threads = threads;
  return r;
}

nlohmann::json ExperimentConfig::to_json() const {
  json dets = json::array();
  for (const auto& d : detectors) {
    json o{{"name", std::string(jmd::to_string(d.id))}, {"t_max", d.cfg.t_max}, {"alpha", d.cfg.alpha}, {"I", d.cfg.I}};
    if (d.cfg.fallback_step) o["fallback_step"] = *d.cfg.fallback_step;
    dets.push_back(o);
  }
  const auto& j = scenario.jammer;
  // Threads and output path do not affect results and are left out.
  return json{
      {"B", scenario.B},
      {"U", scenario.U},
      {"T", scenario.T},
      {"L", scenario.L},
      {"D", scenario.L - scenario.T},
      {"R", scenario.R},
      {"jammer",
       {{"kind", std::string(jmd::to_string(j.kind))},
        {"I", j.I},
        {"devices", j.J_count},
        {"anchors", j.anchors},
        {"persistence", j.persistence},
        {"max_active", j.max_active}}},
      {"rho_db", rho_db},
      {"detectors", dets},
      {"snr_db", snr_db},
      {"trials", trials},
      {"seed", seed},
      {"rate_tradeoff",
       {{"R_grid", R_grid},
        {"snr_lo", snr_lo},
        {"snr_hi", snr_hi},
        {"snr_step", snr_step},
        {"mer_threshold", mer_threshold},
        {"trials", rate_trials}}},
      {"eclipse",
       {{"U", eclipse.U},
        {"D", eclipse.D},
        {"w0", eclipse.w0},
        {"mode", to_string(eclipse.mode)},
        {"signal", eclipse.signal == EclipseSignal::Optimal ? "optimal" : "gaussian"},
        {"alpha_scale", eclipse.alpha_scale},
        {"trials", eclipse.trials}}},
  };
}

ExperimentConfig parse_config(const std::string& text) {
  json root = json::object();
  bool blank = text.find_first_not_of(" \t\r\n") == std::string::npos;
  if (!blank) {
    try {
      root = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config: parse error: ") + e.what());
    }
  }
  ExperimentConfig c;
  Reader r{root, ""};
  r.reject_unknown({"B", "U", "T", "L", "D", "R", "jammer", "rho_db", "detectors", "snr_db", "trials", "seed",
                    "threads", "output", "rate_tradeoff", "eclipse"});
  r.get("B", c.scenario.B);
  r.get("U", c.scenario.U);
  r.get("T", c.scenario.T);
  r.get("L", c.scenario.L);
  r.get("R", c.scenario.R);
  if (root.contains("D")) {
    int D = 0;
    r.get("D", D);
    if (D != c.scenario.L - c.scenario.T)
      throw ConfigError("config: 'D' must equal L - T (" + std::to_string(c.scenario.L - c.scenario.T) +
                        "); receivers with a training period use D = L - T - R");
  }
  if (root.contains("jammer")) {
    Reader j{root.at("jammer"), "jammer"};
    j.reject_unknown({"kind", "I", "devices", "anchors", "persistence", "max_active"});
    std::string kind = std::string(to_string(c.scenario.jammer.kind));
    j.get("kind", kind);
    try {
      c.scenario.jammer.kind = jammer_kind_from_string(kind);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: 'jammer.kind': ") + e.what());
    }
    j.get("I", c.scenario.jammer.I);
    c.scenario.jammer.J_count = c.scenario.jammer.kind == JammerKind::Distributed ? c.scenario.jammer.I : 1;
    j.get("devices", c.scenario.jammer.J_count);
    j.get("anchors", c.scenario.jammer.anchors);
    j.get("persistence", c.scenario.jammer.persistence);
    j.get("max_active", c.scenario.jammer.max_active);
    if (!root.at("jammer").contains("max_active"))
      c.scenario.jammer.max_active = std::min(c.scenario.jammer.max_active, c.scenario.jammer.I);
  }
  r.get("rho_db", c.rho_db);
  r.get("snr_db", c.snr_db);
  r.get("trials", c.trials);
  r.get("seed", c.seed);
  r.get("threads", c.threads);
  r.get("output", c.output);

  const JammerSpec& jam = c.scenario.jammer;
  if (root.contains("detectors")) {
    const json& arr = root.at("detectors");
    if (!arr.is_array()) throw ConfigError("config: 'detectors' must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string k = "detectors[" + std::to_string(i) + "]";
      const json& item = arr[i];
      std::string name;
      if (item.is_string()) {
        name = item.get<std::string>();
      } else if (item.is_object() && item.contains("name") && item.at("name").is_string()) {
        name = item.at("name").get<std::string>();
      } else {
        throw ConfigError("config: '" + k + "' must be a detector name or an object with a 'name'");
      }
      DetectorEntry e;
      try {
        e = default_entry(detector_from_string(name), jam);
      } catch (const std::invalid_argument& ex) {
        throw ConfigError("config: '" + k + "': " + ex.what());
      }
      if (item.is_object()) {
        Reader d{item, k};
        d.reject_unknown({"name", "t_max", "alpha", "I", "fallback_step"});
        d.get("t_max", e.cfg.t_max);
        d.get("alpha", e.cfg.alpha);
        d.get("I", e.cfg.I);
        if (item.contains("fallback_step")) {
          double f = 0.0;
          d.get("fallback_step", f);
          e.cfg.fallback_step = f;
        }
        if (item.contains("t_max")) c.explicit_t_max.insert(i);
      }
      c.detectors.push_back(e);
    }
  } else {
    c.detectors = default_detectors(jam);
  }

  if (root.contains("rate_tradeoff")) {
    Reader q{root.at("rate_tradeoff"), "rate_tradeoff"};
    q.reject_unknown({"R_grid", "snr_lo", "snr_hi", "snr_step", "mer_threshold", "trials"});
    q.get("R_grid", c.R_grid);
    q.get("snr_lo", c.snr_lo);
    q.get("snr_hi", c.snr_hi);
    q.get("snr_step", c.snr_step);
    q.get("mer_threshold", c.mer_threshold);
    q.get("trials", c.rate_trials);
  }
  if (root.contains("eclipse")) {
    Reader q{root.at("eclipse"), "eclipse"};
    q.reject_unknown({"U", "D", "w0", "mode", "signal", "alpha_scale", "trials"});
    q.get("U", c.eclipse.U);
    q.get("D", c.eclipse.D);
    q.get("w0", c.eclipse.w0);
    std::string mode = to_string(c.eclipse.mode), signal = "optimal";
    q.get("mode", mode);
    c.eclipse.mode = mode_from_string(mode, "eclipse.mode");
    q.get("signal", signal);
    if (signal == "optimal")
      c.eclipse.signal = EclipseSignal::Optimal;
    else if (signal == "gaussian")
      c.eclipse.signal = EclipseSignal::Gaussian;
    else
      throw ConfigError("config: 'eclipse.signal' must be optimal or gaussian, got '" + signal + "'");
    q.get("alpha_scale", c.eclipse.alpha_scale);
    q.get("trials", c.eclipse.trials);
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_overrides(ExperimentConfig& cfg, const ConfigOverrides& o) {
  if (o.snr_db) cfg.snr_db = *o.snr_db;
  if (o.trials) cfg.trials = cfg.rate_trials = *o.trials;
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (o.output) cfg.output = *o.output;
  if (o.jammer) {
    try {
      cfg.scenario.jammer.kind = jammer_kind_from_string(*o.jammer);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("--jammer: ") + e.what());
    }
    if (cfg.scenario.jammer.kind == JammerKind::Distributed) cfg.scenario.jammer.J_count = cfg.scenario.jammer.I;
    for (std::size_t i = 0; i < cfg.detectors.size(); ++i)
      if (!cfg.explicit_t_max.count(i)) cfg.detectors[i].cfg.t_max = default_t_max(cfg.scenario.jammer.kind);
  }
  validate(cfg);
}

}  // namespace jmd
