// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "jmd/eclipse.hpp"
#include "jmd/harness.hpp"

#include <json.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace jmd {

/// Raised for malformed or inconsistent configuration; the message names
/// the offending key path.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class EclipseSignal { Optimal, Gaussian };

struct EclipseMcConfig {
  std::vector<int> U{1, 4, 16};
  int D = 12;
  std::vector<int> w0{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  EclipseMode mode = EclipseMode::PerfectCsi;
  EclipseSignal signal = EclipseSignal::Optimal;
  double alpha_scale = 1.4142135623730951;
  long trials = 100000;
};

struct ExperimentConfig {
  Scenario scenario;
  std::vector<DetectorEntry> detectors;
  std::vector<double> snr_db{0.0, 5.0, 10.0, 15.0, 20.0};
  double rho_db = 30.0;
  long trials = 1000;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string output;  ///< empty: stdout

  // rate-tradeoff
  std::vector<int> R_grid{1, 2, 4, 8, 16, 32, 64};
  double snr_lo = 0.0, snr_hi = 20.0, snr_step = 0.5;
  double mer_threshold = 0.175;
  long rate_trials = 500;

  EclipseMcConfig eclipse;

  /// Detectors whose t_max came from the file; a --jammer override leaves them alone.
  std::set<std::size_t> explicit_t_max;

  SweepConfig sweep() const;
  RateConfig rate() const;
  /// Fully resolved configuration, for provenance lines.
  nlohmann::json to_json() const;
};

/// Iteration count for a jammer class: 50 for multi-antenna classes, else 30.
int default_t_max(JammerKind kind);

/// Parses a JSON document. Missing keys take the defaults above; an empty
/// document yields the full default configuration.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Command-line overrides; unset fields leave the file values alone.
struct ConfigOverrides {
  std::optional<std::vector<double>> snr_db;
  std::optional<long> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> jammer;
  std::optional<int> threads;
  std::optional<std::string> output;
};

void apply_overrides(ExperimentConfig& cfg, const ConfigOverrides& o);

std::string to_string(EclipseMode mode);

/// git describe of the source tree at configure time.
std::string build_id();

}  // namespace jmd
