// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "jmd/detectors.hpp"
#include "jmd/jammers.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace jmd {

enum class DetectorId {
  Sandman,
  Maed,
  PosBox,
  PosJed,
  GPosBox,
  GPosJed,
  Unmitigated,
  CoinFlip,       ///< uniform random symbols (harness self-test)
  OracleSymbols,  ///< returns the transmitted symbols
};

std::string_view to_string(DetectorId id);
/// Throws std::invalid_argument listing the valid names.
DetectorId detector_from_string(std::string_view name);
const std::vector<DetectorId>& all_detectors();
/// POS-BOX and POS-JED reserve R training columns; everything else runs with R = 0.
bool uses_training_period(DetectorId id);
/// Receivers handed the true jammer channel.
bool is_genie(DetectorId id);

struct DetectorEntry {
  DetectorId id = DetectorId::Sandman;
  DetectorConfig cfg;
};

/// Everything needed to draw frames.
struct Scenario {
  int B = 32;
  int U = 16;
  int T = 16;
  int L = 100;
  int R = 4;  ///< training columns of the POS receivers
  JammerSpec jammer;

  /// Layout for a detector: R = 0 (D = L - T) or R training columns (D = L - T - R).
  FrameLayout layout_for(DetectorId id) const;
  FrameLayout layout_with_training(int R_train) const;
  void validate() const;
};

struct TrialResult {
  DetectorId detector = DetectorId::Sandman;
  std::uint64_t seed = 0;          ///< master seed of the run
  long trial = 0;
  double snr_db = 0.0;
  long bit_errors = 0;
  long bits_total = 0;
  double squared_symbol_error = 0.0;   ///< |S_hat - S|_F^2 (hard decisions)
  double squared_symbol_energy = 0.0;  ///< |S|_F^2
  std::uint64_t scene_hash = 0;        ///< hash of (H, J, S_T, S_D, W, N)
};

struct Metrics {
  long bit_errors = 0;
  long bits_total = 0;
  double squared_symbol_error = 0.0;
  double squared_symbol_energy = 0.0;

  double ber() const;
  /// sqrt(sum |S_hat - S|^2 / sum |S|^2): ratio of sums, root last.
  double mer() const;
  Metrics& operator+=(const Metrics& o);
  Metrics& operator+=(const TrialResult& t);
};

/// Hard decisions S_hat against the truth. `S_soft` is not used for the
/// metrics; it is accepted so callers can pass the full detector output.
Metrics compute_metrics(const CMatrix& S_hat_D, const CMatrix& S_D, const std::optional<CMatrix>& S_soft = std::nullopt);

/// 95% Wilson score interval half-width for k successes in n trials.
double wilson_half_width(long k, long n, double z = 1.959963984540054);

/// One frame at the given SNR. Scene streams depend only on (seed, trial);
/// every detector, and every SNR point, sees the same channels, symbols,
/// jammer waveform and unit-variance noise.
TrialResult run_frame_trial(const Scenario& sc, const DetectorEntry& det, double snr_db, double rho_db,
                            std::uint64_t seed, long trial);

/// Default worker count: JMD_THREADS if set, else hardware concurrency.
int default_thread_count();

struct SweepPoint {
  DetectorId detector = DetectorId::Sandman;
  double snr_db = 0.0;
  long trials = 0;
  double ber = 0.0;
  double ber_ci = 0.0;  ///< Wilson half-width
  double mer = 0.0;
  Metrics totals;
  std::vector<std::uint64_t> scene_hashes;  ///< per trial
};

struct SweepConfig {
  Scenario scenario;
  std::vector<DetectorEntry> detectors;
  std::vector<double> snr_db;
  double rho_db = 30.0;
  long trials = 1000;
  std::uint64_t seed = 1;
  int threads = 0;  ///< 0: default_thread_count()
};

/// Row order: detectors outer, SNR inner, as listed in the config.
/// Results do not depend on the thread count.
std::vector<SweepPoint> run_ber_sweep(const SweepConfig& cfg);

struct RateConfig {
  Scenario scenario;
  std::vector<DetectorEntry> detectors;
  std::vector<int> R_grid{1, 2, 4, 8, 16, 32, 64};
  double snr_lo = 0.0;
  double snr_hi = 20.0;
  double snr_step = 0.5;
  double mer_threshold = 0.175;
  double rho_db = 30.0;
  long trials = 500;
  std::uint64_t seed = 1;
  int threads = 0;
};

struct RatePoint {
  DetectorId detector = DetectorId::Sandman;
  int R = 0;
  double r = 1.0;
  double min_snr_db = 0.0;  ///< NaN when the MER criterion is never met on the grid
};

/// r = (L - T - R) / (L - T).
double relative_rate(int L, int T, int R);

/// Lowest grid SNR with MER <= threshold, found by an ascending scan and
/// refined by linear interpolation between the bracketing grid points.
/// `mer_at(snr, stop_above)` returns the MER at `snr`, or any value above
/// `stop_above` once the MER is known to exceed it. The point before the
/// first hit is re-evaluated with stop_above = +inf for the interpolation.
template <class F>
double min_snr_for_mer(F&& mer_at, double lo, double hi, double step, double threshold);

/// Receivers without a training period (and the genies) are evaluated at
/// R = 0 only; POS receivers at every R of the grid.
std::vector<RatePoint> run_rate_tradeoff(const RateConfig& cfg);

/// Runs `n` jobs on `threads` workers; job i writes only its own slot.
void parallel_for(long n, int threads, const std::function<void(long)>& job);

// --- template implementation ----------------------------------------------

template <class F>
double min_snr_for_mer(F&& mer_at, double lo, double hi, double step, double threshold) {
  const long n = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  const double inf = std::numeric_limits<double>::infinity();
  for (long i = 0; i < n; ++i) {
    const double snr = lo + static_cast<double>(i) * step;
    const double mer = mer_at(snr, threshold);
    if (mer <= threshold) {
      if (i == 0) return snr;
      const double prev_snr = lo + static_cast<double>(i - 1) * step;
      const double prev_mer = mer_at(prev_snr, inf);
      if (!(prev_mer > mer)) return snr;
      return prev_snr + (prev_mer - threshold) / (prev_mer - mer) * (snr - prev_snr);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace jmd
