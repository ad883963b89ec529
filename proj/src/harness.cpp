// SPDX-License-Identifier: Apache-2.0
#include "jmd/harness.hpp"

#include "jmd/eclipse.hpp"

#include <array>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace jmd {

namespace {

constexpr std::array<std::pair<DetectorId, std::string_view>, 9> kDetectorNames{{
    {DetectorId::Sandman, "sandman"},
    {DetectorId::Maed, "maed"},
    {DetectorId::PosBox, "pos-box"},
    {DetectorId::PosJed, "pos-jed"},
    {DetectorId::GPosBox, "g-pos-box"},
    {DetectorId::GPosJed, "g-pos-jed"},
    {DetectorId::Unmitigated, "unmitigated"},
    {DetectorId::CoinFlip, "coin-flip"},
    {DetectorId::OracleSymbols, "oracle-symbols"},
}};

// Stream purposes. Scene streams never depend on the detector.
enum Purpose : std::uint64_t { kChannel = 1, kPilots, kBits, kJammer, kNoise, kDetector };

void hash_bytes(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
}

void hash_matrix(std::uint64_t& h, const CMatrix& M) {
  const std::int64_t dims[2] = {M.rows(), M.cols()};
  hash_bytes(h, dims, sizeof(dims));
  hash_bytes(h, M.data(), sizeof(Complex) * static_cast<std::size_t>(M.size()));
}

}  // namespace

std::string_view to_string(DetectorId id) {
  for (const auto& [d, name] : kDetectorNames)
    if (d == id) return name;
  return "unknown";
}

DetectorId detector_from_string(std::string_view name) {
  for (const auto& [d, n] : kDetectorNames)
    if (n == name) return d;
  std::string valid;
  for (const auto& [d, n] : kDetectorNames) valid += (valid.empty() ? "" : ", ") + std::string(n);
  throw std::invalid_argument("unknown detector '" + std::string(name) + "' (valid: " + valid + ")");
}

const std::vector<DetectorId>& all_detectors() {
  static const std::vector<DetectorId> v = [] {
    std::vector<DetectorId> out;
    for (const auto& [d, n] : kDetectorNames) out.push_back(d);
    return out;
  }();
  return v;
}

bool uses_training_period(DetectorId id) { return id == DetectorId::PosBox || id == DetectorId::PosJed; }
bool is_genie(DetectorId id) { return id == DetectorId::GPosBox || id == DetectorId::GPosJed; }

FrameLayout Scenario::layout_with_training(int R_train) const {
  return FrameLayout::make(B, U, jammer.I, jammer.J_count, T, L - T - R_train, R_train);
}

FrameLayout Scenario::layout_for(DetectorId id) const { return layout_with_training(uses_training_period(id) ? R : 0); }

void Scenario::validate() const {
  jammer.validate();
  if (L - T - R < 1) throw std::invalid_argument("scenario: L - T - R must leave at least one data symbol");
  if (R < jammer.I) throw std::invalid_argument("scenario: training period R must be >= I");
  (void)layout_with_training(R);
  (void)layout_with_training(0);
}

double Metrics::ber() const {
  return bits_total > 0 ? static_cast<double>(bit_errors) / static_cast<double>(bits_total) : 0.0;
}

double Metrics::mer() const {
  return squared_symbol_energy > 0.0 ? std::sqrt(squared_symbol_error / squared_symbol_energy) : 0.0;
}

Metrics& Metrics::operator+=(const Metrics& o) {
  bit_errors += o.bit_errors;
  bits_total += o.bits_total;
  squared_symbol_error += o.squared_symbol_error;
  squared_symbol_energy += o.squared_symbol_energy;
  return *this;
}

Metrics& Metrics::operator+=(const TrialResult& t) {
  return *this += Metrics{t.bit_errors, t.bits_total, t.squared_symbol_error, t.squared_symbol_energy};
}

Metrics compute_metrics(const CMatrix& S_hat_D, const CMatrix& S_D, const std::optional<CMatrix>& S_soft) {
  if (S_hat_D.rows() != S_D.rows() || S_hat_D.cols() != S_D.cols())
    throw DimensionError("compute_metrics: estimate and truth shapes differ");
  if (S_soft && (S_soft->rows() != S_D.rows() || S_soft->cols() != S_D.cols()))
    throw DimensionError("compute_metrics: soft estimate shape differs");
  const BitMatrix a = qpsk_demodulate(S_hat_D), b = qpsk_demodulate(S_D);
  Metrics m;
  m.bit_errors = static_cast<long>((a.array() != b.array()).count());
  m.bits_total = static_cast<long>(b.size());
  m.squared_symbol_error = (S_hat_D - S_D).squaredNorm();
  m.squared_symbol_energy = S_D.squaredNorm();
  return m;
}

double wilson_half_width(long k, long n, double z) {
  if (n <= 0) return 0.0;
  const double nn = static_cast<double>(n), p = static_cast<double>(k) / nn, z2 = z * z;
  return z / (1.0 + z2 / nn) * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
}

TrialResult run_frame_trial(const Scenario& sc, const DetectorEntry& det, double snr_db, double rho_db,
                            std::uint64_t seed, long trial) {
  const FrameLayout layout = sc.layout_for(det.id);
  const auto idx = static_cast<std::uint64_t>(trial);
  RandomStream rng_channel = RandomStream::derive(seed, idx, kChannel);
  RandomStream rng_pilots = RandomStream::derive(seed, idx, kPilots);
  RandomStream rng_bits = RandomStream::derive(seed, idx, kBits);
  RandomStream rng_jammer = RandomStream::derive(seed, idx, kJammer);
  RandomStream rng_noise = RandomStream::derive(seed, idx, kNoise);
  RandomStream rng_det = RandomStream::derive(seed, idx, kDetector);

  const ChannelDraw ch = gen_channel(layout, rng_channel);
  const CMatrix S_T = haar_pilots(layout.U, layout.T, rng_pilots);
  // Bits are drawn for the longest data phase so that layouts share a prefix.
  const BitMatrix all_bits = random_bits(layout.U, 2 * (sc.L - sc.T), rng_bits);
  const BitMatrix bits = all_bits.leftCols(2 * layout.D);
  const CMatrix S_D = qpsk_modulate(bits);

  const CVector pilot_row = S_T.row(0).transpose();
  const CMatrix W0 = gen_waveform(sc.jammer, layout, pilot_row, rng_jammer);
  const JammerScaling js = scale_jammer_for_rho(ch.J, W0, ch.H, rho_db, layout.L());

  Scene scene;
  scene.H = ch.H;
  scene.J = ch.J;
  scene.gains = ch.gains;
  scene.N0 = scale_noise_for_snr(ch.H, snr_db);
  scene.snr_db = snr_db;
  scene.rho_db = rho_db;
  FrameSignals f = synthesize_rx(layout, scene, S_T, S_D, js.W, rng_noise);
  f.bits = bits;

  const CMatrix Y_T = f.Y_T(layout), Y_D = f.Y_D(layout);
  CMatrix S_hat;
  switch (det.id) {
    case DetectorId::Sandman:
      S_hat = sandman(Y_T, Y_D, S_T, det.cfg, rng_det).S_hat_D;
      break;
    case DetectorId::Maed:
      S_hat = maed(Y_T, Y_D, S_T, det.cfg, rng_det).S_hat_D;
      break;
    case DetectorId::PosBox:
      S_hat = pos_box(f.Y_J(layout), Y_T, Y_D, S_T, det.cfg).S_hat_D;
      break;
    case DetectorId::PosJed:
      S_hat = pos_jed(f.Y_J(layout), Y_T, Y_D, S_T, det.cfg).S_hat_D;
      break;
    case DetectorId::GPosBox:
      S_hat = g_pos_box(Y_T, Y_D, S_T, ch.J, det.cfg).S_hat_D;
      break;
    case DetectorId::GPosJed:
      S_hat = g_pos_jed(Y_T, Y_D, S_T, ch.J, det.cfg).S_hat_D;
      break;
    case DetectorId::Unmitigated:
      S_hat = unmitigated_lmmse(Y_T, Y_D, S_T, scene.N0).S_hat_D;
      break;
    case DetectorId::CoinFlip:
      S_hat = random_qpsk(layout.U, layout.D, rng_det);
      break;
    case DetectorId::OracleSymbols:
      S_hat = S_D;
      break;
  }

  const Metrics m = compute_metrics(S_hat, S_D);
  TrialResult r;
  r.detector = det.id;
  r.seed = seed;
  r.trial = trial;
  r.snr_db = snr_db;
  r.bit_errors = m.bit_errors;
  r.bits_total = m.bits_total;
  r.squared_symbol_error = m.squared_symbol_error;
  r.squared_symbol_energy = m.squared_symbol_energy;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const CMatrix* M : {&f.S_T, &f.S_D, &f.W, &f.N}) hash_matrix(h, *M);
  hash_matrix(h, ch.H);
  hash_matrix(h, ch.J);
  r.scene_hash = h;
  return r;
}

int default_thread_count() {
  if (const char* env = std::getenv("JMD_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

void parallel_for(long n, int threads, const std::function<void(long)>& job) {
  if (threads <= 0) threads = default_thread_count();
  if (threads == 1 || n <= 1) {
    for (long i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (long i = next++; i < n; i = next++) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  const long count = std::min<long>(threads, n);
  for (long t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::vector<SweepPoint> run_ber_sweep(const SweepConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("sweep: trials must be >= 1");
  if (cfg.detectors.empty()) throw std::invalid_argument("sweep: no detectors");
  if (cfg.snr_db.empty()) throw std::invalid_argument("sweep: empty SNR grid");
  cfg.scenario.validate();

  const long n_det = static_cast<long>(cfg.detectors.size()), n_snr = static_cast<long>(cfg.snr_db.size());
  std::vector<TrialResult> results(static_cast<std::size_t>(n_det * n_snr * cfg.trials));
  parallel_for(static_cast<long>(results.size()), cfg.threads, [&](long i) {
    const long trial = i % cfg.trials, point = i / cfg.trials;
    const auto& det = cfg.detectors[static_cast<std::size_t>(point / n_snr)];
    const double snr = cfg.snr_db[static_cast<std::size_t>(point % n_snr)];
    results[static_cast<std::size_t>(i)] = run_frame_trial(cfg.scenario, det, snr, cfg.rho_db, cfg.seed, trial);
  });

  std::vector<SweepPoint> out;
  for (long p = 0; p < n_det * n_snr; ++p) {
    SweepPoint sp;
    sp.detector = cfg.detectors[static_cast<std::size_t>(p / n_snr)].id;
    sp.snr_db = cfg.snr_db[static_cast<std::size_t>(p % n_snr)];
    sp.trials = cfg.trials;
    for (long t = 0; t < cfg.trials; ++t) {
      const TrialResult& r = results[static_cast<std::size_t>(p * cfg.trials + t)];
      sp.totals += r;
      sp.scene_hashes.push_back(r.scene_hash);
    }
    sp.ber = sp.totals.ber();
    sp.ber_ci = wilson_half_width(sp.totals.bit_errors, sp.totals.bits_total);
    sp.mer = sp.totals.mer();
    out.push_back(std::move(sp));
  }
  return out;
}

double relative_rate(int L, int T, int R) {
  if (L - T <= 0) throw std::invalid_argument("relative_rate: need L > T");
  return static_cast<double>(L - T - R) / static_cast<double>(L - T);
}

std::vector<RatePoint> run_rate_tradeoff(const RateConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("rate-tradeoff: trials must be >= 1");
  if (!(cfg.snr_step > 0.0) || cfg.snr_hi < cfg.snr_lo) throw std::invalid_argument("rate-tradeoff: bad SNR grid");
  const Scenario& base = cfg.scenario;
  for (int R : cfg.R_grid)
    if (R < 0 || R > base.L - base.T) throw std::invalid_argument("rate-tradeoff: R grid must lie in [0, L - T]");

  std::vector<RatePoint> out;
  for (const DetectorEntry& det : cfg.detectors) {
    std::vector<int> Rs{0};
    if (uses_training_period(det.id)) {
      Rs.clear();
      for (int R : cfg.R_grid)
        if (R >= base.jammer.I && R < base.L - base.T) Rs.push_back(R);
    }
    for (int R : Rs) {
      Scenario sc = base;
      sc.R = R;
      // Symbol energy is |S_D|^2 = U * D per frame, so the error energy that
      // puts the MER above `stop_above` is known before the point finishes.
      const double energy =
          static_cast<double>(cfg.trials) * static_cast<double>(sc.U) * static_cast<double>(sc.L - sc.T - R);
      auto mer_at = [&](double snr, double stop_above) {
        const double budget = stop_above * stop_above * energy * (1.0 + 1e-9);
        std::atomic<double> err{0.0};
        std::atomic<bool> above{false};
        std::vector<TrialResult> res(static_cast<std::size_t>(cfg.trials));
        parallel_for(cfg.trials, cfg.threads, [&](long t) {
          if (above.load(std::memory_order_relaxed)) return;
          res[static_cast<std::size_t>(t)] = run_frame_trial(sc, det, snr, cfg.rho_db, cfg.seed, t);
          if (err.fetch_add(res[static_cast<std::size_t>(t)].squared_symbol_error) +
                  res[static_cast<std::size_t>(t)].squared_symbol_error >
              budget)
            above = true;
        });
        if (above) return std::numeric_limits<double>::infinity();
        Metrics m;
        for (const auto& r : res) m += r;
        return m.mer();
      };
      RatePoint rp;
      rp.detector = det.id;
      rp.R = R;
      rp.r = relative_rate(base.L, base.T, R);
      rp.min_snr_db = min_snr_for_mer(mer_at, cfg.snr_lo, cfg.snr_hi, cfg.snr_step, cfg.mer_threshold);
      out.push_back(rp);
    }
  }
  return out;
}

}  // namespace jmd
