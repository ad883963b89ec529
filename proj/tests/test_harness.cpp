#include "jmd/harness.hpp"

#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

using namespace jmd;

namespace {

Scenario small_scenario() {
  Scenario sc;
  sc.B = 8;
  sc.U = 2;
  sc.T = 2;
  sc.L = 20;
  sc.R = 2;
  return sc;
}

DetectorEntry entry(DetectorId id) {
  DetectorEntry e;
  e.id = id;
  return e;
}

}  // namespace

TEST_CASE("detector names") {
  for (DetectorId id : all_detectors()) CHECK(detector_from_string(to_string(id)) == id);
  CHECK_THROWS_WITH(detector_from_string("zf"), doctest::Contains("sandman"));
  CHECK(uses_training_period(DetectorId::PosJed));
  CHECK_FALSE(uses_training_period(DetectorId::Sandman));
  CHECK(is_genie(DetectorId::GPosBox));
}

TEST_CASE("metrics") {
  const double h = M_SQRT1_2;
  CMatrix S = CMatrix::Constant(2, 4, Complex(h, h));
  CMatrix S_hat = S;
  SUBCASE("one wrong symbol") {
    S_hat(1, 2) = Complex(-h, h);
    const Metrics m = compute_metrics(S_hat, S);
    CHECK(m.bits_total == 16);
    CHECK(m.ber() == doctest::Approx(1.0 / 16.0));
    CHECK(m.mer() == doctest::Approx(0.5));
  }
  SUBCASE("antipodal") {
    const Metrics m = compute_metrics(-S, S);
    CHECK(m.ber() == 1.0);
    CHECK(m.mer() == doctest::Approx(2.0));
  }
  SUBCASE("perfect") {
    const Metrics m = compute_metrics(S_hat, S, S_hat * 0.9);
    CHECK(m.ber() == 0.0);
    CHECK(m.mer() == 0.0);
  }
  SUBCASE("aggregation is a ratio of sums") {
    Metrics a = compute_metrics(S_hat, S);
    S_hat(0, 0) = -S_hat(0, 0);
    a += compute_metrics(S_hat, S);
    CHECK(a.ber() == doctest::Approx(2.0 / 32.0));
    CHECK(a.mer() == doctest::Approx(std::sqrt(4.0 / 16.0)));
  }
  CHECK_THROWS_AS(compute_metrics(S.leftCols(3), S), DimensionError);
  CHECK(Metrics{}.ber() == 0.0);
}

TEST_CASE("Wilson interval") {
  const double z = 1.959963984540054;
  for (auto [k, n] : {std::pair<long, long>{0, 100}, {50, 100}, {3, 1000}, {999, 1000}}) {
    const double p = static_cast<double>(k) / n;
    const double lo = (p + z * z / (2 * n) - z * std::sqrt(p * (1 - p) / n + z * z / (4.0 * n * n))) / (1 + z * z / n);
    const double hi = (p + z * z / (2 * n) + z * std::sqrt(p * (1 - p) / n + z * z / (4.0 * n * n))) / (1 + z * z / n);
    CHECK(wilson_half_width(k, n) == doctest::Approx((hi - lo) / 2));
  }
  CHECK(wilson_half_width(0, 0) == 0.0);
}

TEST_CASE("rate helpers") {
  CHECK(relative_rate(100, 16, 0) == 1.0);
  CHECK(relative_rate(100, 16, 4) == doctest::Approx(80.0 / 84.0));
  CHECK(relative_rate(100, 16, 64) == doctest::Approx(20.0 / 84.0));
  CHECK(relative_rate(100, 16, 42) == 0.5);
  SUBCASE("linear interpolation between grid points") {
    int calls = 0;
    const double s =
        min_snr_for_mer([&](double snr, double) { ++calls; return 1.0 - 0.05 * snr; }, 0, 20, 0.5, 0.175);
    CHECK(s == doctest::Approx(16.5));
    CHECK(calls == 35);  // 34 grid points, then the bracketing point again
  }
  SUBCASE("met at the first point") {
    CHECK(min_snr_for_mer([](double, double) { return 0.0; }, -3, 20, 0.5, 0.175) == -3.0);
  }
  SUBCASE("early exit values only decide, the bracket is exact") {
    auto mer = [](double snr, double stop_above) {
      const double m = 1.0 - 0.05 * snr;
      return m > stop_above ? 1e9 : m;
    };
    CHECK(min_snr_for_mer(mer, 0, 20, 0.5, 0.175) == doctest::Approx(16.5));
  }
  SUBCASE("never met") {
    CHECK(std::isnan(min_snr_for_mer([](double, double) { return 1.0; }, 0, 20, 0.5, 0.175)));
  }
}

TEST_CASE("scenario validation") {
  Scenario sc;
  CHECK_NOTHROW(sc.validate());
  sc.R = 0;
  CHECK_THROWS(sc.validate());
  sc = Scenario{};
  sc.B = 16;
  CHECK_THROWS_WITH(sc.validate(), doctest::Contains("B >= U + I"));
  sc = Scenario{};
  CHECK(sc.layout_for(DetectorId::PosBox).D == 80);
  CHECK(sc.layout_for(DetectorId::Maed).D == 84);
}

TEST_CASE("frame trials") {
  const Scenario sc = small_scenario();
  SUBCASE("deterministic") {
    const TrialResult a = run_frame_trial(sc, entry(DetectorId::Sandman), 10.0, 30.0, 7, 3);
    const TrialResult b = run_frame_trial(sc, entry(DetectorId::Sandman), 10.0, 30.0, 7, 3);
    CHECK(a.bit_errors == b.bit_errors);
    CHECK(a.squared_symbol_error == b.squared_symbol_error);
    CHECK(a.scene_hash == b.scene_hash);
    CHECK(a.bits_total == 2 * 2 * 18);
  }
  SUBCASE("paired scenes across detectors and SNR") {
    const std::uint64_t h = run_frame_trial(sc, entry(DetectorId::Sandman), 10.0, 30.0, 7, 3).scene_hash;
    for (DetectorId id : {DetectorId::Maed, DetectorId::GPosBox, DetectorId::Unmitigated, DetectorId::CoinFlip})
      CHECK(run_frame_trial(sc, entry(id), 10.0, 30.0, 7, 3).scene_hash == h);
    CHECK(run_frame_trial(sc, entry(DetectorId::Sandman), 0.0, 30.0, 7, 3).scene_hash != h);  // N0 differs
    CHECK(run_frame_trial(sc, entry(DetectorId::Sandman), 10.0, 30.0, 7, 4).scene_hash != h);
    CHECK(run_frame_trial(sc, entry(DetectorId::Sandman), 10.0, 30.0, 8, 3).scene_hash != h);
    const std::uint64_t hp = run_frame_trial(sc, entry(DetectorId::PosBox), 10.0, 30.0, 7, 3).scene_hash;
    CHECK(run_frame_trial(sc, entry(DetectorId::PosJed), 10.0, 30.0, 7, 3).scene_hash == hp);
  }
  SUBCASE("oracle detector is error free") {
    const TrialResult r = run_frame_trial(sc, entry(DetectorId::OracleSymbols), -10.0, 30.0, 1, 0);
    CHECK(r.bit_errors == 0);
    CHECK(r.squared_symbol_error == 0.0);
  }
}

TEST_CASE("coin-flip detector has BER 1/2") {
  SweepConfig cfg;
  cfg.scenario = small_scenario();
  cfg.detectors = {entry(DetectorId::CoinFlip)};
  cfg.snr_db = {10.0};
  cfg.trials = 500;
  cfg.seed = 3;
  const SweepPoint p = run_ber_sweep(cfg).at(0);
  const double sigma = std::sqrt(0.25 / static_cast<double>(p.totals.bits_total));
  CHECK(std::abs(p.ber - 0.5) < 3 * sigma);
}

TEST_CASE("sweeps") {
  SweepConfig cfg;
  cfg.scenario = small_scenario();
  cfg.detectors = {entry(DetectorId::Sandman), entry(DetectorId::PosBox)};
  cfg.snr_db = {5.0, 15.0};
  cfg.trials = 20;
  cfg.seed = 11;
  cfg.threads = 1;
  const auto a = run_ber_sweep(cfg);
  REQUIRE(a.size() == 4);
  CHECK(a[0].detector == DetectorId::Sandman);
  CHECK(a[1].snr_db == 15.0);
  CHECK(a[2].detector == DetectorId::PosBox);
  cfg.threads = 3;
  const auto b = run_ber_sweep(cfg);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].totals.bit_errors == b[i].totals.bit_errors);
    CHECK(a[i].mer == b[i].mer);
    CHECK(a[i].scene_hashes == b[i].scene_hashes);
    CHECK(a[i].ber_ci == doctest::Approx(wilson_half_width(a[i].totals.bit_errors, a[i].totals.bits_total)));
  }
}

TEST_CASE("rate tradeoff with the oracle detector") {
  RateConfig cfg;
  cfg.scenario = small_scenario();
  cfg.detectors = {entry(DetectorId::OracleSymbols), entry(DetectorId::PosBox)};
  cfg.R_grid = {1, 2, 4, 18};
  cfg.trials = 5;
  cfg.snr_lo = -5.0;
  cfg.snr_hi = -4.0;
  const auto pts = run_rate_tradeoff(cfg);
  REQUIRE(pts.size() == 4);  // oracle at R = 0, POS-BOX at R = 1, 2, 4
  CHECK(pts[0].R == 0);
  CHECK(pts[0].r == 1.0);
  CHECK(pts[0].min_snr_db == -5.0);
  CHECK(pts[1].R == 1);
  CHECK(pts[3].R == 4);
  CHECK(pts[1].r == doctest::Approx(17.0 / 18.0));
}

TEST_CASE("parallel_for") {
  std::atomic<long> sum{0};
  parallel_for(1000, 4, [&](long i) { sum += i; });
  CHECK(sum == 999 * 1000 / 2);
  CHECK_THROWS_AS(parallel_for(50, 3, [](long i) { if (i == 17) throw std::runtime_error("boom"); }),
                  std::runtime_error);
  parallel_for(0, 2, [](long) { FAIL("no jobs expected"); });
}

TEST_CASE("thread count from the environment") {
  setenv("JMD_THREADS", "3", 1);
  CHECK(default_thread_count() == 3);
  unsetenv("JMD_THREADS");
  CHECK(default_thread_count() >= 1);
}

TEST_CASE("rate tradeoff matches a full scan") {
  RateConfig cfg;
  cfg.scenario = small_scenario();
  cfg.detectors = {entry(DetectorId::Sandman), entry(DetectorId::PosBox)};
  cfg.R_grid = {2};
  cfg.trials = 8;
  cfg.snr_lo = -4.0;
  cfg.snr_hi = 24.0;
  cfg.snr_step = 1.0;
  cfg.threads = 2;
  const auto pts = run_rate_tradeoff(cfg);
  REQUIRE(pts.size() == 2);
  for (const RatePoint& p : pts) {
    Scenario sc = cfg.scenario;
    sc.R = p.R == 0 ? sc.R : p.R;
    auto full = [&](double snr, double) {
      Metrics m;
      for (long t = 0; t < cfg.trials; ++t) m += run_frame_trial(sc, entry(p.detector), snr, cfg.rho_db, cfg.seed, t);
      return m.mer();
    };
    const double expect = min_snr_for_mer(full, cfg.snr_lo, cfg.snr_hi, cfg.snr_step, cfg.mer_threshold);
    CAPTURE(to_string(p.detector));
    if (std::isnan(expect))
      CHECK(std::isnan(p.min_snr_db));
    else
      CHECK(p.min_snr_db == expect);
  }
}

TEST_CASE("one SANDMAN frame at full scale stays within 50 ms") {
  const Scenario sc;
  std::vector<double> t;
  for (long k = 0; k < 9; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    (void)run_frame_trial(sc, entry(DetectorId::Sandman), 15.0, 30.0, 1, k);
    t.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  std::sort(t.begin(), t.end());
  CHECK(t[4] < 0.05);
}
