#include "jmd/airframe.hpp"
#include "jmd/numerics.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace jmd;

TEST_CASE("frame layout") {
  SUBCASE("index sets partition the frame") {
    for (int R : {0, 1, 4, 7, 40}) {
      const FrameLayout f = FrameLayout::make(32, 16, 1, 1, 16, 84 - R, R);
      CHECK(f.L() == 100);
      std::set<int> all;
      for (const auto* v : {&f.training_cols, &f.pilot_cols, &f.data_cols}) all.insert(v->begin(), v->end());
      CHECK(all.size() == 100);
      CHECK(*all.begin() == 0);
      CHECK(*all.rbegin() == 99);
      CHECK(static_cast<int>(f.training_cols.size()) == R);
    }
  }
  SUBCASE("training columns are spread evenly") {
    const FrameLayout f = FrameLayout::make(32, 16, 1, 1, 16, 80, 4);
    CHECK(f.training_cols == std::vector<int>{0, 25, 50, 75});
  }
  SUBCASE("constraint violations") {
    CHECK_THROWS_WITH_AS(FrameLayout::make(16, 16, 4, 1, 16, 84, 0), doctest::Contains("B >= U + I"),
                         std::invalid_argument);
    CHECK_THROWS(FrameLayout::make(32, 16, 1, 1, 8, 84, 0));
    CHECK_THROWS(FrameLayout::make(32, 16, 1, 2, 16, 84, 0));
    CHECK_THROWS(FrameLayout::make(32, 16, 1, 1, 16, 0, 0));
  }
}

TEST_CASE("QPSK mapping") {
  BitMatrix b(1, 8);
  b << 0, 0, 1, 1, 0, 1, 1, 0;
  const CMatrix s = qpsk_modulate(b);
  const double h = M_SQRT1_2;
  CHECK(std::abs(s(0, 0) - Complex(h, h)) < 1e-15);
  CHECK(std::abs(s(0, 1) - Complex(-h, -h)) < 1e-15);
  CHECK(std::abs(s(0, 2) - Complex(h, -h)) < 1e-15);
  CHECK(std::abs(s(0, 3) - Complex(-h, h)) < 1e-15);
  CHECK(qpsk_demodulate(s) == b);
  for (Eigen::Index k = 0; k < s.size(); ++k) CHECK(std::abs(std::abs(s(k)) - 1.0) < 1e-15);

  CMatrix z(1, 3);
  z << Complex(0.9 * h, 0.9 * h), Complex(0.0, -0.3), Complex(0.0, 0.0);
  const BitMatrix d = qpsk_demodulate(z);
  CHECK(d(0, 0) == 0);
  CHECK(d(0, 1) == 0);
  CHECK(d(0, 2) == 0);  // Re = 0 decides bit 0
  CHECK(d(0, 3) == 1);
  CHECK(qpsk_round(CMatrix::Zero(2, 2)).isApprox(CMatrix::Constant(2, 2, Complex(h, h))));

  SUBCASE("noisy symbols at 30 dB") {
    RandomStream rng(21);
    const BitMatrix bits = random_bits(16, 2000, rng);
    const CMatrix noisy = qpsk_modulate(bits) + rng.complex_normal(16, 1000) * std::sqrt(1e-3);
    const double agree = static_cast<double>((qpsk_demodulate(noisy).array() == bits.array()).count()) / bits.size();
    CHECK(agree > 0.999);
  }
}

TEST_CASE("Haar pilots") {
  RandomStream rng(22);
  SUBCASE("scaled unitary") {
    for (int U : {1, 2, 16}) {
      const CMatrix S = haar_pilots(U, U, rng);
      CHECK((S * S.adjoint() - U * CMatrix::Identity(U, U)).norm() < 1e-8);
      CHECK((pseudoinverse(S) - S.adjoint() / U).norm() < 1e-8);
      for (int u = 0; u < U; ++u) CHECK(S.row(u).squaredNorm() / U == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
  SUBCASE("1 x 1 has unit modulus") { CHECK(std::abs(std::abs(haar_pilots(1, 1, rng)(0, 0)) - 1.0) < 1e-12); }
  SUBCASE("first moment vanishes") {
    const int n = 10000;
    Complex mean = 0;
    for (int i = 0; i < n; ++i) mean += haar_pilots(2, 2, rng)(0, 1);
    mean /= n;
    // Entries of a scaled 2x2 Haar matrix have E|s|^2 = 1.
    CHECK(std::abs(mean) < 4.0 / std::sqrt(n));
  }
  CHECK_THROWS_AS(haar_pilots(4, 6, rng), UnsupportedConfiguration);
}

TEST_CASE("channel generation") {
  RandomStream rng(23);
  const FrameLayout f = FrameLayout::make(32, 16, 4, 1, 16, 84, 0);
  double col_energy = 0;
  const int n = 400;
  for (int i = 0; i < n; ++i) {
    const ChannelDraw c = gen_channel(f, rng);
    for (int u = 0; u < 16; ++u) {
      CHECK(c.gains(u) * c.gains(u) >= std::pow(10.0, -0.3) - 1e-12);
      CHECK(c.gains(u) * c.gains(u) <= std::pow(10.0, 0.3) + 1e-12);
      col_energy += c.H.col(u).squaredNorm() / (c.gains(u) * c.gains(u));
    }
    CMatrix HJ(32, 20);
    HJ << c.H, c.J;
    const RVector sv = Eigen::JacobiSVD<CMatrix>(HJ).singularValues();
    CHECK(sv(19) > 1e-6 * sv(0));
  }
  CHECK(col_energy / (n * 16) == doctest::Approx(32.0).epsilon(0.05));
}

TEST_CASE("power bookkeeping") {
  SUBCASE("noise level from SNR") {
    CMatrix H = CMatrix::Zero(4, 1);
    H(0, 0) = 2.0;  // |H|^2 = 4 = B
    CHECK(scale_noise_for_snr(H, 0.0) == doctest::Approx(1.0));
    CHECK(scale_noise_for_snr(H, 300.0) < 1e-29);
    CMatrix H2 = CMatrix::Zero(32, 1);
    H2(0, 0) = std::sqrt(512.0);
    CHECK(scale_noise_for_snr(H2, 10.0) == doctest::Approx(1.6).epsilon(1e-12));
  }
  RandomStream rng(24);
  const CMatrix H = rng.complex_normal(32, 16), J = rng.complex_normal(32, 1);
  SUBCASE("rho after scaling") {
    const CMatrix W = rng.complex_normal(1, 100);
    const JammerScaling s = scale_jammer_for_rho(J, W, H, 30.0, 100);
    CHECK_FALSE(s.silent);
    CHECK(std::abs(measured_rho_db(J, s.W, H) - 30.0) < 1e-9);
  }
  SUBCASE("silent jammer is flagged") {
    const JammerScaling s = scale_jammer_for_rho(J, CMatrix::Zero(1, 100), H, 30.0, 100);
    CHECK(s.silent);
    CHECK(s.W.norm() == 0.0);
  }
  SUBCASE("sparse jammer energy lands in one column") {
    CMatrix W = CMatrix::Zero(1, 100);
    W(0, 37) = rng.complex_normal();
    const JammerScaling s = scale_jammer_for_rho(J, W, H, 30.0, 100);
    const double expect = 100.0 * 1000.0 * H.squaredNorm() / 16.0;
    CHECK((J * s.W.col(37)).squaredNorm() == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("receive synthesis") {
  RandomStream rng(25);
  const FrameLayout f = FrameLayout::make(8, 2, 1, 1, 2, 10, 3);
  const ChannelDraw c = gen_channel(f, rng);
  Scene sc;
  sc.H = c.H;
  sc.J = c.J;
  const CMatrix S_T = haar_pilots(2, 2, rng);
  const CMatrix S_D = qpsk_modulate(random_bits(2, 20, rng));
  SUBCASE("noiseless, jammer free") {
    const FrameSignals s = synthesize_rx(f, sc, S_T, S_D, CMatrix::Zero(1, f.L()), rng);
    CHECK((s.Y - c.H * s.X).norm() < 1e-14);
    CHECK(select_columns(s.X, f.training_cols).norm() == 0.0);
    CHECK((s.Y_T(f) - c.H * S_T).norm() < 1e-12);
  }
  SUBCASE("training columns see jammer and noise only") {
    sc.N0 = 0.3;
    const CMatrix W = rng.complex_normal(1, f.L());
    const FrameSignals s = synthesize_rx(f, sc, S_T, S_D, W, rng);
    const CMatrix expect = c.J * select_columns(W, f.training_cols) + select_columns(s.N, f.training_cols);
    CHECK((s.Y_J(f) - expect).norm() < 1e-12);
  }
  SUBCASE("noise energy") {
    sc.N0 = 0.7;
    double e = 0;
    for (int i = 0; i < 1000; ++i) e += synthesize_rx(f, sc, S_T, S_D, CMatrix::Zero(1, f.L()), rng).N.squaredNorm();
    CHECK(e / 1000 == doctest::Approx(8 * f.L() * 0.7).epsilon(0.05));
  }
  SUBCASE("measured SNR matches the target") {
    sc.N0 = scale_noise_for_snr(c.H, 12.5);
    CHECK(std::abs(measured_snr_db(c.H, sc.N0) - 12.5) < 1e-10);
  }
  CHECK_THROWS_AS(synthesize_rx(f, sc, S_T, S_D, CMatrix::Zero(1, 4), rng), DimensionError);
}
