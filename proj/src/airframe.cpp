// SPDX-License-Identifier: Apache-2.0
#include "jmd/airframe.hpp"

#include "jmd/numerics.hpp"

#include <cmath>
#include <sstream>

namespace jmd {

FrameLayout FrameLayout::make(int B, int U, int I, int J_count, int T, int D, int R) {
  std::ostringstream err;
  if (U < 1) err << "U must be >= 1; ";
  if (I < 1) err << "I must be >= 1; ";
  if (J_count < 1) err << "jammer device count must be >= 1; ";
  if (J_count > I) err << "each jammer device needs at least one antenna (J_count <= I); ";
  if (B < U + I) err << "B >= U + I violated (B=" << B << ", U=" << U << ", I=" << I << "); ";
  if (T < U) err << "T >= U violated; ";
  if (D < 1) err << "D must be >= 1; ";
  if (R < 0) err << "R must be >= 0; ";
  if (!err.str().empty()) throw std::invalid_argument("FrameLayout: " + err.str());

  FrameLayout f;
  f.B = B;
  f.U = U;
  f.I = I;
  f.J_count = J_count;
  f.T = T;
  f.D = D;
  f.R = R;
  const int L = f.L();
  std::vector<bool> is_training(static_cast<std::size_t>(L), false);
  for (int l = 0; l < R; ++l) {
    const auto idx = static_cast<int>(std::lround(static_cast<double>(l) * L / R));
    is_training[static_cast<std::size_t>(idx)] = true;
    f.training_cols.push_back(idx);
  }
  for (int k = 0; k < L; ++k) {
    if (is_training[static_cast<std::size_t>(k)]) continue;
    if (static_cast<int>(f.pilot_cols.size()) < T)
      f.pilot_cols.push_back(k);
    else
      f.data_cols.push_back(k);
  }
  return f;
}

CMatrix select_columns(const CMatrix& M, const std::vector<int>& cols) {
  CMatrix out(M.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = M.col(cols[i]);
  return out;
}

CMatrix FrameSignals::Y_J(const FrameLayout& layout) const { return select_columns(Y, layout.training_cols); }
CMatrix FrameSignals::Y_T(const FrameLayout& layout) const { return select_columns(Y, layout.pilot_cols); }
CMatrix FrameSignals::Y_D(const FrameLayout& layout) const { return select_columns(Y, layout.data_cols); }

CMatrix qpsk_modulate(const BitMatrix& bits) {
  if (bits.cols() % 2 != 0) throw DimensionError("qpsk_modulate: bit matrix needs an even column count");
  CMatrix S(bits.rows(), bits.cols() / 2);
  for (Eigen::Index d = 0; d < S.cols(); ++d) {
    for (Eigen::Index u = 0; u < S.rows(); ++u) {
      const double re = 1.0 - 2.0 * bits(u, 2 * d);
      const double im = 1.0 - 2.0 * bits(u, 2 * d + 1);
      S(u, d) = Complex(re * M_SQRT1_2, im * M_SQRT1_2);
    }
  }
  return S;
}

BitMatrix qpsk_demodulate(const CMatrix& S) {
  BitMatrix bits(S.rows(), 2 * S.cols());
  for (Eigen::Index d = 0; d < S.cols(); ++d) {
    for (Eigen::Index u = 0; u < S.rows(); ++u) {
      bits(u, 2 * d) = S(u, d).real() < 0.0 ? 1 : 0;
      bits(u, 2 * d + 1) = S(u, d).imag() < 0.0 ? 1 : 0;
    }
  }
  return bits;
}

CMatrix qpsk_round(const CMatrix& S) {
  return S.unaryExpr([](const Complex& z) {
    return Complex(z.real() < 0.0 ? -M_SQRT1_2 : M_SQRT1_2, z.imag() < 0.0 ? -M_SQRT1_2 : M_SQRT1_2);
  });
}

bool is_qpsk_point(Complex z, double tol) {
  return std::abs(std::abs(z.real()) - M_SQRT1_2) <= tol && std::abs(std::abs(z.imag()) - M_SQRT1_2) <= tol;
}

BitMatrix random_bits(int rows, int cols, RandomStream& rng) {
  BitMatrix b(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) b(r, c) = rng.bit();
  return b;
}

CMatrix haar_pilots(int U, int T, RandomStream& rng) {
  if (T != U) throw UnsupportedConfiguration("haar_pilots: only square pilot matrices (T == U) are supported");
  const CMatrix G = rng.complex_normal(U, U);
  Eigen::HouseholderQR<CMatrix> qr(G);
  CMatrix Q = qr.householderQ();
  const CMatrix& Rm = qr.matrixQR();
  for (int j = 0; j < U; ++j) {
    const Complex r = Rm(j, j);
    const double mag = std::abs(r);
    if (mag > 0.0) Q.col(j) *= r / mag;
  }
  return Q * std::sqrt(static_cast<double>(U));
}

ChannelDraw gen_channel(const FrameLayout& layout, RandomStream& rng) {
  const int B = layout.B, U = layout.U, I = layout.I;
  for (int attempt = 0; attempt < 100; ++attempt) {
    ChannelDraw c;
    c.gains.resize(U);
    c.H = rng.complex_normal(B, U);
    for (int u = 0; u < U; ++u) {
      const double gain_db = rng.uniform(-3.0, 3.0);
      c.gains(u) = std::pow(10.0, gain_db / 20.0);
      c.H.col(u) *= c.gains(u);
    }
    c.J = rng.complex_normal(B, I);
    CMatrix HJ(B, U + I);
    HJ << c.H, c.J;
    const RVector sv = Eigen::JacobiSVD<CMatrix>(HJ).singularValues();
    if (sv(sv.size() - 1) > 1e-6 * sv(0)) return c;
  }
  throw RankDeficientError("gen_channel: [H, J] rank-deficient after 100 draws");
}

double scale_noise_for_snr(const CMatrix& H, double snr_db) {
  return H.squaredNorm() / (static_cast<double>(H.rows()) * std::pow(10.0, snr_db / 10.0));
}

JammerScaling scale_jammer_for_rho(const CMatrix& J, const CMatrix& W, const CMatrix& H, double rho_db, int L) {
  const double current = (J * W).squaredNorm() / L;
  if (!(current > 0.0)) return {W, true};
  const double target = std::pow(10.0, rho_db / 10.0) * H.squaredNorm() / static_cast<double>(H.cols());
  return {W * std::sqrt(target / current), false};
}

FrameSignals synthesize_rx(const FrameLayout& layout, const Scene& scene, const CMatrix& S_T, const CMatrix& S_D,
                           const CMatrix& W, RandomStream& rng) {
  const int B = layout.B, U = layout.U, L = layout.L();
  if (scene.H.rows() != B || scene.H.cols() != U || scene.J.rows() != B || scene.J.cols() != layout.I)
    throw DimensionError("synthesize_rx: channel shapes disagree with layout");
  if (S_T.rows() != U || S_T.cols() != layout.T || S_D.rows() != U || S_D.cols() != layout.D)
    throw DimensionError("synthesize_rx: symbol matrix shapes disagree with layout");
  if (W.rows() != layout.I || W.cols() != L) throw DimensionError("synthesize_rx: W must be I x L");

  FrameSignals f;
  f.S_T = S_T;
  f.S_D = S_D;
  f.W = W;
  f.X = CMatrix::Zero(U, L);
  for (int t = 0; t < layout.T; ++t) f.X.col(layout.pilot_cols[static_cast<std::size_t>(t)]) = S_T.col(t);
  for (int d = 0; d < layout.D; ++d) f.X.col(layout.data_cols[static_cast<std::size_t>(d)]) = S_D.col(d);
  f.N = rng.complex_normal(B, L) * std::sqrt(scene.N0);
  f.Y = scene.H * f.X + scene.J * W + f.N;
  return f;
}

double measured_snr_db(const CMatrix& H, double N0) {
  return 10.0 * std::log10(H.squaredNorm() / (static_cast<double>(H.rows()) * N0));
}

double measured_rho_db(const CMatrix& J, const CMatrix& W, const CMatrix& H) {
  const double jam = (J * W).squaredNorm() / static_cast<double>(W.cols());
  return 10.0 * std::log10(jam / (H.squaredNorm() / static_cast<double>(H.cols())));
}

}  // namespace jmd
