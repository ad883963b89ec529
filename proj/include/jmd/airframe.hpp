// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "jmd/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace jmd {

/// Frame geometry. Training columns (all-zero UE transmit) are spread
/// evenly over the frame at round(l * L / R); the remaining columns hold the
/// T pilots followed by the D data symbols, in frame order.
struct FrameLayout {
  int B = 32;        ///< BS antennas
  int U = 16;        ///< single-antenna UEs
  int I = 1;         ///< total jammer antennas
  int J_count = 1;   ///< jammer devices
  int T = 16;        ///< pilot length
  int D = 84;        ///< data length
  int R = 0;         ///< jammer-training columns

  std::vector<int> training_cols;
  std::vector<int> pilot_cols;
  std::vector<int> data_cols;

  int L() const { return R + T + D; }
  int K() const { return T + D; }

  /// Validates the geometry and fills the index sets.
  static FrameLayout make(int B, int U, int I, int J_count, int T, int D, int R);
};

/// Ground-truth channel draw and power bookkeeping for one frame.
struct Scene {
  CMatrix H;              ///< B x U, per-UE gains applied
  CMatrix J;              ///< B x I
  RVector gains;          ///< per-UE amplitude gains g_u
  double N0 = 0.0;
  double snr_db = 0.0;
  double rho_db = 0.0;
};

struct FrameSignals {
  CMatrix S_T;  ///< U x T pilots
  CMatrix S_D;  ///< U x D QPSK data
  BitMatrix bits;  ///< U x 2D payload bits
  CMatrix W;    ///< I x L jammer transmit matrix (after rho scaling)
  CMatrix N;    ///< B x L noise
  CMatrix X;    ///< U x L legitimate transmit matrix (zero on training columns)
  CMatrix Y;    ///< B x L receive matrix

  CMatrix Y_J(const FrameLayout& layout) const;
  CMatrix Y_T(const FrameLayout& layout) const;
  CMatrix Y_D(const FrameLayout& layout) const;
};

/// Columns `cols` of M, in order.
CMatrix select_columns(const CMatrix& M, const std::vector<int>& cols);

// --- QPSK ---------------------------------------------------------------

/// Gray mapping (b0, b1) -> ((1 - 2 b0) + i (1 - 2 b1)) / sqrt(2). Bits for
/// symbol (u, d) live at columns 2d and 2d + 1.
CMatrix qpsk_modulate(const BitMatrix& bits);

/// Hard decision b0 = (Re < 0), b1 = (Im < 0). A zero real or imaginary part
/// decides bit 0.
BitMatrix qpsk_demodulate(const CMatrix& S);

/// Entrywise nearest QPSK point; ties go to the (+,+) quadrant.
CMatrix qpsk_round(const CMatrix& S);

/// True if z is one of the four unit-power QPSK points within `tol`.
bool is_qpsk_point(Complex z, double tol = 1e-12);

BitMatrix random_bits(int rows, int cols, RandomStream& rng);

// --- Generators ---------------------------------------------------------

/// U x T pilot matrix drawn from the power-normalized Haar measure: QR of an
/// i.i.d. CN(0,1) matrix with the phases of R's diagonal moved into Q, scaled
/// by sqrt(U) so that S_T S_T^H = U I_U. Requires T == U.
CMatrix haar_pilots(int U, int T, RandomStream& rng);

struct ChannelDraw {
  CMatrix H;
  CMatrix J;
  RVector gains;
};

/// i.i.d. Rayleigh UE and jammer channels with per-UE power control gains
/// 20 log10 g_u ~ U[-3, 3] dB. Redraws until [H, J] has full column rank
/// (at most 100 attempts).
ChannelDraw gen_channel(const FrameLayout& layout, RandomStream& rng);

/// N0 = |H|_F^2 / (B * 10^(snr_db / 10)).
double scale_noise_for_snr(const CMatrix& H, double snr_db);

struct JammerScaling {
  CMatrix W;
  bool silent = false;  ///< jammer never transmits; rho does not apply
};

/// Scales W by a real c so that (1/L)|J c W|_F^2 = 10^(rho_db/10) |H|_F^2 / U.
JammerScaling scale_jammer_for_rho(const CMatrix& J, const CMatrix& W, const CMatrix& H, double rho_db, int L);

/// Assembles X and draws N ~ CN(0, N0) to form Y = H X + J W + N.
FrameSignals synthesize_rx(const FrameLayout& layout, const Scene& scene, const CMatrix& S_T, const CMatrix& S_D,
                           const CMatrix& W, RandomStream& rng);

/// |H|_F^2 / (B N0) in dB.
double measured_snr_db(const CMatrix& H, double N0);
/// ((1/L)|J W|_F^2) / ((1/U)|H|_F^2) in dB.
double measured_rho_db(const CMatrix& J, const CMatrix& W, const CMatrix& H);

}  // namespace jmd
