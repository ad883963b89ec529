// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "jmd/types.hpp"

#include <array>
#include <optional>

namespace jmd {

enum class EclipseMode {
  PerfectCsi,  ///< Sigma = [S_D - S~_D; W_D]
  ChannelEst,  ///< Sigma = [S_D - S~_D; W_D - W_T S_T^+ S~_D]
};

/// Differences s - s~ between unit-power QPSK points.
struct DeltaSet {
  /// The 9 distinct values: 0, the axis points +-sqrt2, +-i sqrt2 and the
  /// corners sqrt2 (+-1 +-i).
  static const std::array<Complex, 9>& values();
  /// P(e in s - S) for s uniform on S: 1 for 0, 1/2 on the axes, 1/4 at the corners.
  static double membership_probability(Complex e, double tol = 1e-9);
  /// The 4 differences reachable from s (including 0).
  static std::array<Complex, 4> reachable(Complex s);
};

/// Pilot-phase inputs for the channel-estimation variant.
struct PilotPhase {
  CMatrix S_T;  ///< U x T, full row rank
  CMatrix W_T;  ///< I x T
};

struct VirtualInterference {
  CMatrix Sigma;  ///< (U + I) x D
  EclipseMode mode = EclipseMode::PerfectCsi;
};

VirtualInterference virtual_interference(const CMatrix& S_D, const CMatrix& S_tilde_D, const CMatrix& W_D,
                                         EclipseMode mode, const std::optional<PilotPhase>& pilots = std::nullopt);

/// rank(Sigma) <= I, declared when sigma_{I+1} <= rank_tol * sigma_1.
bool rank_at_most(const CMatrix& Sigma, int I, double rank_tol = 1e-9);

struct EclipseVerdict {
  bool eclipsed = false;
  std::optional<CMatrix> witness;  ///< S~_D != S_D with rank(Sigma) <= I
  std::optional<Complex> c;        ///< coset oracle: e_u = c w_D
  int row = -1;                    ///< coset oracle: the UE row carrying the error
};

/// Enumerates all S~_D in S^{U x D} \ {S_D}. Throws std::invalid_argument
/// when U * D > 10; use is_eclipsed_coset for larger single-antenna cases.
EclipseVerdict is_eclipsed_bruteforce(const CMatrix& S_D, const CMatrix& W_D, int I, EclipseMode mode,
                                      const std::optional<PilotPhase>& pilots = std::nullopt, double rank_tol = 1e-9);

/// Single-antenna jammer oracle: eclipsed iff some row u admits c != 0
/// with c w_k in s_{u,k} - S for every k. Cost O(U * D).
EclipseVerdict is_eclipsed_coset(const CMatrix& S_D, const CVector& w_D, double rel_tol = 1e-9);

/// With an active pilot phase, Sigma's jammer row can be reduced by row
/// operations to w_D - w_T S_T^+ S_D, which turns the channel-estimation
/// question into the perfect-CSI one for this effective jammer.
CVector effective_jammer_row(const CVector& w_D, const CVector& w_T, const CMatrix& S_T, const CMatrix& S_D);

/// q(w0) = (2^w0 - 1) / 4^(w0 - 1), the probability that one UE row is
/// eclipsed by an optimal jammer with w0 nonzero symbols.
double eclipse_row_probability(int w0);
/// 1 if w0 = 0, else 1 - (1 - q(w0))^U.
double pe_bound(int U, int w0);
/// 4 U 2^-w0.
double pe_bound_approx(int U, int w0);
/// 1 - (1 - (2^D - 1) / (4^D - 1))^U.
double pe_pilot_jam_bound(int U, int D);
/// 1 - (1 - q)^U.
double corollary1_prob(double q, int U);
/// 1 - 4^-D.
double known_pilot_attack_prob(int D);

/// w0 nonzero entries from {a, ia, -a, -ia} at uniformly chosen positions.
CVector optimal_jammer_signal(int w0, int D, double alpha_scale, RandomStream& rng);

/// Gaussian entries on w0 uniformly chosen positions.
CVector gaussian_jammer_signal(int w0, int D, RandomStream& rng);

/// Uniform QPSK U x D matrix.
CMatrix random_qpsk(int U, int D, RandomStream& rng);

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  long trials = 0;
  long hits = 0;
};

/// Frequency with which w_D is eclipsed over uniform S_D. In ChannelEst
/// mode each trial also draws Haar pilots; `w_T` (default: zero) is the
/// jammer's pilot-phase signal.
McEstimate mc_eclipse_probability(int U, int D, const CVector& w_D, EclipseMode mode, long trials, RandomStream& rng,
                                  const std::optional<CVector>& w_T = std::nullopt);

struct KnownPilotTrial {
  bool witness_valid = false;  ///< S~_D != S_D and rank(Sigma) <= 1
  CMatrix S_D, S_tilde_D;
};

/// One frame of the known-pilot attack: Haar S_T, uniform S_D, jammer
/// replaying pilot row 0 and sending uniform QPSK data. The witness is S_D
/// with row 0 replaced by w_D.
KnownPilotTrial known_pilot_attack_trial(int U, int D, RandomStream& rng);

McEstimate mc_known_pilot_attack(int U, int D, long trials, RandomStream& rng);

}  // namespace jmd
