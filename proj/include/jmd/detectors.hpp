// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "jmd/numerics.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace jmd {

enum class StepRule {
  BarzilaiBorwein,  ///< BB1, fallback step at t = 0 and on non-positive curvature
  Constant,         ///< always the fallback step
};

struct DetectorConfig {
  int t_max = 30;
  double alpha = 2.5;
  int I = 1;  ///< assumed jammer rank
  /// Step used at t = 0 and as the BB safeguard. Unset: 0.1 / |H_hat|_F^2.
  std::optional<double> fallback_step;
  StepRule step_rule = StepRule::BarzilaiBorwein;
  double clip = M_SQRT1_2;

  void validate() const;
};

struct DetectorOutput {
  CMatrix S_hat_D;                  ///< U x D, QPSK points
  CMatrix S_soft_D;                 ///< U x D, last iterate before rounding
  std::optional<Projector> P_hat;   ///< last projector used
  std::optional<CMatrix> H_hat;     ///< channel estimate, where the receiver forms one
  std::vector<double> objective_trace;  ///< relaxed objective at each iteration, before the update
  int degenerate_iterations = 0;    ///< approx_svd degeneracy, P = I used instead
  int regularized_iterations = 0;   ///< MAED Gram regularization applied
};

/// H_hat = Y_T S_T^+.
CMatrix ls_channel_estimate(const CMatrix& Y_T, const CMatrix& S_T);

/// Entrywise proximal operator of -alpha |s|^2 + box indicator:
/// clip(s / (1 - tau alpha); clip) when alpha tau < 1, else the nearest
/// corner of {+-clip +- i clip}.
CMatrix prox_box(const CMatrix& S, double tau, double alpha, double clip = M_SQRT1_2);

// --- Objectives and gradients (fixed projector) --------------------------

/// |P (Y_D - H S)|_F^2
double sandman_data_term(const CMatrix& Y_D, const CMatrix& H, const Projector& P, const CMatrix& S);
/// -2 H^H P (Y_D - H S)
CMatrix sandman_gradient(const CMatrix& Y_D, const CMatrix& H, const Projector& P, const CMatrix& S);

/// |P Y (I - S^+ S)|_F^2 for the full U x K matrix S = [S_T, S_D].
double maed_data_term(const CMatrix& Y, const Projector& P, const CMatrix& S);
/// -(Y S^+)^H P Y (I - S^+ S), as used by the MAED iteration.
CMatrix maed_gradient(const CMatrix& Y, const Projector& P, const CMatrix& S);

// --- Receivers -----------------------------------------------------------

/// FBS with box prior and a fixed projector, starting from S = 0. Data
/// detection engine of POS-BOX and G-POS-BOX.
DetectorOutput fbs_box_detect(const CMatrix& Y_D, const CMatrix& H_hat, const Projector& P, const DetectorConfig& cfg);

/// SANDMAN: LS channel estimate, then alternating approximate-SVD jammer
/// subspace estimation and FBS steps on the data.
DetectorOutput sandman(const CMatrix& Y_T, const CMatrix& Y_D, const CMatrix& S_T, const DetectorConfig& cfg,
                       RandomStream& rng);

/// MAED: joint channel estimation, jammer subspace estimation and data
/// detection over the full frame.
DetectorOutput maed(const CMatrix& Y_T, const CMatrix& Y_D, const CMatrix& S_T, const DetectorConfig& cfg,
                    RandomStream& rng);

/// Projector onto the complement of the I principal left singular vectors of
/// the training-period receive matrix Y_J (exact SVD). Requires R >= I.
Projector pos_subspace(const CMatrix& Y_J, int I);

/// Training-period nulling, LS channel estimate on projected pilots, FBS.
DetectorOutput pos_box(const CMatrix& Y_J, const CMatrix& Y_T, const CMatrix& Y_D, const CMatrix& S_T,
                       const DetectorConfig& cfg);
/// Training-period nulling followed by the MAED iteration with the projector fixed.
DetectorOutput pos_jed(const CMatrix& Y_J, const CMatrix& Y_T, const CMatrix& Y_D, const CMatrix& S_T,
                       const DetectorConfig& cfg);

/// SANDMAN with P fixed to I - J J^+ (ground-truth jammer channel).
DetectorOutput g_pos_box(const CMatrix& Y_T, const CMatrix& Y_D, const CMatrix& S_T, const CMatrix& J_true,
                         const DetectorConfig& cfg);
/// MAED with P fixed to I - J J^+ (ground-truth jammer channel).
DetectorOutput g_pos_jed(const CMatrix& Y_T, const CMatrix& Y_D, const CMatrix& S_T, const CMatrix& J_true,
                         const DetectorConfig& cfg);

/// Jammer-oblivious LS channel estimate + LMMSE per column. Requires N0 > 0.
DetectorOutput unmitigated_lmmse(const CMatrix& Y_T, const CMatrix& Y_D, const CMatrix& S_T, double N0);

}  // namespace jmd
