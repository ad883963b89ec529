// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "jmd/airframe.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace jmd {

enum class JammerKind {
  Barrage,        ///< (1) Gaussian noise over the whole frame
  DataOnly,       ///< (2) data phase only
  PilotOnly,      ///< (3) pilot phase only
  Sparse,         ///< (4) one random column per frame
  Distributed,    ///< (5) I independent single-antenna devices
  SlowVarying,    ///< (6) interpolated rank-one beamformer
  AbruptVarying,  ///< (7) random antenna subsets, redrawn with prob. 1 - persistence
  KnownPilot,     ///< replays a UE pilot row, QPSK data
  Silent,
};

std::string_view to_string(JammerKind kind);
/// Accepts the names printed by to_string(). Throws std::invalid_argument.
JammerKind jammer_kind_from_string(std::string_view name);
/// Barrage through Distributed (plus KnownPilot) are single-antenna classes.
bool is_multi_antenna_class(JammerKind kind);

struct JammerSpec {
  JammerKind kind = JammerKind::Barrage;
  int I = 1;                 ///< total jammer antennas
  int J_count = 1;           ///< devices
  double rho_db = 30.0;
  int anchors = 5;           ///< SlowVarying: M
  double persistence = 0.95; ///< AbruptVarying: P(A_{k+1} = A_k)
  int max_active = 2;        ///< AbruptVarying: subset size drawn from {1..max_active}

  /// Throws std::invalid_argument on inconsistent fields.
  void validate() const;
};

/// A_1..A_L, each I x I.
using BeamformTrajectory = std::vector<CMatrix>;

struct SlowVaryingTrajectory {
  std::vector<int> anchor_instants;  ///< sorted 0-based column indices k_1 < ... < k_M
  std::vector<CVector> anchors;      ///< a^(1) .. a^(M)
  BeamformTrajectory A;              ///< only column 0 nonzero
};

/// Anchors a^(m) ~ CN(0, I_I) at M sorted instants drawn without
/// replacement; column 0 of A_k interpolates linearly between neighbouring
/// anchors and holds the nearest anchor outside [k_1, k_M].
SlowVaryingTrajectory slow_varying_trajectory(int I, int L, int M, RandomStream& rng);

struct AbruptVaryingTrajectory {
  BeamformTrajectory A;
  std::vector<bool> held;  ///< held[k] is true when A_{k+1} = A_k, size L - 1
};

/// Rows of A_k are a random subset (size uniform in {1..max_active}) filled
/// with CN(0,1); A_{k+1} = A_k with probability `persistence`, otherwise redrawn.
AbruptVaryingTrajectory abrupt_varying_trajectory(int I, int L, int max_active, double persistence,
                                                  RandomStream& rng);

/// Jammer transmit matrix W (I x L) before rho scaling.
/// KnownPilot needs the pilot row it replays.
CMatrix gen_waveform(const JammerSpec& spec, const FrameLayout& layout, const std::optional<CVector>& known_pilot_row,
                     RandomStream& rng);

/// Number of singular values above tol * sigma_max.
int effective_rank_of_W(const CMatrix& W, double tol = 1e-10);

}  // namespace jmd
