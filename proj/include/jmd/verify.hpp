// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "jmd/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace jmd {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

// --- Individual checks ------------------------------------------------------

struct ProjectorReport {
  double max_idempotency_err = 0.0;  ///< |P P - P|_F
  double max_hermitian_err = 0.0;    ///< |P - P^H|_F
  double max_nulling_err = 0.0;      ///< |P J|_F / |J|_F
  bool ranks_ok = true;              ///< trace(P) = B - I
};
ProjectorReport check_projector_identities(int instances, std::uint64_t seed);

/// Central finite differences of the fixed-projector objectives.
struct GradientReport {
  double sandman_max_rel_err = 0.0;
  /// The printed MAED gradient against the real-coordinate gradient.
  double maed_raw_max_rel_err = 0.0;
  /// Least-squares factor c with printed ~ c * finite-difference gradient,
  /// smallest and largest over the instances.
  double maed_scale_min = 0.0, maed_scale_max = 0.0;
  /// Residual after removing that factor.
  double maed_scaled_max_rel_err = 0.0;
};
GradientReport check_gradients(int instances, int B, int U, int K, std::uint64_t seed);

/// Midpoint convexity of |P (Y_D - H S)|^2 - alpha |S|^2 with
/// alpha = 0.99 lambda_min(H^H P H), plus optimality of the exact-SVD projector.
struct ConvexityReport {
  double worst_midpoint_violation = 0.0;  ///< max of (g(mid) - avg) / scale, <= 0 when convex
  long midpoint_violations = 0;           ///< above the 1e-9 relative tolerance
  long projector_losses = 0;              ///< instances where a random projector did at least as well
  double min_margin = 0.0;                ///< smallest relative gap to the best random projector
};
ConvexityReport check_convexity_and_projector(int instances, int segments, int random_projectors, int B, int U,
                                              std::uint64_t seed);

/// Coset oracle against brute force over every S_D in S^{U x D} and every
/// w_D over the alphabet {0, +-a, +-ia}. With `use_symmetry` each column of
/// S_D and the first nonzero jammer symbol are fixed up to the QPSK
/// rotation group, which leaves every verdict unchanged.
struct OracleAgreementReport {
  long instances = 0;
  long disagreements = 0;
  long eclipsed = 0;
};
OracleAgreementReport check_oracle_agreement(int U, int D, bool use_symmetry);

/// The channel-estimation reduction: brute force in ChannelEst mode against
/// the coset oracle on the effective jammer row, random instances.
OracleAgreementReport check_channel_est_reduction(int instances, int U, int D, std::uint64_t seed);

struct BoundDominanceReport {
  long signals = 0;
  long violations = 0;        ///< estimate > bound + 3 sigma
  double worst_excess = 0.0;  ///< max (estimate - bound) / max(sigma, tiny)
};
/// `signals_per_support` Gaussian jammer signals for every support size 1..max_w0.
BoundDominanceReport check_bound_dominance(int U, int D, int max_w0, int signals_per_support, long trials,
                                           std::uint64_t seed);

/// Brute-force uniqueness at zero noise (B = 6, U = 2, I = 1, T = 2, D = 3
/// by default) for perfect CSI, LS channel estimate, and joint estimation.
struct UniquenessReport {
  int scenes = 0;
  int redraws = 0;             ///< scenes discarded because the jammer eclipsed
  int failures[3] = {0, 0, 0};  ///< perfect CSI, LS CSI, joint
  double worst_truth_ratio = 0.0;     ///< largest objective/|Y|^2 at the truth
  double smallest_other_ratio = 1e300;  ///< smallest objective/|Y|^2 elsewhere
};
UniquenessReport check_zero_noise_uniqueness(int scenes, std::uint64_t seed, int B = 6, int U = 2, int D = 3);

// --- Suite ------------------------------------------------------------------

/// The `verify` subcommand: every check above at moderate sizes.
std::vector<CheckResult> run_verify_suite(std::uint64_t seed);

}  // namespace jmd
