// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "jmd/types.hpp"

namespace jmd {

/// Raised by approx_svd when the (deflated) input has no energy left.
/// `partial()` holds the directions found before the degeneracy.
class DegenerateDirectionError : public std::runtime_error {
 public:
  DegenerateDirectionError(const std::string& what, CMatrix partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const CMatrix& partial() const { return partial_; }

 private:
  CMatrix partial_;
};

/// Orthogonal projection onto col(J)^perp, P = I - J J^+.
///
/// The B x B matrix is never formed on the hot path: apply() costs
/// O(B * I * cols), which keeps the detectors linear in B.
class Projector {
 public:
  /// P = I_B (nothing nulled).
  static Projector identity(Eigen::Index B);

  /// Builds P from a full-column-rank basis and its pseudoinverse.
  Projector(CMatrix basis, CMatrix basis_pinv);

  Eigen::Index dim() const { return dim_; }
  Eigen::Index rank_nulled() const { return basis_.cols(); }
  const CMatrix& basis() const { return basis_; }

  /// P * X
  CMatrix apply(const CMatrix& X) const;
  /// Dense B x B matrix.
  CMatrix matrix() const;

 private:
  Projector(Eigen::Index B) : dim_(B), basis_(B, 0), basis_pinv_(0, B) {}

  Eigen::Index dim_;
  CMatrix basis_;
  CMatrix basis_pinv_;
};

/// Condition threshold above which a Gram matrix is treated as singular.
inline constexpr double kGramConditionLimit = 1e12;

/// Moore-Penrose pseudoinverse of a full-rank matrix via the closed forms
/// (A^H A)^-1 A^H (tall) and A^H (A A^H)^-1 (wide). Throws
/// RankDeficientError when the Gram matrix condition estimate exceeds 1e12.
CMatrix pseudoinverse(const CMatrix& A);

/// I_B - J J^+. Throws RankDeficientError if J has dependent columns.
Projector orth_complement_projector(const CMatrix& Jhat);

/// One power iteration per dimension with deflation:
///   x ~ CN(0, I_K), x' = E^H E x, v = x'/|x'|, sigma = |E v|,
///   u = E v / sigma, E <- E - sigma u v^H.
/// Returns [u_1, ..., u_I] (unit-norm columns, not necessarily orthogonal).
CMatrix approx_svd(CMatrix E, Eigen::Index I, RandomStream& rng);

/// Left singular vectors of the I largest singular values (exact SVD).
CMatrix exact_top_left_singular_vectors(const CMatrix& E, Eigen::Index I);

/// BB1 step |dS|_F^2 / Re<dS, dG>, or `fallback` when the curvature
/// Re<dS, dG> is not positive (or not finite).
double bb_stepsize(const CMatrix& dS, const CMatrix& dG, double fallback);

/// Largest principal angle in [0, pi/2] between two orthonormal bases.
double subspace_angle(const CMatrix& U1, const CMatrix& U2);

/// Orthonormal basis from thin Householder QR.
CMatrix orthonormalize(const CMatrix& A);

}  // namespace jmd
