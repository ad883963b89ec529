// SPDX-License-Identifier: Apache-2.0
#include "jmd/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace jmd {

namespace {

// Solves G X = R for Hermitian positive definite G, refusing ill-conditioned G.
CMatrix gram_solve(const CMatrix& G, const CMatrix& R, const char* who) {
  Eigen::LLT<CMatrix> llt(G);
  if (llt.info() != Eigen::Success) {
    throw RankDeficientError(std::string(who) + ": Gram matrix is not positive definite (rank-deficient input)");
  }
  const double rcond = llt.rcond();
  if (!(rcond > 0.0) || 1.0 / rcond > kGramConditionLimit) {
    std::ostringstream msg;
    msg << who << ": Gram matrix condition estimate " << (rcond > 0.0 ? 1.0 / rcond : INFINITY)
        << " exceeds " << kGramConditionLimit << " (rank-deficient input)";
    throw RankDeficientError(msg.str());
  }
  return llt.solve(R);
}

}  // namespace

Projector Projector::identity(Eigen::Index B) { return Projector(B); }

Projector::Projector(CMatrix basis, CMatrix basis_pinv)
    : dim_(basis.rows()), basis_(std::move(basis)), basis_pinv_(std::move(basis_pinv)) {
  if (basis_pinv_.rows() != basis_.cols() || basis_pinv_.cols() != basis_.rows())
    throw DimensionError("Projector: basis and pseudoinverse shapes disagree");
}

CMatrix Projector::apply(const CMatrix& X) const {
  if (X.rows() != dim_) throw DimensionError("Projector::apply: row count mismatch");
  if (basis_.cols() == 0) return X;
  return X - basis_ * (basis_pinv_ * X);
}

CMatrix Projector::matrix() const {
  CMatrix P = CMatrix::Identity(dim_, dim_);
  if (basis_.cols() > 0) P.noalias() -= basis_ * basis_pinv_;
  return P;
}

CMatrix pseudoinverse(const CMatrix& A) {
  if (A.size() == 0) throw DimensionError("pseudoinverse: empty matrix");
  if (A.rows() >= A.cols()) {
    const CMatrix G = A.adjoint() * A;
    return gram_solve(G, A.adjoint(), "pseudoinverse");
  }
  // A^H (A A^H)^-1 = ((A A^H)^-1 A)^H
  const CMatrix G = A * A.adjoint();
  return gram_solve(G, A, "pseudoinverse").adjoint();
}

Projector orth_complement_projector(const CMatrix& Jhat) {
  if (Jhat.cols() == 0) return Projector::identity(Jhat.rows());
  if (Jhat.cols() >= Jhat.rows())
    throw RankDeficientError("orth_complement_projector: I must be smaller than B; reduce the assumed jammer rank I");
  try {
    return Projector(Jhat, pseudoinverse(Jhat));
  } catch (const RankDeficientError& e) {
    throw RankDeficientError(std::string("orth_complement_projector: jammer basis is rank-deficient; reduce the "
                                         "assumed jammer rank I (") +
                             e.what() + ")");
  }
}

CMatrix approx_svd(CMatrix E, Eigen::Index I, RandomStream& rng) {
  if (I < 1 || I > std::min(E.rows(), E.cols()))
    throw DimensionError("approx_svd: require 1 <= I <= min(B, K)");
  const Eigen::Index K = E.cols();
  CMatrix U(E.rows(), I);
  CVector x(K);
  for (Eigen::Index i = 0; i < I; ++i) {
    for (Eigen::Index k = 0; k < K; ++k) x(k) = rng.complex_normal();
    const CVector Ex = E * x;
    CVector v = E.adjoint() * Ex;
    const double vnorm = v.norm();
    if (!(vnorm > 0.0) || !std::isfinite(vnorm)) {
      throw DegenerateDirectionError("approx_svd: E^H E x vanished (input numerically zero after deflation)",
                                     U.leftCols(i));
    }
    v /= vnorm;
    CVector u = E * v;
    const double sigma = u.norm();
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw DegenerateDirectionError("approx_svd: zero singular value estimate", U.leftCols(i));
    }
    u /= sigma;
    U.col(i) = u;
    E.noalias() -= (sigma * u) * v.adjoint();
  }
  return U;
}

CMatrix exact_top_left_singular_vectors(const CMatrix& E, Eigen::Index I) {
  if (I < 0 || I > std::min(E.rows(), E.cols()))
    throw DimensionError("exact_top_left_singular_vectors: require I <= min(B, K)");
  if (!E.allFinite()) throw std::invalid_argument("exact_top_left_singular_vectors: non-finite input");
  Eigen::JacobiSVD<CMatrix> svd(E, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(I);
}

double bb_stepsize(const CMatrix& dS, const CMatrix& dG, double fallback) {
  const double curvature = (dS.array().conjugate() * dG.array()).sum().real();
  const double num = dS.squaredNorm();
  if (!(curvature > 0.0) || !std::isfinite(curvature) || !(num > 0.0)) return fallback;
  const double tau = num / curvature;
  return std::isfinite(tau) ? tau : fallback;
}

double subspace_angle(const CMatrix& U1, const CMatrix& U2) {
  if (U1.rows() != U2.rows() || U1.cols() != U2.cols())
    throw DimensionError("subspace_angle: bases must have equal shapes");
  for (const CMatrix* U : {&U1, &U2}) {
    const double dev = (U->adjoint() * (*U) - CMatrix::Identity(U->cols(), U->cols())).norm();
    if (dev > 1e-6) throw std::invalid_argument("subspace_angle: input columns are not orthonormal");
  }
  if (U1.cols() == 0) return 0.0;
  // cos(theta_max) = smallest singular value of U1^H U2,
  // sin(theta_max) = largest singular value of (I - U1 U1^H) U2.
  const RVector cosines = Eigen::JacobiSVD<CMatrix>(U1.adjoint() * U2).singularValues();
  const double c = std::clamp(cosines.minCoeff(), 0.0, 1.0);
  const CMatrix residual = U2 - U1 * (U1.adjoint() * U2);
  const double s = std::clamp(Eigen::JacobiSVD<CMatrix>(residual).singularValues()(0), 0.0, 1.0);
  // Each form is well-conditioned on its own half of [0, pi/2].
  return s < M_SQRT1_2 ? std::asin(s) : std::acos(c);
}

CMatrix orthonormalize(const CMatrix& A) {
  Eigen::HouseholderQR<CMatrix> qr(A);
  return qr.householderQ() * CMatrix::Identity(A.rows(), A.cols());
}

}  // namespace jmd
