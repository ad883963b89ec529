// SPDX-License-Identifier: Apache-2.0
#include "jmd/detectors.hpp"

#include "jmd/airframe.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jmd {

namespace {

struct WidePinv {
  CMatrix pinv;  // K x U
  bool regularized = false;
};

// S^+ = S^H (S S^H)^-1 for wide S. An ill-conditioned Gram matrix gets
// 1e-12 I added for this call only.
WidePinv wide_pinv(const CMatrix& S) {
  CMatrix G = S * S.adjoint();
  Eigen::LLT<CMatrix> llt(G);
  bool regularized = false;
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1.0 / kGramConditionLimit)) {
    G.diagonal().array() += 1e-12;
    llt.compute(G);
    regularized = true;
    if (llt.info() != Eigen::Success) {
      return {S.completeOrthogonalDecomposition().pseudoInverse(), true};
    }
  }
  return {llt.solve(S).adjoint(), regularized};
}

Projector estimated_projector(const CMatrix& E, int I, RandomStream& rng, int& degenerate_count) {
  try {
    return orth_complement_projector(approx_svd(E, I, rng));
  } catch (const DegenerateDirectionError&) {
    ++degenerate_count;
    return Projector::identity(E.rows());
  } catch (const RankDeficientError&) {
    ++degenerate_count;
    return Projector::identity(E.rows());
  }
}

CMatrix hconcat(const CMatrix& A, const CMatrix& B) {
  CMatrix out(A.rows(), A.cols() + B.cols());
  out << A, B;
  return out;
}

double default_fallback(const DetectorConfig& cfg, const CMatrix& H) {
  if (cfg.fallback_step) return *cfg.fallback_step;
  const double h2 = H.squaredNorm();
  return h2 > 0.0 ? 0.1 / h2 : 1.0;
}

// Box-prior FBS on S_D with LS channel estimate H. With `fixed` set the
// projector stays constant; otherwise it is re-estimated from the residual
// each iteration (SANDMAN).
DetectorOutput box_iteration(const CMatrix& Y_T, const CMatrix& Y_D, const CMatrix& S_T, const CMatrix& H,
                             const Projector* fixed, const DetectorConfig& cfg, RandomStream* rng) {
  cfg.validate();
  const Eigen::Index U = H.cols(), D = Y_D.cols();
  const double fallback = default_fallback(cfg, H);

  DetectorOutput out;
  CMatrix S = CMatrix::Zero(U, D);
  CMatrix S_prev;
  CMatrix HS = CMatrix::Zero(Y_D.rows(), D), HS_prev;
  const CMatrix R_T = fixed ? CMatrix() : CMatrix(Y_T - H * S_T);
  CMatrix E = fixed ? CMatrix() : hconcat(Y_T, Y_D);
  std::optional<Projector> P;

  for (int t = 0; t < cfg.t_max; ++t) {
    P = fixed ? *fixed : estimated_projector(E, cfg.I, *rng, out.degenerate_iterations);

    const CMatrix PR = P->apply(Y_D - HS);
    const CMatrix grad = -2.0 * (H.adjoint() * PR);
    out.objective_trace.push_back(PR.squaredNorm() - cfg.alpha * S.squaredNorm());

    double tau = fallback;
    if (t > 0 && cfg.step_rule == StepRule::BarzilaiBorwein) {
      // Curvature pair for the current objective: grad f(S) - grad f(S_prev)
      // with both gradients taken under the current projector.
      const CMatrix dG = 2.0 * (H.adjoint() * P->apply(HS - HS_prev));
      tau = bb_stepsize(S - S_prev, dG, fallback);
    }
    S_prev = S;
    S = prox_box(S - tau * grad, tau, cfg.alpha, cfg.clip);
    HS_prev.swap(HS);
    HS.noalias() = H * S;

    if (!fixed) E = hconcat(R_T, Y_D - HS);
  }

  out.S_soft_D = S;
  out.S_hat_D = qpsk_round(S);
  out.P_hat = std::move(P);
  out.H_hat = H;
  return out;
}

// MAED-type iteration on S = [S_T, S_D] with the pilot block pinned.
DetectorOutput joint_iteration(const CMatrix& Y_T, const CMatrix& Y_D, const CMatrix& S_T, const Projector* fixed,
                               const DetectorConfig& cfg, RandomStream* rng) {
  cfg.validate();
  const Eigen::Index U = S_T.rows(), T = S_T.cols(), D = Y_D.cols(), K = T + D;
  const CMatrix Y = hconcat(Y_T, Y_D);

  DetectorOutput out;
  CMatrix S = CMatrix::Zero(U, K);
  S.leftCols(T) = S_T;

  WidePinv pinv = wide_pinv(S);
  out.regularized_iterations += pinv.regularized;
  CMatrix A = Y * pinv.pinv;  // Y S^+, the unprojected channel estimate
  CMatrix Yres = Y - A * S;   // Y (I - S^+ S)
  CMatrix E = Y;              // the first subspace estimate sees the raw frame

  CMatrix S_prev, A_prev, Yres_prev;
  std::optional<Projector> P;

  for (int t = 0; t < cfg.t_max; ++t) {
    P = fixed ? *fixed : estimated_projector(E, cfg.I, *rng, out.degenerate_iterations);

    const CMatrix PYres = P->apply(Yres);
    const CMatrix grad = -(A.adjoint() * PYres);
    out.objective_trace.push_back(PYres.squaredNorm() - cfg.alpha * S.rightCols(D).squaredNorm());

    // A carries the jammer, so the fallback is scaled by the projected estimate P A.
    const CMatrix PA = P->apply(A);
    const double fallback = default_fallback(cfg, PA);
    double tau = fallback;
    // First step: 1/(mean eigenvalue of A^H P A). With a smaller one S_D stays
    // near zero, Y S^+ S keeps only the pilot columns and a pilot-only jammer
    // vanishes from the next subspace estimate.
    if (t == 0 && !cfg.fallback_step && PA.squaredNorm() > 0.0) tau = double(U) / PA.squaredNorm();
    if (t > 0 && cfg.step_rule == StepRule::BarzilaiBorwein) {
      const CMatrix grad_prev = -(A_prev.adjoint() * P->apply(Yres_prev));
      tau = bb_stepsize(S - S_prev, grad - grad_prev, fallback);
    }
    S_prev = S;
    A_prev = A;
    Yres_prev = Yres;

    S.rightCols(D) = prox_box(S.rightCols(D) - tau * grad.rightCols(D), tau, cfg.alpha, cfg.clip);
    S.leftCols(T) = S_T;

    pinv = wide_pinv(S);
    out.regularized_iterations += pinv.regularized;
    A = Y * pinv.pinv;
    Yres = Y - A * S;
    E = Yres;
  }

  out.S_soft_D = S.rightCols(D);
  out.S_hat_D = qpsk_round(out.S_soft_D);
  out.H_hat = P ? P->apply(A) : A;
  out.P_hat = std::move(P);
  return out;
}

}  // namespace

void DetectorConfig::validate() const {
  if (t_max < 1) throw std::invalid_argument("DetectorConfig: t_max must be >= 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("DetectorConfig: alpha must be > 0");
  if (I < 1) throw std::invalid_argument("DetectorConfig: assumed jammer rank I must be >= 1");
  if (fallback_step && !(*fallback_step > 0.0)) throw std::invalid_argument("DetectorConfig: fallback step must be > 0");
}

CMatrix ls_channel_estimate(const CMatrix& Y_T, const CMatrix& S_T) {
  if (Y_T.cols() != S_T.cols()) throw DimensionError("ls_channel_estimate: Y_T and S_T column counts differ");
  if (S_T.rows() > S_T.cols()) throw RankDeficientError("ls_channel_estimate: S_T must have full row rank (T >= U)");
  return Y_T * pseudoinverse(S_T);
}

CMatrix prox_box(const CMatrix& S, double tau, double alpha, double clip) {
  if (alpha * tau < 1.0) {
    const double scale = 1.0 / (1.0 - tau * alpha);
    return S.unaryExpr([=](const Complex& z) {
      return Complex(std::clamp(z.real() * scale, -clip, clip), std::clamp(z.imag() * scale, -clip, clip));
    });
  }
  return S.unaryExpr([=](const Complex& z) {
    return Complex(z.real() < 0.0 ? -clip : clip, z.imag() < 0.0 ? -clip : clip);
  });
}

double sandman_data_term(const CMatrix& Y_D, const CMatrix& H, const Projector& P, const CMatrix& S) {
  return P.apply(Y_D - H * S).squaredNorm();
}

CMatrix sandman_gradient(const CMatrix& Y_D, const CMatrix& H, const Projector& P, const CMatrix& S) {
  return -2.0 * (H.adjoint() * P.apply(Y_D - H * S));
}

double maed_data_term(const CMatrix& Y, const Projector& P, const CMatrix& S) {
  const CMatrix Sp = pseudoinverse(S);
  return P.apply(Y - (Y * Sp) * S).squaredNorm();
}

CMatrix maed_gradient(const CMatrix& Y, const Projector& P, const CMatrix& S) {
  const CMatrix A = Y * pseudoinverse(S);
  return -(A.adjoint() * P.apply(Y - A * S));
}

DetectorOutput fbs_box_detect(const CMatrix& Y_D, const CMatrix& H_hat, const Projector& P, const DetectorConfig& cfg) {
  return box_iteration(CMatrix(), Y_D, CMatrix(), H_hat, &P, cfg, nullptr);
}

DetectorOutput sandman(const CMatrix& Y_T, const CMatrix& Y_D, const CMatrix& S_T, const DetectorConfig& cfg,
                       RandomStream& rng) {
  if (Y_T.rows() != Y_D.rows()) throw DimensionError("sandman: Y_T and Y_D row counts differ");
  const CMatrix H = ls_channel_estimate(Y_T, S_T);
  return box_iteration(Y_T, Y_D, S_T, H, nullptr, cfg, &rng);
}

DetectorOutput maed(const CMatrix& Y_T, const CMatrix& Y_D, const CMatrix& S_T, const DetectorConfig& cfg,
                    RandomStream& rng) {
  if (Y_T.rows() != Y_D.rows() || Y_T.cols() != S_T.cols()) throw DimensionError("maed: inconsistent shapes");
  return joint_iteration(Y_T, Y_D, S_T, nullptr, cfg, &rng);
}

Projector pos_subspace(const CMatrix& Y_J, int I) {
  if (Y_J.cols() < I) throw std::invalid_argument("pos_subspace: training period shorter than jammer rank (R < I)");
  return orth_complement_projector(exact_top_left_singular_vectors(Y_J, I));
}

DetectorOutput pos_box(const CMatrix& Y_J, const CMatrix& Y_T, const CMatrix& Y_D, const CMatrix& S_T,
                       const DetectorConfig& cfg) {
  const Projector P = pos_subspace(Y_J, cfg.I);
  const CMatrix PY_D = P.apply(Y_D);
  const CMatrix H = ls_channel_estimate(P.apply(Y_T), S_T);
  return box_iteration(CMatrix(), PY_D, CMatrix(), H, &P, cfg, nullptr);
}

DetectorOutput pos_jed(const CMatrix& Y_J, const CMatrix& Y_T, const CMatrix& Y_D, const CMatrix& S_T,
                       const DetectorConfig& cfg) {
  const Projector P = pos_subspace(Y_J, cfg.I);
  return joint_iteration(P.apply(Y_T), P.apply(Y_D), S_T, &P, cfg, nullptr);
}

DetectorOutput g_pos_box(const CMatrix& Y_T, const CMatrix& Y_D, const CMatrix& S_T, const CMatrix& J_true,
                         const DetectorConfig& cfg) {
  const Projector P = orth_complement_projector(J_true);
  const CMatrix H = ls_channel_estimate(Y_T, S_T);
  return box_iteration(CMatrix(), Y_D, CMatrix(), H, &P, cfg, nullptr);
}

DetectorOutput g_pos_jed(const CMatrix& Y_T, const CMatrix& Y_D, const CMatrix& S_T, const CMatrix& J_true,
                         const DetectorConfig& cfg) {
  const Projector P = orth_complement_projector(J_true);
  return joint_iteration(Y_T, Y_D, S_T, &P, cfg, nullptr);
}

DetectorOutput unmitigated_lmmse(const CMatrix& Y_T, const CMatrix& Y_D, const CMatrix& S_T, double N0) {
  if (!(N0 > 0.0)) throw std::invalid_argument("unmitigated_lmmse: N0 must be > 0");
  const CMatrix H = ls_channel_estimate(Y_T, S_T);
  CMatrix G = H.adjoint() * H;
  G.diagonal().array() += N0;
  Eigen::LLT<CMatrix> llt(G);
  if (llt.info() != Eigen::Success) throw RankDeficientError("unmitigated_lmmse: singular LMMSE normal matrix");
  DetectorOutput out;
  out.S_soft_D = llt.solve(H.adjoint() * Y_D);
  out.S_hat_D = qpsk_round(out.S_soft_D);
  out.H_hat = H;
  return out;
}

}  // namespace jmd
