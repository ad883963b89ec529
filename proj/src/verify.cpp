// SPDX-License-Identifier: Apache-2.0
#include "jmd/verify.hpp"

#include "jmd/airframe.hpp"
#include "jmd/detectors.hpp"
#include "jmd/eclipse.hpp"
#include "jmd/numerics.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

namespace jmd {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
const std::array<Complex, 4> kQpskPoints{
    {{M_SQRT1_2, M_SQRT1_2}, {-M_SQRT1_2, M_SQRT1_2}, {-M_SQRT1_2, -M_SQRT1_2}, {M_SQRT1_2, -M_SQRT1_2}}};
const std::array<Complex, 5> kJammerAlphabet{{{0, 0}, {kSqrt2, 0}, {0, kSqrt2}, {-kSqrt2, 0}, {0, -kSqrt2}}};

CMatrix real_gradient_fd(const std::function<double(const CMatrix&)>& f, const CMatrix& S, double h) {
  CMatrix G(S.rows(), S.cols());
  for (Eigen::Index j = 0; j < S.cols(); ++j)
    for (Eigen::Index i = 0; i < S.rows(); ++i) {
      CMatrix Sp = S, Sm = S;
      Sp(i, j) += h;
      Sm(i, j) -= h;
      const double dre = (f(Sp) - f(Sm)) / (2 * h);
      Sp(i, j) = S(i, j) + Complex(0, h);
      Sm(i, j) = S(i, j) - Complex(0, h);
      const double dim = (f(Sp) - f(Sm)) / (2 * h);
      G(i, j) = Complex(dre, dim);
    }
  return G;
}

Projector random_projector(int B, int I, RandomStream& rng) {
  return orth_complement_projector(rng.complex_normal(B, I));
}

// Objective after minimizing over rank-(B - I) projectors: the energy
// outside the I principal left singular directions.
double tail_energy(const CMatrix& M, int I) {
  const RVector sv = Eigen::JacobiSVD<CMatrix>(M).singularValues();
  double e = 0.0;
  for (Eigen::Index k = I; k < sv.size(); ++k) e += sv(k) * sv(k);
  return e;
}

template <class F>
CheckResult timed(const std::string& name, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r;
  r.name = name;
  try {
    body(r);
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

ProjectorReport check_projector_identities(int instances, std::uint64_t seed) {
  ProjectorReport rep;
  RandomStream rng(seed);
  for (int n = 0; n < instances; ++n) {
    const int B = rng.uniform_int(4, 16), I = rng.uniform_int(1, B - 1);
    const CMatrix J = rng.complex_normal(B, I);
    const Projector P = orth_complement_projector(J);
    const CMatrix M = P.matrix();
    rep.max_idempotency_err = std::max(rep.max_idempotency_err, (M * M - M).norm());
    rep.max_hermitian_err = std::max(rep.max_hermitian_err, (M - M.adjoint()).norm());
    rep.max_nulling_err = std::max(rep.max_nulling_err, P.apply(J).norm() / J.norm());
    rep.ranks_ok = rep.ranks_ok && std::abs(M.trace().real() - (B - I)) < 1e-9;
  }
  return rep;
}

GradientReport check_gradients(int instances, int B, int U, int K, std::uint64_t seed) {
  GradientReport rep;
  rep.maed_scale_min = 1e300;
  rep.maed_scale_max = -1e300;
  RandomStream rng(seed);
  const double h = 1e-5;
  for (int n = 0; n < instances; ++n) {
    const Projector P = random_projector(B, 1, rng);
    const CMatrix H = rng.complex_normal(B, U);
    const CMatrix Y_D = rng.complex_normal(B, K);
    const CMatrix S = rng.complex_normal(U, K) * M_SQRT1_2;

    const CMatrix g_s = sandman_gradient(Y_D, H, P, S);
    const CMatrix fd_s = real_gradient_fd([&](const CMatrix& X) { return sandman_data_term(Y_D, H, P, X); }, S, h);
    rep.sandman_max_rel_err = std::max(rep.sandman_max_rel_err, (g_s - fd_s).norm() / fd_s.norm());

    const CMatrix Y = rng.complex_normal(B, K);
    const CMatrix g_m = maed_gradient(Y, P, S);
    const CMatrix fd_m = real_gradient_fd([&](const CMatrix& X) { return maed_data_term(Y, P, X); }, S, h);
    const double c = (fd_m.array().conjugate() * g_m.array()).sum().real() / fd_m.squaredNorm();
    rep.maed_raw_max_rel_err = std::max(rep.maed_raw_max_rel_err, (g_m - fd_m).norm() / fd_m.norm());
    rep.maed_scale_min = std::min(rep.maed_scale_min, c);
    rep.maed_scale_max = std::max(rep.maed_scale_max, c);
    rep.maed_scaled_max_rel_err = std::max(rep.maed_scaled_max_rel_err, (g_m / c - fd_m).norm() / fd_m.norm());
  }
  return rep;
}

ConvexityReport check_convexity_and_projector(int instances, int segments, int random_projectors, int B, int U,
                                              std::uint64_t seed) {
  ConvexityReport rep;
  rep.worst_midpoint_violation = -1e300;
  rep.min_margin = 1e300;
  RandomStream rng(seed);
  const int D = U;
  for (int n = 0; n < instances; ++n) {
    const CMatrix H = rng.complex_normal(B, U);
    const Projector P = random_projector(B, 1, rng);
    const CMatrix PH = P.apply(H);
    const double lam = Eigen::SelfAdjointEigenSolver<CMatrix>(PH.adjoint() * PH).eigenvalues().minCoeff();
    const double alpha = 0.99 * lam;
    const CMatrix Y_D = rng.complex_normal(B, D);
    auto g = [&](const CMatrix& S) { return sandman_data_term(Y_D, H, P, S) - alpha * S.squaredNorm(); };
    for (int s = 0; s < segments; ++s) {
      const CMatrix a = rng.complex_normal(U, D), b = rng.complex_normal(U, D);
      const double ga = g(a), gb = g(b), gm = g(0.5 * (a + b));
      const double scale = std::max({std::abs(ga), std::abs(gb), std::abs(gm), 1.0});
      const double v = (gm - 0.5 * (ga + gb)) / scale;
      rep.worst_midpoint_violation = std::max(rep.worst_midpoint_violation, v);
      if (v > 1e-9) ++rep.midpoint_violations;
    }

    // Projector half: residual for a random relaxed S.
    const CMatrix S = rng.complex_normal(U, D) * 0.5;
    const CMatrix E = Y_D - H * S;
    const double exact = orth_complement_projector(exact_top_left_singular_vectors(E, 1)).apply(E).squaredNorm();
    double best = 1e300;
    for (int k = 0; k < random_projectors; ++k) best = std::min(best, random_projector(B, 1, rng).apply(E).squaredNorm());
    const double margin = (best - exact) / exact;
    rep.min_margin = std::min(rep.min_margin, margin);
    if (!(margin > 0.0)) ++rep.projector_losses;
  }
  return rep;
}

OracleAgreementReport check_oracle_agreement(int U, int D, bool use_symmetry) {
  OracleAgreementReport rep;
  // S_D enumeration: with symmetry, row 0 of every column is fixed to point 0.
  const int free_rows = use_symmetry ? U - 1 : U;
  const long s_count = 1L << (2 * free_rows * D);
  long w_count = 1;
  for (int k = 0; k < D; ++k) w_count *= 5;

  CMatrix S_D(U, D);
  CVector w(D);
  for (long wc = 0; wc < w_count; ++wc) {
    long c = wc;
    int first = -1;
    for (int k = 0; k < D; ++k, c /= 5) {
      w(k) = kJammerAlphabet[static_cast<std::size_t>(c % 5)];
      if (first < 0 && c % 5 != 0) first = k;
    }
    // Rotating w by i^m is a symmetry; keep the first nonzero entry at +a.
    if (use_symmetry && first >= 0 && w(first) != kJammerAlphabet[1]) continue;
    for (long sc = 0; sc < s_count; ++sc) {
      long x = sc;
      for (int k = 0; k < D; ++k)
        for (int u = 0; u < U; ++u) {
          if (use_symmetry && u == 0) {
            S_D(u, k) = kQpskPoints[0];
            continue;
          }
          S_D(u, k) = kQpskPoints[static_cast<std::size_t>(x & 3)];
          x >>= 2;
        }
      const bool a = is_eclipsed_coset(S_D, w).eclipsed;
      const bool b = is_eclipsed_bruteforce(S_D, w.transpose(), 1, EclipseMode::PerfectCsi).eclipsed;
      ++rep.instances;
      rep.eclipsed += b ? 1 : 0;
      rep.disagreements += a != b ? 1 : 0;
    }
  }
  return rep;
}

OracleAgreementReport check_channel_est_reduction(int instances, int U, int D, std::uint64_t seed) {
  OracleAgreementReport rep;
  RandomStream rng(seed);
  for (int n = 0; n < instances; ++n) {
    const CMatrix S_T = haar_pilots(U, U, rng);
    const CMatrix S_D = random_qpsk(U, D, rng);
    CVector w_D(D);
    for (int k = 0; k < D; ++k) w_D(k) = kJammerAlphabet[static_cast<std::size_t>(rng.uniform_int(0, 4))];
    CVector w_T;
    switch (n % 3) {
      case 0: w_T = CVector::Zero(U); break;
      case 1: w_T = S_T.row(rng.uniform_int(0, U - 1)).transpose(); break;  // replayed pilot
      default: w_T = rng.complex_normal(U, 1); break;
    }
    const bool a = is_eclipsed_coset(S_D, effective_jammer_row(w_D, w_T, S_T, S_D)).eclipsed;
    const bool b = is_eclipsed_bruteforce(S_D, w_D.transpose(), 1, EclipseMode::ChannelEst,
                                          PilotPhase{S_T, w_T.transpose()})
                       .eclipsed;
    ++rep.instances;
    rep.eclipsed += b ? 1 : 0;
    rep.disagreements += a != b ? 1 : 0;
  }
  return rep;
}

BoundDominanceReport check_bound_dominance(int U, int D, int max_w0, int signals_per_support, long trials,
                                           std::uint64_t seed) {
  BoundDominanceReport rep;
  rep.worst_excess = -1e300;
  for (int w0 = 1; w0 <= max_w0; ++w0) {
    const double bound = pe_bound(U, w0);
    for (int s = 0; s < signals_per_support; ++s) {
      RandomStream rng = RandomStream::derive(seed, static_cast<std::uint64_t>(w0 * 100000 + s));
      const CVector w = gaussian_jammer_signal(w0, D, rng);
      const McEstimate m = mc_eclipse_probability(U, D, w, EclipseMode::PerfectCsi, trials, rng);
      const double sigma = std::sqrt(bound * (1.0 - bound) / static_cast<double>(trials));
      const double excess = (m.estimate - bound) / std::max(sigma, 1e-300);
      rep.worst_excess = std::max(rep.worst_excess, excess);
      ++rep.signals;
      if (m.estimate > bound + 3.0 * sigma) ++rep.violations;
    }
  }
  return rep;
}

UniquenessReport check_zero_noise_uniqueness(int scenes, std::uint64_t seed, int B, int U, int D) {
  UniquenessReport rep;
  const int T = U, I = 1;
  const int n = U * D;
  for (int s = 0; s < scenes; ++s) {
    RandomStream rng = RandomStream::derive(seed, static_cast<std::uint64_t>(s));
    CMatrix H, J, S_T, S_D, W;
    for (;;) {
      H = rng.complex_normal(B, U);
      J = rng.complex_normal(B, I);
      S_T = haar_pilots(U, T, rng);
      S_D = random_qpsk(U, D, rng);
      W = rng.complex_normal(I, T + D);
      const CMatrix W_T = W.leftCols(T), W_D = W.rightCols(D);
      const bool e1 = is_eclipsed_bruteforce(S_D, W_D, I, EclipseMode::PerfectCsi).eclipsed;
      const bool e2 = is_eclipsed_bruteforce(S_D, W_D, I, EclipseMode::ChannelEst, PilotPhase{S_T, W_T}).eclipsed;
      if (!e1 && !e2) break;
      ++rep.redraws;
    }
    const CMatrix Y_T = H * S_T + J * W.leftCols(T);
    const CMatrix Y_D = H * S_D + J * W.rightCols(D);
    CMatrix Y(B, T + D);
    Y << Y_T, Y_D;
    const double y2 = Y.squaredNorm();
    const CMatrix H_ls = ls_channel_estimate(Y_T, S_T);

    CMatrix S_tilde(U, D), S_full(U, T + D);
    S_full.leftCols(T) = S_T;
    bool ok[3] = {true, true, true};
    const long total = 1L << (2 * n);
    for (long code = 0; code < total; ++code) {
      long c = code;
      for (int i = 0; i < n; ++i, c >>= 2) S_tilde(i % U, i / U) = kQpskPoints[static_cast<std::size_t>(c & 3)];
      const bool truth = (S_tilde - S_D).norm() < 1e-12;
      S_full.rightCols(D) = S_tilde;
      const CMatrix joint_res = Y - (Y * pseudoinverse(S_full)) * S_full;
      const double obj[3] = {tail_energy(Y_D - H * S_tilde, I) / y2, tail_energy(Y_D - H_ls * S_tilde, I) / y2,
                             tail_energy(joint_res, I) / y2};
      for (int k = 0; k < 3; ++k) {
        const bool zero = obj[k] <= 1e-10;
        if (truth) rep.worst_truth_ratio = std::max(rep.worst_truth_ratio, obj[k]);
        else rep.smallest_other_ratio = std::min(rep.smallest_other_ratio, obj[k]);
        if (zero != truth) ok[k] = false;
      }
    }
    for (int k = 0; k < 3; ++k) rep.failures[k] += ok[k] ? 0 : 1;
    ++rep.scenes;
  }
  return rep;
}

std::vector<CheckResult> run_verify_suite(std::uint64_t seed) {
  std::vector<CheckResult> out;
  auto fmt = [](auto&&... parts) {
    std::ostringstream ss;
    ss.precision(3);
    (ss << ... << parts);
    return ss.str();
  };

  out.push_back(timed("projector identities", [&](CheckResult& r) {
    const auto p = check_projector_identities(200, seed);
    r.pass = p.max_idempotency_err < 1e-10 && p.max_hermitian_err < 1e-10 && p.max_nulling_err < 1e-10 && p.ranks_ok;
    r.detail = fmt("|PP-P|<=", p.max_idempotency_err, " |P-P^H|<=", p.max_hermitian_err, " |PJ|/|J|<=",
                   p.max_nulling_err);
  }));
  out.push_back(timed("gradient checks", [&](CheckResult& r) {
    const auto g = check_gradients(20, 8, 2, 8, seed);
    r.pass = g.sandman_max_rel_err <= 1e-6 && g.maed_scaled_max_rel_err <= 1e-6 &&
             g.maed_scale_max - g.maed_scale_min <= 1e-6;
    r.detail = fmt("sandman rel err ", g.sandman_max_rel_err, "; maed printed = ", g.maed_scale_min,
                   " x finite difference (raw rel err ", g.maed_raw_max_rel_err, ", after factor ",
                   g.maed_scaled_max_rel_err, ")");
  }));
  out.push_back(timed("convexity threshold and SVD projector", [&](CheckResult& r) {
    const auto c = check_convexity_and_projector(20, 50, 1000, 32, 16, seed);
    r.pass = c.midpoint_violations == 0 && c.projector_losses == 0;
    r.detail = fmt("midpoint violations ", c.midpoint_violations, ", projector losses ", c.projector_losses,
                   ", min margin ", c.min_margin);
  }));
  out.push_back(timed("coset oracle vs brute force", [&](CheckResult& r) {
    long inst = 0, bad = 0;
    for (int U = 1; U <= 2; ++U)
      for (int D = 1; D <= 3; ++D) {
        const auto a = check_oracle_agreement(U, D, U * D > 4);
        inst += a.instances;
        bad += a.disagreements;
      }
    r.pass = bad == 0;
    r.detail = fmt(inst, " instances, ", bad, " disagreements");
  }));
  out.push_back(timed("channel-estimation reduction", [&](CheckResult& r) {
    const auto a = check_channel_est_reduction(300, 2, 3, seed);
    r.pass = a.disagreements == 0;
    r.detail = fmt(a.instances, " instances, ", a.eclipsed, " eclipsed, ", a.disagreements, " disagreements");
  }));
  out.push_back(timed("bound formulas", [&](CheckResult& r) {
    bool ok = pe_bound(1, 0) == 1.0 && pe_bound(7, 1) == 1.0 && std::abs(pe_bound(1, 2) - 0.75) < 1e-15 &&
              std::abs(pe_pilot_jam_bound(1, 1) - 1.0 / 3.0) < 1e-15 &&
              std::abs(corollary1_prob(0.75, 2) - 15.0 / 16.0) < 1e-15 &&
              std::abs(known_pilot_attack_prob(3) - 63.0 / 64.0) < 1e-15;
    for (int U = 1; U <= 32; ++U)
      for (int w0 = 1; w0 <= 60; ++w0) {
        ok = ok && pe_bound(U, w0 + 1) <= pe_bound(U, w0) && pe_bound(U + 1, w0) >= pe_bound(U, w0);
        ok = ok && pe_pilot_jam_bound(U, w0) <= pe_bound(U, w0);
      }
    r.pass = ok;
    r.detail = "closed forms, monotonicity, pilot-jamming bound below data bound";
  }));
  out.push_back(timed("bound dominance", [&](CheckResult& r) {
    const auto b = check_bound_dominance(4, 12, 10, 10, 2000, seed);
    r.pass = b.violations == 0;
    r.detail = fmt(b.signals, " Gaussian jammers, ", b.violations, " above bound + 3 sigma");
  }));
  out.push_back(timed("optimal jammer tightness", [&](CheckResult& r) {
    RandomStream rng = RandomStream::derive(seed, 7);
    const CVector w = optimal_jammer_signal(3, 12, kSqrt2, rng);
    const auto m = mc_eclipse_probability(4, 12, w, EclipseMode::PerfectCsi, 100000, rng);
    const double p = pe_bound(4, 3), sigma = std::sqrt(p * (1 - p) / 1e5);
    r.pass = std::abs(m.estimate - p) <= 3 * sigma;
    r.detail = fmt("estimate ", m.estimate, " vs ", p, " (3 sigma = ", 3 * sigma, ")");
  }));
  out.push_back(timed("known-pilot attack", [&](CheckResult& r) {
    r.pass = true;
    std::ostringstream d;
    for (int D = 1; D <= 3; ++D) {
      RandomStream rng = RandomStream::derive(seed, 100 + static_cast<std::uint64_t>(D));
      const auto m = mc_known_pilot_attack(2, D, 10000, rng);
      const double p = known_pilot_attack_prob(D), sigma = std::sqrt(p * (1 - p) / 1e4);
      r.pass = r.pass && std::abs(m.estimate - p) <= 3 * sigma;
      d << "D=" << D << ": " << m.estimate << " vs " << p << "; ";
    }
    r.detail = d.str();
  }));
  out.push_back(timed("zero-noise uniqueness", [&](CheckResult& r) {
    const auto u = check_zero_noise_uniqueness(20, seed);
    r.pass = u.failures[0] == 0 && u.failures[1] == 0 && u.failures[2] == 0;
    r.detail = fmt(u.scenes, " scenes; failures perfect/LS/joint ", u.failures[0], "/", u.failures[1], "/",
                   u.failures[2], "; truth <= ", u.worst_truth_ratio, ", others >= ", u.smallest_other_ratio);
  }));
  return out;
}

}  // namespace jmd
