// SPDX-License-Identifier: Apache-2.0
#include "jmd/eclipse.hpp"

#include "jmd/airframe.hpp"
#include "jmd/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace jmd {

namespace {

constexpr double kHalf = M_SQRT1_2;

const std::array<Complex, 4> kQpsk{{{kHalf, kHalf}, {-kHalf, kHalf}, {-kHalf, -kHalf}, {kHalf, -kHalf}}};

bool is_zero_row(const CVector& w) { return w.size() == 0 || !(w.cwiseAbs().maxCoeff() > 0.0); }

// Necessary condition for sigma_2 <= 1e-9 sigma_1: every 2 x 2 minor is at
// most sigma_1 sigma_2 <= 1e-9 |Sigma|_F^2. The loose 1e-6 threshold only
// skips matrices the SVD test would reject anyway.
bool may_be_rank_one(const CMatrix& S) {
  const double scale = 1e-6 * S.squaredNorm();
  for (Eigen::Index c1 = 0; c1 < S.cols(); ++c1)
    for (Eigen::Index c2 = c1 + 1; c2 < S.cols(); ++c2)
      for (Eigen::Index r1 = 0; r1 < S.rows(); ++r1)
        for (Eigen::Index r2 = r1 + 1; r2 < S.rows(); ++r2)
          if (std::abs(S(r1, c1) * S(r2, c2) - S(r1, c2) * S(r2, c1)) > scale) return false;
  return true;
}

// A witness for the rank <= 1 case of an all-zero jammer: one flipped entry.
CMatrix single_flip(const CMatrix& S_D) {
  CMatrix S = S_D;
  S(0, 0) = -S(0, 0);
  return S;
}

}  // namespace

const std::array<Complex, 9>& DeltaSet::values() {
  static const std::array<Complex, 9> v = [] {
    const double r = std::sqrt(2.0);
    return std::array<Complex, 9>{{{0, 0}, {r, 0}, {-r, 0}, {0, r}, {0, -r}, {r, r}, {r, -r}, {-r, r}, {-r, -r}}};
  }();
  return v;
}

double DeltaSet::membership_probability(Complex e, double tol) {
  const double r = std::sqrt(2.0);
  const bool re0 = std::abs(e.real()) <= tol, im0 = std::abs(e.imag()) <= tol;
  const bool reR = std::abs(std::abs(e.real()) - r) <= tol, imR = std::abs(std::abs(e.imag()) - r) <= tol;
  if (re0 && im0) return 1.0;
  if ((re0 && imR) || (reR && im0)) return 0.5;
  if (reR && imR) return 0.25;
  return 0.0;
}

std::array<Complex, 4> DeltaSet::reachable(Complex s) {
  std::array<Complex, 4> out;
  for (std::size_t i = 0; i < 4; ++i) out[i] = s - kQpsk[i];
  return out;
}

VirtualInterference virtual_interference(const CMatrix& S_D, const CMatrix& S_tilde_D, const CMatrix& W_D,
                                         EclipseMode mode, const std::optional<PilotPhase>& pilots) {
  if (S_D.rows() != S_tilde_D.rows() || S_D.cols() != S_tilde_D.cols() || W_D.cols() != S_D.cols())
    throw DimensionError("virtual_interference: S_D, S~_D and W_D must share the column count");
  const Eigen::Index U = S_D.rows(), I = W_D.rows(), D = S_D.cols();
  VirtualInterference v;
  v.mode = mode;
  v.Sigma.resize(U + I, D);
  v.Sigma.topRows(U) = S_D - S_tilde_D;
  if (mode == EclipseMode::PerfectCsi || !pilots) {
    v.Sigma.bottomRows(I) = W_D;
  } else {
    if (pilots->W_T.rows() != I || pilots->S_T.rows() != U || pilots->W_T.cols() != pilots->S_T.cols())
      throw DimensionError("virtual_interference: pilot-phase shapes disagree");
    v.Sigma.bottomRows(I) = W_D - pilots->W_T * (pseudoinverse(pilots->S_T) * S_tilde_D);
  }
  return v;
}

bool rank_at_most(const CMatrix& Sigma, int I, double rank_tol) {
  if (std::min(Sigma.rows(), Sigma.cols()) <= I) return true;
  const RVector sv = Eigen::JacobiSVD<CMatrix>(Sigma).singularValues();
  if (!(sv(0) > 0.0)) return true;
  return sv(I) <= rank_tol * sv(0);
}

EclipseVerdict is_eclipsed_bruteforce(const CMatrix& S_D, const CMatrix& W_D, int I, EclipseMode mode,
                                      const std::optional<PilotPhase>& pilots, double rank_tol) {
  const Eigen::Index U = S_D.rows(), D = S_D.cols();
  if (U * D > 10)
    throw std::invalid_argument("is_eclipsed_bruteforce: U*D > 10 is not enumerable; use is_eclipsed_coset");
  if (mode == EclipseMode::ChannelEst && !pilots)
    throw std::invalid_argument("is_eclipsed_bruteforce: channel-estimation mode needs the pilot phase");
  const int n = static_cast<int>(U * D);
  const CMatrix S_true = qpsk_round(S_D);
  // Pinv of S_T once, outside the 4^(U D) loop.
  std::optional<CMatrix> WTSTp;
  if (mode == EclipseMode::ChannelEst) WTSTp = pilots->W_T * pseudoinverse(pilots->S_T);

  CMatrix S_tilde(U, D);
  CMatrix Sigma(U + W_D.rows(), D);
  const long total = 1L << (2 * n);
  for (long code = 0; code < total; ++code) {
    long c = code;
    bool same = true;
    for (int i = 0; i < n; ++i, c >>= 2) {
      const Complex z = kQpsk[static_cast<std::size_t>(c & 3)];
      S_tilde(i % U, i / U) = z;
      same = same && z == S_true(i % U, i / U);
    }
    if (same) continue;
    Sigma.topRows(U) = S_true - S_tilde;
    Sigma.bottomRows(W_D.rows()) = WTSTp ? CMatrix(W_D - *WTSTp * S_tilde) : W_D;
    if (I == 1 && rank_tol <= 1e-6 && !may_be_rank_one(Sigma)) continue;
    if (rank_at_most(Sigma, I, rank_tol)) {
      EclipseVerdict v;
      v.eclipsed = true;
      v.witness = S_tilde;
      return v;
    }
  }
  return {};
}

EclipseVerdict is_eclipsed_coset(const CMatrix& S_D, const CVector& w_D, double rel_tol) {
  if (w_D.size() != S_D.cols()) throw DimensionError("is_eclipsed_coset: w_D length must equal D");
  const Eigen::Index U = S_D.rows(), D = S_D.cols();
  const double wmax = D > 0 ? w_D.cwiseAbs().maxCoeff() : 0.0;
  EclipseVerdict v;
  if (!(wmax > 0.0)) {
    v.eclipsed = true;
    v.witness = single_flip(S_D);
    v.row = 0;
    return v;
  }
  const double zero_tol = rel_tol * wmax;
  Eigen::Index first = 0;
  while (std::abs(w_D(first)) <= zero_tol) ++first;

  for (Eigen::Index u = 0; u < U; ++u) {
    for (const Complex e0 : DeltaSet::reachable(S_D(u, first))) {
      if (std::abs(e0) < 0.5) continue;  // the zero difference
      const Complex c = e0 / w_D(first);
      bool ok = true;
      for (Eigen::Index k = first + 1; k < D && ok; ++k) {
        if (std::abs(w_D(k)) <= zero_tol) continue;
        const Complex target = c * w_D(k);
        ok = false;
        for (const Complex e : DeltaSet::reachable(S_D(u, k)))
          if (std::abs(e) > 0.5 && std::abs(target - e) <= rel_tol * 2.0) {
            ok = true;
            break;
          }
      }
      if (!ok) continue;
      CMatrix S_tilde = S_D;
      for (Eigen::Index k = 0; k < D; ++k) {
        if (std::abs(w_D(k)) <= zero_tol) continue;
        // Snap to the exact reachable difference.
        const Complex target = c * w_D(k);
        Complex best = 0;
        for (const Complex e : DeltaSet::reachable(S_D(u, k)))
          if (std::abs(target - e) < std::abs(target - best)) best = e;
        S_tilde(u, k) = S_D(u, k) - best;
      }
      v.eclipsed = true;
      v.witness = std::move(S_tilde);
      v.c = c;
      v.row = static_cast<int>(u);
      return v;
    }
  }
  return v;
}

CVector effective_jammer_row(const CVector& w_D, const CVector& w_T, const CMatrix& S_T, const CMatrix& S_D) {
  if (w_T.size() != S_T.cols() || w_D.size() != S_D.cols() || S_T.rows() != S_D.rows())
    throw DimensionError("effective_jammer_row: shapes disagree");
  const CMatrix v = w_T.transpose() * pseudoinverse(S_T);  // 1 x U
  return w_D - (v * S_D).transpose();
}

double eclipse_row_probability(int w0) {
  if (w0 < 0) throw std::invalid_argument("eclipse_row_probability: w0 must be >= 0");
  if (w0 == 0) return 1.0;
  return 4.0 * (std::ldexp(1.0, -w0) - std::ldexp(1.0, -2 * w0));
}

double corollary1_prob(double q, int U) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("corollary1_prob: q must lie in [0, 1]");
  if (U < 1) throw std::invalid_argument("corollary1_prob: U must be >= 1");
  if (q == 1.0) return 1.0;
  return -std::expm1(static_cast<double>(U) * std::log1p(-q));
}

double pe_bound(int U, int w0) {
  if (w0 == 0) return 1.0;
  return corollary1_prob(eclipse_row_probability(w0), U);
}

double pe_bound_approx(int U, int w0) { return 4.0 * U * std::ldexp(1.0, -w0); }

double pe_pilot_jam_bound(int U, int D) {
  if (D < 1) throw std::invalid_argument("pe_pilot_jam_bound: D must be >= 1");
  // (2^D - 1) / (4^D - 1) = 1 / (2^D + 1)
  return corollary1_prob(1.0 / (std::ldexp(1.0, D) + 1.0), U);
}

double known_pilot_attack_prob(int D) {
  if (D < 1) throw std::invalid_argument("known_pilot_attack_prob: D must be >= 1");
  return -std::expm1(-D * std::log(4.0));
}

CVector optimal_jammer_signal(int w0, int D, double alpha_scale, RandomStream& rng) {
  if (w0 < 0 || w0 > D) throw std::invalid_argument("optimal_jammer_signal: need 0 <= w0 <= D");
  CVector w = CVector::Zero(D);
  std::vector<int> pos(static_cast<std::size_t>(D));
  std::iota(pos.begin(), pos.end(), 0);
  std::shuffle(pos.begin(), pos.end(), rng.engine());
  const std::array<Complex, 4> alphabet{{{alpha_scale, 0}, {0, alpha_scale}, {-alpha_scale, 0}, {0, -alpha_scale}}};
  for (int i = 0; i < w0; ++i) w(pos[static_cast<std::size_t>(i)]) = alphabet[static_cast<std::size_t>(rng.uniform_int(0, 3))];
  return w;
}

CVector gaussian_jammer_signal(int w0, int D, RandomStream& rng) {
  if (w0 < 0 || w0 > D) throw std::invalid_argument("gaussian_jammer_signal: need 0 <= w0 <= D");
  CVector w = CVector::Zero(D);
  std::vector<int> pos(static_cast<std::size_t>(D));
  std::iota(pos.begin(), pos.end(), 0);
  std::shuffle(pos.begin(), pos.end(), rng.engine());
  for (int i = 0; i < w0; ++i) w(pos[static_cast<std::size_t>(i)]) = rng.complex_normal();
  return w;
}

CMatrix random_qpsk(int U, int D, RandomStream& rng) {
  CMatrix S(U, D);
  for (int d = 0; d < D; ++d)
    for (int u = 0; u < U; ++u) S(u, d) = kQpsk[static_cast<std::size_t>(rng.engine()() >> 62)];
  return S;
}

McEstimate mc_eclipse_probability(int U, int D, const CVector& w_D, EclipseMode mode, long trials, RandomStream& rng,
                                  const std::optional<CVector>& w_T) {
  if (trials < 1) throw std::invalid_argument("mc_eclipse_probability: trials must be >= 1");
  if (w_D.size() != D) throw DimensionError("mc_eclipse_probability: w_D length must equal D");
  const bool pilot_jammed = mode == EclipseMode::ChannelEst && w_T && !is_zero_row(*w_T);
  McEstimate m;
  m.trials = trials;
  for (long t = 0; t < trials; ++t) {
    const CMatrix S_D = random_qpsk(U, D, rng);
    bool hit;
    if (pilot_jammed) {
      const CMatrix S_T = haar_pilots(U, U, rng);
      hit = is_eclipsed_coset(S_D, effective_jammer_row(w_D, *w_T, S_T, S_D)).eclipsed;
    } else {
      hit = is_eclipsed_coset(S_D, w_D).eclipsed;
    }
    m.hits += hit ? 1 : 0;
  }
  m.estimate = static_cast<double>(m.hits) / static_cast<double>(trials);
  m.std_error = std::sqrt(m.estimate * (1.0 - m.estimate) / static_cast<double>(trials));
  return m;
}

KnownPilotTrial known_pilot_attack_trial(int U, int D, RandomStream& rng) {
  const CMatrix S_T = haar_pilots(U, U, rng);
  KnownPilotTrial t;
  t.S_D = random_qpsk(U, D, rng);
  const CMatrix w_D = random_qpsk(1, D, rng);
  t.S_tilde_D = t.S_D;
  t.S_tilde_D.row(0) = w_D;
  if (t.S_tilde_D == t.S_D) return t;
  const CMatrix W_T = S_T.row(0);
  const VirtualInterference v =
      virtual_interference(t.S_D, t.S_tilde_D, w_D, EclipseMode::ChannelEst, PilotPhase{S_T, W_T});
  t.witness_valid = rank_at_most(v.Sigma, 1);
  return t;
}

McEstimate mc_known_pilot_attack(int U, int D, long trials, RandomStream& rng) {
  if (trials < 1) throw std::invalid_argument("mc_known_pilot_attack: trials must be >= 1");
  McEstimate m;
  m.trials = trials;
  for (long t = 0; t < trials; ++t) m.hits += known_pilot_attack_trial(U, D, rng).witness_valid ? 1 : 0;
  m.estimate = static_cast<double>(m.hits) / static_cast<double>(trials);
  m.std_error = std::sqrt(m.estimate * (1.0 - m.estimate) / static_cast<double>(trials));
  return m;
}

}  // namespace jmd
