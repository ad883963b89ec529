// SPDX-License-Identifier: Apache-2.0
#include "jmd/jammers.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <stdexcept>

namespace jmd {

namespace {

constexpr std::array<std::pair<JammerKind, std::string_view>, 9> kNames{{
    {JammerKind::Barrage, "barrage"},
    {JammerKind::DataOnly, "data"},
    {JammerKind::PilotOnly, "pilot"},
    {JammerKind::Sparse, "sparse"},
    {JammerKind::Distributed, "distributed"},
    {JammerKind::SlowVarying, "slow-varying"},
    {JammerKind::AbruptVarying, "abrupt-varying"},
    {JammerKind::KnownPilot, "known-pilot"},
    {JammerKind::Silent, "silent"},
}};

void fill_columns(CMatrix& W, const std::vector<int>& cols, RandomStream& rng) {
  for (int k : cols)
    for (Eigen::Index i = 0; i < W.rows(); ++i) W(i, k) = rng.complex_normal();
}

CMatrix apply_trajectory(const BeamformTrajectory& A, int I, int L, RandomStream& rng) {
  CMatrix W(I, L);
  for (int k = 0; k < L; ++k) {
    const CMatrix w_tilde = rng.complex_normal(I, 1);
    W.col(k) = A[static_cast<std::size_t>(k)] * w_tilde;
  }
  return W;
}

}  // namespace

std::string_view to_string(JammerKind kind) {
  for (const auto& [k, name] : kNames)
    if (k == kind) return name;
  return "unknown";
}

JammerKind jammer_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kNames)
    if (n == name) return k;
  std::string valid;
  for (const auto& [k, n] : kNames) valid += (valid.empty() ? "" : ", ") + std::string(n);
  throw std::invalid_argument("unknown jammer kind '" + std::string(name) + "' (valid: " + valid + ")");
}

bool is_multi_antenna_class(JammerKind kind) {
  return kind == JammerKind::Distributed || kind == JammerKind::SlowVarying || kind == JammerKind::AbruptVarying;
}

void JammerSpec::validate() const {
  if (I < 1) throw std::invalid_argument("jammer: I must be >= 1");
  if (J_count < 1 || J_count > I) throw std::invalid_argument("jammer: devices must be in [1, I]");
  if (kind == JammerKind::Distributed && I != J_count)
    throw std::invalid_argument("jammer: distributed jammers are single-antenna devices (I must equal devices)");
  if (kind == JammerKind::KnownPilot && I != 1) throw std::invalid_argument("jammer: known-pilot jammer needs I = 1");
  if (kind == JammerKind::SlowVarying && anchors < 1) throw std::invalid_argument("jammer: anchors must be >= 1");
  if (kind == JammerKind::AbruptVarying) {
    if (persistence < 0.0 || persistence > 1.0) throw std::invalid_argument("jammer: persistence must lie in [0, 1]");
    if (max_active < 1 || max_active > I) throw std::invalid_argument("jammer: max_active must lie in [1, I]");
  }
}

SlowVaryingTrajectory slow_varying_trajectory(int I, int L, int M, RandomStream& rng) {
  if (M < 1 || M > L) throw std::invalid_argument("slow_varying_trajectory: need 1 <= M <= L");
  SlowVaryingTrajectory t;
  std::vector<int> instants(static_cast<std::size_t>(L));
  std::iota(instants.begin(), instants.end(), 0);
  std::shuffle(instants.begin(), instants.end(), rng.engine());
  t.anchor_instants.assign(instants.begin(), instants.begin() + M);
  std::sort(t.anchor_instants.begin(), t.anchor_instants.end());
  for (int m = 0; m < M; ++m) t.anchors.push_back(rng.complex_normal(I, 1));

  t.A.assign(static_cast<std::size_t>(L), CMatrix::Zero(I, I));
  std::size_t m = 0;
  for (int k = 0; k < L; ++k) {
    CVector a;
    if (k <= t.anchor_instants.front()) {
      a = t.anchors.front();
    } else if (k >= t.anchor_instants.back()) {
      a = t.anchors.back();
    } else {
      while (t.anchor_instants[m + 1] < k) ++m;
      const int k0 = t.anchor_instants[m], k1 = t.anchor_instants[m + 1];
      const double lambda = static_cast<double>(k - k0) / (k1 - k0);
      a = (1.0 - lambda) * t.anchors[m] + lambda * t.anchors[m + 1];
    }
    t.A[static_cast<std::size_t>(k)].col(0) = a;
  }
  return t;
}

AbruptVaryingTrajectory abrupt_varying_trajectory(int I, int L, int max_active, double persistence,
                                                  RandomStream& rng) {
  auto draw = [&]() {
    CMatrix A = CMatrix::Zero(I, I);
    const int active = rng.uniform_int(1, max_active);
    std::vector<int> rows(static_cast<std::size_t>(I));
    std::iota(rows.begin(), rows.end(), 0);
    std::shuffle(rows.begin(), rows.end(), rng.engine());
    for (int r = 0; r < active; ++r)
      for (int c = 0; c < I; ++c) A(rows[static_cast<std::size_t>(r)], c) = rng.complex_normal();
    return A;
  };
  AbruptVaryingTrajectory t;
  t.A.reserve(static_cast<std::size_t>(L));
  t.A.push_back(draw());
  for (int k = 1; k < L; ++k) {
    const bool hold = rng.bernoulli(persistence);
    t.held.push_back(hold);
    t.A.push_back(hold ? t.A.back() : draw());
  }
  return t;
}

CMatrix gen_waveform(const JammerSpec& spec, const FrameLayout& layout, const std::optional<CVector>& known_pilot_row,
                     RandomStream& rng) {
  spec.validate();
  if (spec.I != layout.I) throw DimensionError("gen_waveform: jammer antenna count disagrees with layout");
  const int I = spec.I, L = layout.L();
  CMatrix W = CMatrix::Zero(I, L);
  switch (spec.kind) {
    case JammerKind::Barrage:
    case JammerKind::Distributed: {
      std::vector<int> all(static_cast<std::size_t>(L));
      std::iota(all.begin(), all.end(), 0);
      fill_columns(W, all, rng);
      break;
    }
    case JammerKind::DataOnly:
      fill_columns(W, layout.data_cols, rng);
      break;
    case JammerKind::PilotOnly:
      fill_columns(W, layout.pilot_cols, rng);
      break;
    case JammerKind::Sparse:
      fill_columns(W, {rng.uniform_int(0, L - 1)}, rng);
      break;
    case JammerKind::SlowVarying:
      W = apply_trajectory(slow_varying_trajectory(I, L, spec.anchors, rng).A, I, L, rng);
      break;
    case JammerKind::AbruptVarying:
      W = apply_trajectory(abrupt_varying_trajectory(I, L, spec.max_active, spec.persistence, rng).A, I, L, rng);
      break;
    case JammerKind::KnownPilot: {
      if (!known_pilot_row) throw std::invalid_argument("gen_waveform: known-pilot jammer needs the pilot row");
      if (known_pilot_row->size() != layout.T) throw DimensionError("gen_waveform: pilot row length must be T");
      for (int t = 0; t < layout.T; ++t) W(0, layout.pilot_cols[static_cast<std::size_t>(t)]) = (*known_pilot_row)(t);
      for (int k : layout.data_cols) {
        const double re = rng.bit() ? -M_SQRT1_2 : M_SQRT1_2;
        const double im = rng.bit() ? -M_SQRT1_2 : M_SQRT1_2;
        W(0, k) = Complex(re, im);
      }
      break;
    }
    case JammerKind::Silent:
      break;
  }
  return W;
}

int effective_rank_of_W(const CMatrix& W, double tol) {
  if (W.size() == 0) return 0;
  const RVector sv = Eigen::JacobiSVD<CMatrix>(W).singularValues();
  if (!(sv(0) > 0.0)) return 0;
  return static_cast<int>((sv.array() > tol * sv(0)).count());
}

}  // namespace jmd
