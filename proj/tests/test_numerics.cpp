#include "jmd/numerics.hpp"

#include <doctest.h>

#include <cmath>

using namespace jmd;

namespace {

CMatrix random_unitary(int n, RandomStream& rng) { return orthonormalize(rng.complex_normal(n, n)); }

}  // namespace

TEST_CASE("pseudoinverse closed forms") {
  RandomStream rng(11);
  SUBCASE("identity") { CHECK((pseudoinverse(CMatrix::Identity(3, 3)) - CMatrix::Identity(3, 3)).norm() < 1e-14); }
  SUBCASE("column vector") {
    const CMatrix v = rng.complex_normal(5, 1);
    const CMatrix vp = pseudoinverse(v);
    CHECK((vp - v.adjoint() / v.squaredNorm()).norm() < 1e-14);
    CHECK(std::abs((vp * v)(0, 0) - 1.0) < 1e-14);
  }
  SUBCASE("tall and wide satisfy the Moore-Penrose identities") {
    for (const auto& [r, c] : {std::pair{4, 2}, std::pair{2, 7}}) {
      const CMatrix A = rng.complex_normal(r, c);
      const CMatrix Ap = pseudoinverse(A);
      CHECK((A * Ap * A - A).norm() < 1e-10);
      CHECK((Ap * A * Ap - Ap).norm() < 1e-10);
      CHECK(((A * Ap).adjoint() - A * Ap).norm() < 1e-10);
      CHECK(((Ap * A).adjoint() - Ap * A).norm() < 1e-10);
    }
    const CMatrix A = rng.complex_normal(4, 2);
    CHECK((pseudoinverse(A) * A - CMatrix::Identity(2, 2)).norm() < 1e-10);
  }
  SUBCASE("rank deficiency raises") {
    CMatrix A = rng.complex_normal(4, 2);
    A.col(1) = A.col(0);
    CHECK_THROWS_AS(pseudoinverse(A), RankDeficientError);
  }
}

TEST_CASE("orth_complement_projector") {
  RandomStream rng(12);
  SUBCASE("axis") {
    const CMatrix e1 = CMatrix::Identity(3, 1);
    CMatrix expect = CMatrix::Identity(3, 3);
    expect(0, 0) = 0;
    CHECK((orth_complement_projector(e1).matrix() - expect).norm() < 1e-15);
  }
  SUBCASE("orthonormal basis") {
    const CMatrix Q = orthonormalize(rng.complex_normal(7, 3));
    const CMatrix P = orth_complement_projector(Q).matrix();
    CHECK((P - (CMatrix::Identity(7, 7) - Q * Q.adjoint())).norm() < 1e-12);
    CHECK(std::abs(P.trace().real() - 4.0) < 1e-10);
  }
  SUBCASE("property: projector identities over random J") {
    for (int n = 0; n < 200; ++n) {
      const int B = rng.uniform_int(2, 12), I = rng.uniform_int(1, B - 1);
      const CMatrix J = rng.complex_normal(B, I);
      const Projector P = orth_complement_projector(J);
      const CMatrix M = P.matrix();
      CHECK((M * M - M).norm() <= 1e-10 * M.norm());
      CHECK((M - M.adjoint()).norm() <= 1e-10 * M.norm());
      CHECK(std::abs(M.trace().real() - (B - I)) < 1e-8);
      CHECK(P.apply(J).norm() < 1e-10 * J.norm());
      const CMatrix X = rng.complex_normal(B, 3);
      CHECK((P.apply(X) - M * X).norm() < 1e-10 * X.norm());
    }
  }
  SUBCASE("B=6, I=2") {
    const CMatrix J = rng.complex_normal(6, 2);
    CHECK(orth_complement_projector(J).apply(J).norm() < 1e-10);
  }
  SUBCASE("I >= B is rejected") { CHECK_THROWS(orth_complement_projector(rng.complex_normal(3, 3))); }
  SUBCASE("identity projector") {
    const Projector P = Projector::identity(4);
    CHECK(P.rank_nulled() == 0);
    CHECK((P.matrix() - CMatrix::Identity(4, 4)).norm() == 0.0);
  }
}

TEST_CASE("approx_svd") {
  RandomStream rng(13);
  SUBCASE("rank one input is recovered up to phase") {
    const CMatrix u = orthonormalize(rng.complex_normal(8, 1));
    const CMatrix v = orthonormalize(rng.complex_normal(20, 1));
    const CMatrix E = 3.0 * u * v.adjoint();
    const CMatrix out = approx_svd(E, 1, rng);
    CHECK(std::abs((u.adjoint() * out)(0, 0)) > 1 - 1e-8);
  }
  SUBCASE("zero input is degenerate") {
    CHECK_THROWS_AS(approx_svd(CMatrix::Zero(5, 7), 1, rng), DegenerateDirectionError);
    try {
      approx_svd(CMatrix::Zero(5, 7), 2, rng);
      FAIL("expected a degenerate direction");
    } catch (const DegenerateDirectionError& e) {
      CHECK(e.partial().cols() == 0);
    }
  }
  SUBCASE("well separated spectrum, I = 2") {
    const CMatrix Uo = random_unitary(10, rng), Vo = random_unitary(30, rng);
    CMatrix Sig = CMatrix::Zero(10, 30);
    Sig(0, 0) = 10;
    Sig(1, 1) = 1;
    const CMatrix E = Uo * Sig * Vo.adjoint() + 0.01 * rng.complex_normal(10, 30);
    const CMatrix approx = orthonormalize(approx_svd(E, 2, rng));
    const CMatrix exact = exact_top_left_singular_vectors(E, 2);
    CHECK(subspace_angle(approx, exact) < 0.15);
  }
  SUBCASE("property: exact rank-I input spans the true column space") {
    for (int n = 0; n < 50; ++n) {
      const int B = rng.uniform_int(4, 16), I = rng.uniform_int(1, 3);
      const CMatrix A = rng.complex_normal(B, I);
      const CMatrix E = A * rng.complex_normal(I, 40);
      const CMatrix approx = orthonormalize(approx_svd(E, I, rng));
      CHECK(subspace_angle(approx, orthonormalize(A)) < 1e-6);
    }
  }
  SUBCASE("property: exact SVD projector never loses to the approximation") {
    for (int n = 0; n < 100; ++n) {
      const CMatrix E = rng.complex_normal(8, 10);
      const int I = rng.uniform_int(1, 3);
      const double exact = orth_complement_projector(exact_top_left_singular_vectors(E, I)).apply(E).norm();
      const double approx = orth_complement_projector(approx_svd(E, I, rng)).apply(E).norm();
      CHECK(exact <= approx * (1 + 1e-12));
    }
  }
}

TEST_CASE("exact_top_left_singular_vectors") {
  CMatrix E = CMatrix::Zero(3, 4);
  E(0, 0) = 3;
  E(1, 1) = 1;
  const CMatrix u = exact_top_left_singular_vectors(E, 1);
  CHECK(std::abs(std::abs(u(0, 0)) - 1.0) < 1e-12);
  CHECK(std::abs(u(1, 0)) < 1e-12);
}

TEST_CASE("bb_stepsize") {
  RandomStream rng(14);
  const CMatrix dS = rng.complex_normal(3, 4);
  CHECK(bb_stepsize(dS, 2.5 * dS, 9.0) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(bb_stepsize(dS, -dS, 9.0) == 9.0);
  CHECK(bb_stepsize(dS, CMatrix::Zero(3, 4), 9.0) == 9.0);
  CHECK(bb_stepsize(CMatrix::Zero(3, 4), dS, 9.0) == 9.0);

  // f(S) = |A (S - S*)|^2 has gradient 2 A^H A (S - S*).
  const CMatrix A = rng.complex_normal(5, 3);
  const CMatrix S0 = rng.complex_normal(3, 4), S1 = rng.complex_normal(3, 4), Sstar = rng.complex_normal(3, 4);
  auto grad = [&](const CMatrix& S) { return CMatrix(2.0 * A.adjoint() * A * (S - Sstar)); };
  const CMatrix d = S1 - S0;
  const double hand = d.squaredNorm() / (d.array().conjugate() * (2.0 * A.adjoint() * A * d).array()).sum().real();
  CHECK(bb_stepsize(d, grad(S1) - grad(S0), 1.0) == doctest::Approx(hand).epsilon(1e-12));
}

TEST_CASE("subspace_angle") {
  RandomStream rng(15);
  const CMatrix Q = orthonormalize(rng.complex_normal(6, 2));
  CHECK(subspace_angle(Q, Q) < 1e-7);
  const CMatrix e1 = CMatrix::Identity(4, 1);
  CMatrix e2 = CMatrix::Zero(4, 1);
  e2(1, 0) = 1;
  CHECK(subspace_angle(e1, e2) == doctest::Approx(M_PI / 2).epsilon(1e-12));
  for (double theta : {1e-6, 0.3, 1.2, 1.5}) {
    CMatrix r = CMatrix::Zero(4, 1);
    r(0, 0) = std::cos(theta);
    r(1, 0) = std::sin(theta);
    CHECK(std::abs(subspace_angle(e1, r) - theta) < 1e-9);
  }
  CHECK_THROWS(subspace_angle(rng.complex_normal(4, 1), e1));
}

TEST_CASE("random stream") {
  RandomStream a = RandomStream::derive(5, 3, 1), b = RandomStream::derive(5, 3, 1), c = RandomStream::derive(5, 3, 2);
  CHECK(a.engine()() == b.engine()());
  CHECK(RandomStream::derive(5, 3, 1).engine()() != c.engine()());
  RandomStream r(16);
  double m2 = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) m2 += std::norm(r.complex_normal());
  CHECK(m2 / n == doctest::Approx(1.0).epsilon(0.05));
}
