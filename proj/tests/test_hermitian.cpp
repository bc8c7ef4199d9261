#include <doctest.h>

#include <cmath>

#include "beamkit/hermitian.hpp"
#include "beamkit/rng.hpp"
#include "oracles.hpp"

using namespace beamkit;

TEST_SUITE("hermitian") {

TEST_CASE("solve: identity and diagonal cases") {
  CVec b(2);
  b << Complex(1, 2), Complex(-3, 0.5);
  CHECK((solve_hermitian(CMat::Identity(2, 2), b) - b).norm() < 1e-14);

  CMat d = CMat::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 4.0;
  CVec rhs(2);
  rhs << 2.0, 4.0;
  const CVec x = solve_hermitian(d, rhs);
  CHECK(std::abs(x(0) - Complex(1, 0)) < 1e-14);
  CHECK(std::abs(x(1) - Complex(1, 0)) < 1e-14);
}

TEST_CASE("solve: random well-conditioned systems match Gaussian elimination") {
  Rng rng(101);
  for (int trial = 0; trial < 25; ++trial) {
    const int m = 2 + static_cast<int>(rng.raw() % 7);
    const CMat v = oracles::random_hpd(m, rng);
    const CVec b = oracles::random_cvec(m, rng);
    const CVec x = solve_hermitian(v, b);
    const CVec ref = oracles::gauss_solve(v, b);
    CHECK((x - ref).norm() < 1e-10 * ref.norm());
    CHECK((v * x - b).norm() < 1e-10 * b.norm());
  }
}

TEST_CASE("solve: rank deficiency beyond tolerance is an error") {
  Rng rng(7);
  const CVec h = oracles::random_cvec(3, rng);
  const CMat rank1 = h * h.adjoint();
  CHECK_THROWS_AS(solve_hermitian(rank1, oracles::random_cvec(3, rng)), NumericalError);
  // loading restores solvability
  CHECK_NOTHROW(solve_loaded(rank1, oracles::random_cvec(3, rng)));
}

TEST_CASE("diagonal_load") {
  Rng rng(3);
  const CMat v = oracles::random_hpd(3, rng);
  CHECK((diagonal_load(v, 0.0) - v).norm() == 0.0);
  const CMat loaded = diagonal_load(CMat::Identity(2, 2), 0.1);
  CHECK((loaded - 1.1 * CMat::Identity(2, 2)).norm() < 1e-15);
  // zero matrix falls back to absolute loading
  CHECK(diagonal_load(CMat::Zero(2, 2), 0.5)(0, 0).real() == doctest::Approx(0.5));
}

TEST_CASE("sm_inverse_update: degenerate weights") {
  Rng rng(21);
  const CMat u = oracles::random_hpd(3, rng);
  const CVec x = oracles::random_cvec(3, rng);
  CHECK((sm_inverse_update(u, x, 0.5, 0.0) - u / 0.5).norm() < 1e-14);
  CHECK((sm_inverse_update(u, x, 1.0, 0.0) - u).norm() < 1e-14);
}

TEST_CASE("sm_inverse_update: collapsed denominator is an error") {
  Rng rng(24);
  const CVec x = oracles::random_cvec(3, rng);
  // an indefinite state (corrupted inverse) drives the denominator negative
  const CMat u = -CMat::Identity(3, 3);
  CHECK_THROWS_AS(sm_inverse_update(u, x, 0.9, 1e9), NumericalError);
  CHECK_THROWS_AS(sm_inverse_update(CMat::Identity(3, 3), x, 1.5, 1.0), InvalidInput);
  CHECK_THROWS_AS(sm_inverse_update(CMat::Identity(3, 3), x, 0.5, -1.0), InvalidInput);
}

TEST_CASE("sm_inverse_update: multiply-back oracle") {
  Rng rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 2 + static_cast<int>(rng.raw() % 5);
    const CMat v = oracles::random_hpd(m, rng);
    const CMat u = v.inverse();
    const CVec x = oracles::random_cvec(m, rng);
    const double rho = 0.2 + 0.7 * rng.uniform();
    const double phi = 0.1 + rng.uniform();
    const CMat updated = sm_inverse_update(u, x, rho, phi);
    const CMat target = rho * v + (1.0 - rho) * phi * (x * x.adjoint());
    CHECK((updated * target - CMat::Identity(m, m)).norm() < 1e-8);
  }
}

TEST_CASE("sm_inverse_update: 512-step composition equals direct inversion") {
  Rng rng(23);
  const int m = 8;
  CMat v = oracles::random_hpd(m, rng);
  CMat u = v.inverse();
  for (int t = 0; t < 512; ++t) {
    const CVec x = oracles::random_cvec(m, rng);
    const double rho = 0.9 + 0.09 * rng.uniform();
    const double phi = 0.2 + rng.uniform();
    v = rho * v + (1.0 - rho) * phi * (x * x.adjoint());
    u = sm_inverse_update(u, x, rho, phi);
  }
  const CMat direct = v.inverse();
  CHECK((u - direct).norm() < 1e-6 * direct.norm());
}

TEST_CASE("principal_eigenvector: rank-1 and diagonal cases") {
  Rng rng(31);
  CVec h = oracles::random_cvec(4, rng);
  h /= h.norm();
  const CVec v1 = principal_eigenvector(h * h.adjoint());
  CHECK(std::abs(v1.dot(h)) == doctest::Approx(1.0).epsilon(1e-10));

  CMat d = CMat::Zero(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = 3.0;
  d(2, 2) = 2.0;
  const CVec v2 = principal_eigenvector(d);
  CHECK(std::abs(v2(1)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("principal_eigenvector: random Hermitian vs Jacobi oracle") {
  Rng rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 2 + static_cast<int>(rng.raw() % 5);
    // a planted dominant direction keeps the leading pair separated so the
    // iteration is guaranteed to converge
    CVec h = oracles::random_cvec(m, rng);
    h /= h.norm();
    CMat r = oracles::random_hpd(m, rng, 8.0) + 20.0 * (h * h.adjoint());
    if (trial % 3 == 0) r = 30.0 * (h * h.adjoint()) - oracles::random_hpd(m, rng, 8.0);
    const CVec v = principal_eigenvector(r, 1e-10, 500);
    const CVec ref = oracles::jacobi_leading_eigenvector(r);
    CHECK(std::abs(v.dot(ref)) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("principal_eigenvector: phase-invariant comparison and errors") {
  Rng rng(33);
  const CMat r = oracles::random_hpd(3, rng);
  const CVec v = principal_eigenvector(r);
  const CVec rotated = std::polar(1.0, 1.234) * v;
  CHECK(std::abs(v.dot(rotated)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(principal_eigenvector(CMat::Zero(3, 3)), InvalidInput);
  // degenerate +/- pair never converges
  CMat pair = CMat::Zero(2, 2);
  pair(0, 0) = 1.0;
  pair(1, 1) = -1.0;
  CHECK_THROWS_AS(principal_eigenvector(pair, 1e-12, 50), NumericalError);
}

TEST_CASE("refine_eigenvector is bounded and sane") {
  Rng rng(34);
  const CMat r = oracles::random_hpd(4, rng, 100.0);
  const CVec ref = oracles::jacobi_leading_eigenvector(r);
  CVec v = oracles::random_cvec(4, rng);
  for (int i = 0; i < 40; ++i) v = refine_eigenvector(r, v, 3);
  CHECK(std::abs(v.dot(ref)) == doctest::Approx(1.0).epsilon(1e-6));
}

}  // TEST_SUITE
