#include "beamkit/hermitian.hpp"

#include <cmath>

namespace beamkit {

bool is_hermitian(const CMat& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

CMat diagonal_load(const CMat& v, double delta) {
  if (delta < 0) throw InvalidInput("diagonal_load: delta must be >= 0");
  const int m = static_cast<int>(v.rows());
  const double tr = v.trace().real();
  const double shift = tr > 0 ? delta * tr / m : delta;
  return v + shift * CMat::Identity(m, m);
}

CVec solve_hermitian(const CMat& v, const CVec& b) {
  if (v.rows() != v.cols() || v.rows() != b.size())
    throw InvalidInput("solve_hermitian: dimension mismatch");
  Eigen::LDLT<CMat> ldlt(v);
  if (ldlt.info() != Eigen::Success)
    throw NumericalError("solve_hermitian: factorization failed");
  const Eigen::VectorXd d = ldlt.vectorD().real();
  if (d.minCoeff() <= 64.0 * 2.2e-16 * d.maxCoeff())
    throw NumericalError("solve_hermitian: matrix is singular or indefinite beyond tolerance");
  CVec x = ldlt.solve(b);
  const double bnorm = b.norm();
  if (bnorm == 0.0) return x;
  if (!x.allFinite()) throw NumericalError("solve_hermitian: non-finite solution");
  // iterative refinement, then a backward-error acceptance test: heavily
  // loaded systems (condition ~ 1/delta) cannot reach 1e-10 relative
  // residual in double precision, but a backward-stable solution can
  auto bound = [&]() { return 1e-10 * bnorm + 32.0 * 2.2e-16 * v.norm() * x.norm(); };
  for (int pass = 0; pass < 2 && (v * x - b).norm() > bound(); ++pass)
    x += ldlt.solve(b - v * x);
  if (!x.allFinite() || (v * x - b).norm() > bound())
    throw NumericalError("solve_hermitian: matrix is singular or indefinite beyond tolerance");
  return x;
}

CVec solve_loaded(const CMat& v, const CVec& b, double delta) {
  return solve_hermitian(diagonal_load(v, delta), b);
}

CMat sm_inverse_update(const CMat& u, const CVec& x, double rho, double phi) {
  if (!(rho > 0.0 && rho <= 1.0)) throw InvalidInput("sm_inverse_update: rho must be in (0,1]");
  if (phi < 0.0) throw InvalidInput("sm_inverse_update: phi must be >= 0");
  const double gain = (1.0 - rho) * phi;
  if (gain <= 0.0) return u / rho;  // rank-1 term vanishes
  const CVec ux = u * x;
  const double quad = std::real(x.dot(ux));  // x^H U x
  const double denom = rho * rho / gain + rho * quad;
  if (denom <= 0.0)
    throw NumericalError("sm_inverse_update: denominator collapsed");
  CMat out = u / rho;
  out.noalias() -= (ux * ux.adjoint()) / denom;
  return hermitize(out);
}

namespace {

CVec deterministic_start(int m, int attempt) {
  if (attempt == 0) return CVec::Ones(m) / std::sqrt(static_cast<double>(m));
  CVec v = CVec::Zero(m);
  v((attempt - 1) % m) = 1.0;
  return v;
}

}  // namespace

CVec principal_eigenvector(const CMat& r, double tol, int max_iter) {
  if (r.rows() != r.cols()) throw InvalidInput("principal_eigenvector: matrix not square");
  const int m = static_cast<int>(r.rows());
  const double rnorm = r.norm();
  if (rnorm == 0.0) throw InvalidInput("principal_eigenvector: zero matrix");

  CVec v = deterministic_start(m, 0);
  int restarts = 0;
  for (int it = 0; it < max_iter; ++it) {
    CVec w = r * v;
    const double wn = w.norm();
    if (wn < 1e-14 * rnorm) {
      // start vector fell in the null space; move to the next basis vector
      if (++restarts > m) throw NumericalError("principal_eigenvector: no usable start vector");
      v = deterministic_start(m, restarts);
      continue;
    }
    v = w / wn;
    const Complex rayleigh = v.dot(r * v);
    if ((r * v - rayleigh * v).norm() <= tol * rnorm) return v;
  }
  throw NumericalError("principal_eigenvector: no convergence (degenerate leading pair?)");
}

CVec refine_eigenvector(const CMat& r, const CVec& warm_start, int iters) {
  CVec v = warm_start;
  const double vn = v.norm();
  if (vn == 0.0 || !v.allFinite())
    v = deterministic_start(static_cast<int>(r.rows()), 0);
  else
    v /= vn;
  for (int it = 0; it < iters; ++it) {
    CVec w = r * v;
    const double wn = w.norm();
    if (wn < 1e-300) break;
    v = w / wn;
  }
  return v;
}

}  // namespace beamkit
