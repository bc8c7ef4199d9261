// hermitian.hpp
// Complex Hermitian primitives shared by every per-bin update: loaded solves,
// rank-1 inverse updates, and principal eigenvectors by power iteration.

#ifndef BEAMKIT_HERMITIAN_HPP
#define BEAMKIT_HERMITIAN_HPP

#include "beamkit/common.hpp"

namespace beamkit {

inline CMat hermitize(const CMat& a) { return 0.5 * (a + a.adjoint()); }

bool is_hermitian(const CMat& a, double tol = 1e-12);

// V + delta * tr(V)/M * I. A zero-trace input falls back to delta * I so a
// zero matrix still becomes solvable.
CMat diagonal_load(const CMat& v, double delta);

// Solves V x = b for Hermitian positive definite V. Residual must come out
// below 1e-10 * ||b|| or a NumericalError is raised.
CVec solve_hermitian(const CMat& v, const CVec& b);

// diagonal_load then solve; the default matches the loading applied in front
// of every wSCM solve in the beamformers.
CVec solve_loaded(const CMat& v, const CVec& b, double delta = 1e-6);

// Given U = V^{-1}, returns the exact inverse of rho*V + (1-rho)*phi*x*x^H
// via the matrix inversion lemma:
//   U' = U/rho - (U x)(U x)^H / (rho^2/((1-rho)*phi) + rho * x^H U x)
// Requires rho in (0,1]; phi = 0 degenerates to U/rho. Throws NumericalError
// when the denominator collapses (<= 0).
CMat sm_inverse_update(const CMat& u, const CVec& x, double rho, double phi);

// Eigenvector of the largest-magnitude eigenvalue. Deterministic all-ones
// start; converged when ||R v - (v^H R v) v|| <= tol * ||R||_F. Throws on a
// degenerate leading pair (no convergence within max_iter).
CVec principal_eigenvector(const CMat& r, double tol = 1e-8, int max_iter = 100);

// Bounded-cost warm-started refinement for streaming use; never throws on
// non-convergence, returns the best iterate.
CVec refine_eigenvector(const CMat& r, const CVec& warm_start, int iters = 3);

}  // namespace beamkit

#endif  // BEAMKIT_HERMITIAN_HPP
