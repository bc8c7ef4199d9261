#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace beamkit::oracles {

std::vector<Complex> dft(const std::vector<Complex>& x) {
  const size_t n = x.size();
  std::vector<Complex> out(n, Complex(0.0, 0.0));
  for (size_t k = 0; k < n; ++k) {
    for (size_t i = 0; i < n; ++i) {
      const double ang = -2.0 * M_PI * static_cast<double>(k) * static_cast<double>(i) /
                         static_cast<double>(n);
      out[k] += x[i] * Complex(std::cos(ang), std::sin(ang));
    }
  }
  return out;
}

CVec gauss_solve(CMat a, CVec b) {
  const int n = static_cast<int>(a.rows());
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (std::abs(a(pivot, col)) < 1e-300) throw std::runtime_error("gauss_solve: singular");
    if (pivot != col) {
      a.row(pivot).swap(a.row(col));
      std::swap(b(pivot), b(col));
    }
    for (int r = col + 1; r < n; ++r) {
      const Complex f = a(r, col) / a(col, col);
      for (int c = col; c < n; ++c) a(r, c) -= f * a(col, c);
      b(r) -= f * b(col);
    }
  }
  CVec x(n);
  for (int r = n - 1; r >= 0; --r) {
    Complex acc = b(r);
    for (int c = r + 1; c < n; ++c) acc -= a(r, c) * x(c);
    x(r) = acc / a(r, r);
  }
  return x;
}

Eigen2 jacobi_hermitian(CMat a, int sweeps) {
  const int n = static_cast<int>(a.rows());
  CMat v = CMat::Identity(n, n);
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += std::norm(a(p, q));
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        // unitary 2x2 rotation zeroing the off-diagonal element
        const Complex phase = apq / std::abs(apq);
        const double tau = (aqq - app) / (2.0 * std::abs(apq));
        const double t = (tau >= 0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const Complex s = phase * (t * c);
        for (int i = 0; i < n; ++i) {
          const Complex aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - std::conj(s) * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (int i = 0; i < n; ++i) {
          const Complex api = a(p, i), aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = std::conj(s) * api + c * aqi;
        }
        for (int i = 0; i < n; ++i) {
          const Complex vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - std::conj(s) * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return a(i, i).real() < a(j, j).real(); });
  Eigen2 out;
  for (int i : order) {
    out.values.push_back(a(i, i).real());
    out.vectors.push_back(v.col(i));
  }
  return out;
}

CVec jacobi_leading_eigenvector(const CMat& a) {
  const Eigen2 e = jacobi_hermitian(a);
  size_t best = 0;
  for (size_t i = 1; i < e.values.size(); ++i)
    if (std::abs(e.values[i]) > std::abs(e.values[best])) best = i;
  return e.vectors[best];
}

double mldr_negative_log_likelihood(const CMat& y, int tau0, double floor) {
  const long t_count = y.rows();
  const long k_count = y.cols();
  double nll = 0.0;
  for (long k = 0; k < k_count; ++k) {
    for (long t = 0; t < t_count; ++t) {
      const long lo = std::max<long>(0, t - tau0);
      const long hi = std::min<long>(t_count - 1, t + tau0);
      double lambda = 0.0;
      for (long i = lo; i <= hi; ++i) lambda += std::norm(y(i, k));
      lambda /= static_cast<double>(hi - lo + 1);
      lambda = std::max(lambda, floor);
      nll += std::log(lambda) + std::norm(y(t, k)) / lambda;
    }
  }
  return nll;
}

CMat random_hpd(int m, Rng& rng, double condition) {
  CMat g(m, m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) g(r, c) = rng.normal_complex();
  // orthonormalize columns (Gram-Schmidt) for a unitary factor
  for (int c = 0; c < m; ++c) {
    for (int p = 0; p < c; ++p) g.col(c) -= g.col(p).dot(g.col(c)) * g.col(p);
    g.col(c) /= g.col(c).norm();
  }
  CMat d = CMat::Zero(m, m);
  for (int i = 0; i < m; ++i)
    d(i, i) = 1.0 + (condition - 1.0) * rng.uniform();
  return g * d * g.adjoint();
}

CVec random_cvec(int m, Rng& rng) {
  CVec v(m);
  for (int i = 0; i < m; ++i) v(i) = rng.normal_complex();
  return v;
}

}  // namespace beamkit::oracles
