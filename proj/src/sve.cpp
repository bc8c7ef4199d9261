#include "beamkit/sve.hpp"

#include <cmath>

#include "beamkit/hermitian.hpp"
#include "beamkit/parallel.hpp"

namespace beamkit {

bool is_ica_sve(SveMode mode) {
  return mode == SveMode::IcaLc || mode == SveMode::IcaPc || mode == SveMode::IcaHc;
}

std::string sve_mode_name(SveMode mode) {
  switch (mode) {
    case SveMode::Fixed: return "fixed";
    case SveMode::MaskOnly: return "mask_only";
    case SveMode::Wscm: return "wscm";
    case SveMode::IcaLc: return "ica_lc";
    case SveMode::IcaPc: return "ica_pc";
    case SveMode::IcaHc: return "ica_hc";
  }
  return "?";
}

std::optional<SveMode> sve_mode_from_name(const std::string& name) {
  for (SveMode m : {SveMode::Fixed, SveMode::MaskOnly, SveMode::Wscm, SveMode::IcaLc,
                    SveMode::IcaPc, SveMode::IcaHc})
    if (sve_mode_name(m) == name) return m;
  return std::nullopt;
}

CVec normalize_steering(const CVec& h, int ref_channel) {
  const double n = h.norm();
  if (n == 0.0 || !h.allFinite()) throw NumericalError("normalize_steering: degenerate vector");
  CVec out = h / n;
  const Complex ref = out(ref_channel);
  if (std::abs(ref) > 0.0) out *= std::conj(ref) / std::abs(ref);
  return out;
}

double steering_cosine(const CVec& a, const CVec& b) { return std::abs(a.dot(b)); }

namespace {

// Accumulates sum_t r(t) xt xt^H over the columns of an M x T bin matrix.
CMat weighted_outer_sum(const CMat& xk, const RealField& weights, int k, const RealField* mask) {
  const int m = static_cast<int>(xk.rows());
  const long t_count = xk.cols();
  CMat acc = CMat::Zero(m, m);
  for (long t = 0; t < t_count; ++t) {
    double w = weights(t, k);
    if (mask) w *= (*mask)(t, k);  // sqrt(M)*x per side of the outer product
    if (w != 0.0) acc.noalias() += w * (xk.col(t) * xk.col(t).adjoint());
  }
  return acc;
}

}  // namespace

std::vector<CMat> scm_observations(const std::vector<CMat>& xbins, const RealField* mask) {
  const int k_count = static_cast<int>(xbins.size());
  if (k_count == 0) throw InvalidInput("scm_observations: no bins");
  const long t_count = xbins[0].cols();
  if (t_count == 0) throw InvalidInput("scm_observations: no frames");
  const RealField ones = RealField::Ones(t_count, k_count);
  std::vector<CMat> out(k_count);
  parallel_for(k_count, [&](int k) {
    out[k] = weighted_outer_sum(xbins[k], ones, k, mask) / static_cast<double>(t_count);
  });
  return out;
}

std::vector<CMat> noise_scm_from_ratio(const std::vector<CMat>& xbins, const RealField& ratio,
                                       const RealField* mask, std::vector<int>* fallback_bins) {
  const int k_count = static_cast<int>(xbins.size());
  if (ratio.minCoeff() < 0.0 || ratio.maxCoeff() > 1.0)
    throw InvalidInput("noise_scm_from_ratio: ratio outside [0,1]");
  std::vector<CMat> out(k_count);
  std::vector<char> fell(k_count, 0);
  parallel_for(k_count, [&](int k) {
    const double rsum = ratio.col(k).sum();
    if (rsum > 0.0) {
      out[k] = weighted_outer_sum(xbins[k], ratio, k, mask) / rsum;
    } else {
      const long t_count = xbins[k].cols();
      const RealField ones = RealField::Ones(ratio.rows(), ratio.cols());
      out[k] = weighted_outer_sum(xbins[k], ones, k, mask) / static_cast<double>(t_count);
      fell[k] = 1;
    }
  });
  if (fallback_bins) {
    fallback_bins->clear();
    for (int k = 0; k < k_count; ++k)
      if (fell[k]) fallback_bins->push_back(k);
  }
  return out;
}

std::vector<CMat> noise_scm_from_weights(const std::vector<CMat>& xbins, const RealField& phi,
                                         const RealField* mask) {
  const int k_count = static_cast<int>(xbins.size());
  if (phi.minCoeff() < 0.0) throw InvalidInput("noise_scm_from_weights: negative weights");
  std::vector<CMat> out(k_count);
  parallel_for(k_count, [&](int k) {
    const double wsum = phi.col(k).sum();
    if (wsum <= 0.0) throw NumericalError("noise_scm_from_weights: weights sum to zero in a bin");
    out[k] = weighted_outer_sum(xbins[k], phi, k, mask) / wsum;
  });
  return out;
}

CVec subtract_and_extract(const CMat& r_x, const CMat& r_n, double nu, int ref_channel) {
  if (nu < 0.0 || nu > 1.0) throw InvalidInput("subtract_and_extract: nu must be in [0,1]");
  const CMat r_s = r_x - nu * r_n;
  return normalize_steering(principal_eigenvector(r_s), ref_channel);
}

}  // namespace beamkit
