// sve.hpp
// Steering-vector estimation by covariance subtraction: SCM estimators
// driven by noise ratios or weights, subtraction and principal-eigenvector
// extraction, unit-norm / reference-phase normalization.

#ifndef BEAMKIT_SVE_HPP
#define BEAMKIT_SVE_HPP

#include <optional>
#include <string>
#include <vector>

#include "beamkit/common.hpp"
#include "beamkit/stft.hpp"

namespace beamkit {

// How the steering vector is obtained during enhancement.
enum class SveMode { Fixed, MaskOnly, Wscm, IcaLc, IcaPc, IcaHc };

bool is_ica_sve(SveMode mode);
std::string sve_mode_name(SveMode mode);
std::optional<SveMode> sve_mode_from_name(const std::string& name);

struct SteeringField {
  std::vector<CVec> h;  // per bin, length M, unit norm, reference phase aligned

  int bins() const { return static_cast<int>(h.size()); }
  int mics() const { return h.empty() ? 0 : static_cast<int>(h[0].size()); }
};

// L2-normalize and rotate so the reference-channel component is real >= 0.
CVec normalize_steering(const CVec& h, int ref_channel = 0);

// |h1^H h2| for unit vectors; 1 means identical up to global phase.
double steering_cosine(const CVec& a, const CVec& b);

// R_x,k = (1/T) sum_t xt xt^H with xt = sqrt(mask(t,k)) * x_k(t) when a mask
// is supplied. Input is the per-bin layout (K matrices of M x T).
std::vector<CMat> scm_observations(const std::vector<CMat>& xbins, const RealField* mask = nullptr);

// R_n,k = sum_t r(t,k) xt xt^H / sum_t r(t,k). Bins whose ratio sums to zero
// fall back to the plain observation SCM; fallback_bins (optional) reports
// them.
std::vector<CMat> noise_scm_from_ratio(const std::vector<CMat>& xbins, const RealField& ratio,
                                       const RealField* mask = nullptr,
                                       std::vector<int>* fallback_bins = nullptr);

// Same estimator with the weighting function in place of the ratio. A bin
// whose weights sum to zero is an error (weights are floored upstream).
std::vector<CMat> noise_scm_from_weights(const std::vector<CMat>& xbins, const RealField& phi,
                                         const RealField* mask = nullptr);

// R_s = R_x - nu * R_n; steering = principal eigenvector (largest-|eigenvalue|
// for over-subtracted, indefinite R_s), unit-normalized and phase-aligned.
CVec subtract_and_extract(const CMat& r_x, const CMat& r_n, double nu, int ref_channel = 0);

}  // namespace beamkit

#endif  // BEAMKIT_SVE_HPP
