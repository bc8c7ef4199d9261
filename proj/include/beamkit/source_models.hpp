// source_models.hpp
// Weighting functions phi_k(t) / phi_z,k(t) and time-varying-variance (TVV)
// estimators lambda_k(t) for the beamformer family. All fields are T x K,
// frame-major.

#ifndef BEAMKIT_SOURCE_MODELS_HPP
#define BEAMKIT_SOURCE_MODELS_HPP

#include <optional>
#include <string>
#include <vector>

#include "beamkit/common.hpp"
#include "beamkit/stft.hpp"

namespace beamkit {

enum class BeamformerVariant { Mpdr, MaskMvdr, Mldr, MaskMldr, MaskPMldr, MaskSMldr };

bool requires_mask(BeamformerVariant v);
// True when the weighting function depends on the beamformer output, so the
// batch solution alternates filter and weight updates.
bool is_iterative(BeamformerVariant v);
std::string variant_name(BeamformerVariant v);
std::optional<BeamformerVariant> variant_from_name(const std::string& name);

struct ModelParams {
  int tau0 = 1;                       // moving-average half width, frames
  double alpha_lambda = 1.0;          // MAP prior weight
  double phi0 = 1e6;                  // weight clipping value
  double mask_floor = 1e-2;           // online-only mask floor epsilon
  std::vector<int> excluded_channels; // skipped in the median magnitude
  double tvv_floor = 1e-10;           // absolute floor after averaging
  double mag_floor = 1e-10;           // |Y| floor inside the sparse weight
};

// Per-(t,k) median of |X_mk(t)| over the non-excluded channels; even counts
// average the two middle values.
RealField median_magnitude(const Spectrogram& spec, const std::vector<int>& excluded);

// Truncated moving average over frames: mean of rows [t-tau0, t+tau0]
// clipped to the valid range.
RealField moving_average_frames(const RealField& field, int tau0);

// lambda = movavg |Y|^2
RealField tvv_from_output(const CMat& y, int tau0, double floor);
// lambda = movavg M * medmag^2
RealField tvv_from_mask(const RealField& mask, const RealField& medmag, int tau0, double floor);
// lambda = movavg (|Y|^2 + M * medmag^2) / (alpha_lambda + 2)
RealField tvv_map(const CMat& y, const RealField& mask, const RealField& medmag, int tau0,
                  double alpha_lambda, double floor);
// lambda = movavg(M * medmag^2) / 4   (sparse Laplacian model)
RealField tvv_sparse(const RealField& mask, const RealField& medmag, int tau0, double floor);

// phi = min(1/lambda, phi0)
RealField weight_gaussian(const RealField& lambda, double phi0);
// phi = min(1/(2 sqrt(lambda) |Y|), phi0), |Y| floored before dividing
RealField weight_sparse(const RealField& lambda, const CMat& y, double phi0, double mag_floor);
// phi = 1 - M
RealField weight_mask_mvdr(const RealField& mask);
// phi_z = min(1/(2 ||z||), phi0); takes the per-(t,k) noise-output norms
RealField weight_noise_laplacian(const RealField& z_norm, double phi0);
// phi_z = 1
RealField weight_noise_gaussian(long frames, int bins);

// One round of the target weighting function for a variant, given the current
// outputs. Mask-only variants ignore y; mask may be null for Mpdr/Mldr.
RealField variant_phi(BeamformerVariant v, const CMat& y, const RealField* mask,
                      const RealField& medmag, const ModelParams& p);

}  // namespace beamkit

#endif  // BEAMKIT_SOURCE_MODELS_HPP
