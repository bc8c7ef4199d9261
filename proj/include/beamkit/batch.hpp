// batch.hpp
// Batch wSCM accumulation and distortionless filtering, plus the alternating
// filter/weight loop for the iterative variants and the non-ICA
// steering-estimation drivers.

#ifndef BEAMKIT_BATCH_HPP
#define BEAMKIT_BATCH_HPP

#include <optional>
#include <vector>

#include "beamkit/source_models.hpp"
#include "beamkit/stft.hpp"
#include "beamkit/sve.hpp"

namespace beamkit {

struct WscmStack {
  std::vector<CMat> v;  // per bin, M x M Hermitian
};

struct BeamformerFilterField {
  std::vector<CVec> w;  // per bin, length M
};

// V_k = (1/T) sum_t phi(t,k) x_k(t) x_k(t)^H
WscmStack accumulate_wscm(const std::vector<CMat>& xbins, const RealField& phi);

// w = V^{-1} h / (h^H V^{-1} h), diagonal loading applied before the solve.
CVec distortionless_filter(const CMat& v, const CVec& h, double load_delta = 1e-6);

// Y(t,k) = w_k^H x_k(t)
CMat apply_filter_field(const std::vector<CMat>& xbins, const BeamformerFilterField& w);

// Mask-driven MVDR: noise SCM from (1-M) weights, then the filter above.
BeamformerFilterField mvdr_from_mask(const std::vector<CMat>& xbins, const RealField& mask,
                                     const SteeringField& h);

struct BatchDiagnostics {
  // max_k |w_k^H h_k - 1| recorded after every filter solve
  std::vector<double> distortionless_residuals;
  int rounds = 0;
};

struct BatchResult {
  BeamformerFilterField filters;
  CMat y;  // T x K enhanced output
  SteeringField steering;  // the field the final filters were solved against
  BatchDiagnostics diag;
};

// Fixed-steering batch loop. Iterative variants alternate
// {output -> tvv -> weights -> wSCM -> filter} for `iters` rounds; the others
// solve once. The returned outputs always reflect the final filters.
BatchResult run_batch(const Spectrogram& spec, const SteeringField& h, BeamformerVariant variant,
                      const RealField* mask, int iters, const ModelParams& params);

// Batch pipeline for the non-ICA steering estimators. MaskOnly derives the
// steering once from the mask complement ratio; Wscm re-estimates it from the
// weighting function after every round.
BatchResult run_batch_with_sve(const Spectrogram& spec, SveMode sve, BeamformerVariant variant,
                               const RealField* mask, int iters, const ModelParams& params,
                               const SteeringField* fixed_h = nullptr);

}  // namespace beamkit

#endif  // BEAMKIT_BATCH_HPP
