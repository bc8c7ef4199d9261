#include "beamkit/batch.hpp"

#include <cmath>

#include "beamkit/hermitian.hpp"
#include "beamkit/parallel.hpp"

namespace beamkit {

WscmStack accumulate_wscm(const std::vector<CMat>& xbins, const RealField& phi) {
  const int k_count = static_cast<int>(xbins.size());
  if (k_count == 0 || xbins[0].cols() == 0) throw InvalidInput("accumulate_wscm: no frames");
  const long t_count = xbins[0].cols();
  if (phi.rows() != t_count || phi.cols() != k_count)
    throw InvalidInput("accumulate_wscm: weight shape mismatch");
  WscmStack stack;
  stack.v.resize(k_count);
  parallel_for(k_count, [&](int k) {
    const int m = static_cast<int>(xbins[k].rows());
    CMat acc = CMat::Zero(m, m);
    for (long t = 0; t < t_count; ++t) {
      const double w = phi(t, k);
      if (w != 0.0) acc.noalias() += w * (xbins[k].col(t) * xbins[k].col(t).adjoint());
    }
    stack.v[k] = acc / static_cast<double>(t_count);
  });
  return stack;
}

CVec distortionless_filter(const CMat& v, const CVec& h, double load_delta) {
  if (h.norm() == 0.0) throw InvalidInput("distortionless_filter: zero steering vector");
  const CVec u = solve_loaded(v, h, load_delta);
  const Complex denom = h.dot(u);  // h^H V^{-1} h, real positive for PD V
  if (denom.real() <= 0.0)
    throw NumericalError("distortionless_filter: h^H V^{-1} h is not positive");
  return u / denom;
}

CMat apply_filter_field(const std::vector<CMat>& xbins, const BeamformerFilterField& w) {
  const int k_count = static_cast<int>(xbins.size());
  const long t_count = k_count > 0 ? xbins[0].cols() : 0;
  CMat y(t_count, k_count);
  parallel_for(k_count, [&](int k) {
    y.col(k) = (w.w[k].adjoint() * xbins[k]).transpose();
  });
  return y;
}

BeamformerFilterField mvdr_from_mask(const std::vector<CMat>& xbins, const RealField& mask,
                                     const SteeringField& h) {
  const int k_count = static_cast<int>(xbins.size());
  WscmStack noise = accumulate_wscm(xbins, weight_mask_mvdr(mask));
  BeamformerFilterField field;
  field.w.resize(k_count);
  parallel_for(k_count, [&](int k) { field.w[k] = distortionless_filter(noise.v[k], h.h[k]); });
  return field;
}

namespace {

BeamformerFilterField initial_filters(int k_count, int m_count) {
  BeamformerFilterField field;
  field.w.assign(k_count, CVec::Unit(m_count, 0));
  return field;
}

double max_distortionless_residual(const BeamformerFilterField& w, const SteeringField& h) {
  double worst = 0.0;
  for (size_t k = 0; k < w.w.size(); ++k)
    worst = std::max(worst, std::abs(w.w[k].dot(h.h[k]) - Complex(1.0, 0.0)));
  return worst;
}

void solve_all(const WscmStack& stack, const SteeringField& h, BeamformerFilterField& w) {
  parallel_for(static_cast<int>(stack.v.size()),
               [&](int k) { w.w[k] = distortionless_filter(stack.v[k], h.h[k]); });
}

}  // namespace

BatchResult run_batch(const Spectrogram& spec, const SteeringField& h, BeamformerVariant variant,
                      const RealField* mask, int iters, const ModelParams& params) {
  if (requires_mask(variant) && mask == nullptr)
    throw InvalidInput("run_batch: " + variant_name(variant) + " requires a mask");
  const std::vector<CMat> xbins = per_bin(spec);
  const int k_count = spec.bins();
  const int m_count = spec.channels();
  if (h.bins() != k_count || h.mics() != m_count)
    throw InvalidInput("run_batch: steering field shape mismatch");
  if (mask && (mask->rows() != spec.frames() || mask->cols() != k_count))
    throw InvalidInput("run_batch: mask shape mismatch");

  RealField medmag;
  if (requires_mask(variant)) medmag = median_magnitude(spec, params.excluded_channels);

  BatchResult res;
  res.filters = initial_filters(k_count, m_count);
  res.steering = h;

  const int rounds = is_iterative(variant) ? iters : 1;
  for (int round = 0; round < rounds; ++round) {
    const CMat y = apply_filter_field(xbins, res.filters);
    const RealField phi = variant_phi(variant, y, mask, medmag, params);
    const WscmStack stack = accumulate_wscm(xbins, phi);
    solve_all(stack, h, res.filters);
    res.diag.distortionless_residuals.push_back(max_distortionless_residual(res.filters, h));
  }
  res.diag.rounds = rounds;
  res.y = apply_filter_field(xbins, res.filters);
  return res;
}

BatchResult run_batch_with_sve(const Spectrogram& spec, SveMode sve, BeamformerVariant variant,
                               const RealField* mask, int iters, const ModelParams& params,
                               const SteeringField* fixed_h) {
  if (is_ica_sve(sve))
    throw InvalidInput("run_batch_with_sve: ICA steering estimation uses run_batch_ica");
  const int k_count = spec.bins();
  const int m_count = spec.channels();

  if (sve == SveMode::Fixed) {
    if (!fixed_h) throw InvalidInput("run_batch_with_sve: sve=fixed requires a steering field");
    return run_batch(spec, *fixed_h, variant, mask, iters, params);
  }

  const std::vector<CMat> xbins = per_bin(spec);

  if (sve == SveMode::MaskOnly) {
    if (!mask) throw InvalidInput("run_batch_with_sve: sve=mask_only requires a mask");
    // ratio = 1 - M on the raw observations
    const RealField ratio = weight_mask_mvdr(*mask);
    const std::vector<CMat> r_x = scm_observations(xbins);
    const std::vector<CMat> r_n = noise_scm_from_ratio(xbins, ratio);
    SteeringField h;
    h.h.resize(k_count);
    parallel_for(k_count, [&](int k) { h.h[k] = subtract_and_extract(r_x[k], r_n[k], 1.0); });
    return run_batch(spec, h, variant, mask, iters, params);
  }

  // sve == Wscm: alternate beamforming and steering re-estimation from the
  // weighting function, SCMs built from masked observations when available.
  RealField medmag;
  if (requires_mask(variant)) medmag = median_magnitude(spec, params.excluded_channels);
  const std::vector<CMat> r_x = scm_observations(xbins, mask);

  BatchResult res;
  res.filters = initial_filters(k_count, m_count);
  res.steering.h.assign(k_count, CVec::Ones(m_count) / std::sqrt(static_cast<double>(m_count)));

  const int rounds = std::max(1, iters);
  for (int round = 0; round < rounds; ++round) {
    const CMat y = apply_filter_field(xbins, res.filters);
    const RealField phi = variant_phi(variant, y, mask, medmag, params);
    const std::vector<CMat> r_n = noise_scm_from_weights(xbins, phi, mask);
    parallel_for(k_count, [&](int k) {
      res.steering.h[k] = subtract_and_extract(r_x[k], r_n[k], 1.0);
    });
    const WscmStack stack = accumulate_wscm(xbins, phi);
    solve_all(stack, res.steering, res.filters);
    res.diag.distortionless_residuals.push_back(
        max_distortionless_residual(res.filters, res.steering));
  }
  res.diag.rounds = rounds;
  res.y = apply_filter_field(xbins, res.filters);
  return res;
}

}  // namespace beamkit
