#include "beamkit/ica.hpp"

#include <cmath>

#include "beamkit/hermitian.hpp"
#include "beamkit/parallel.hpp"

namespace beamkit {

std::string constraint_mode_name(ConstraintMode mode) {
  switch (mode) {
    case ConstraintMode::Lc: return "lc";
    case ConstraintMode::Pc: return "pc";
    case ConstraintMode::Hc: return "hc";
  }
  return "?";
}

DemixingState init_demixing(const SteeringField& h, ConstraintMode mode, double a1, double az) {
  const int k_count = h.bins();
  const int m_count = h.mics();
  if (k_count == 0 || m_count < 2) throw InvalidInput("init_demixing: need >= 2 channels");
  DemixingState st;
  st.mode = mode;
  st.a1 = a1;
  st.az = az;
  st.w.resize(k_count);
  st.a.resize(k_count);
  for (int k = 0; k < k_count; ++k) {
    if (h.h[k].size() != m_count || h.h[k].norm() == 0.0)
      throw InvalidInput("init_demixing: degenerate steering vector");
    if (std::abs(h.h[k](0)) < 1e-12)
      throw InvalidInput("init_demixing: steering vector has zero first component");
    CMat mix = CMat::Identity(m_count, m_count);
    mix.col(0) = h.h[k];
    st.a[k] = mix;
    st.w[k] = mix.inverse();
  }
  return st;
}

void refresh_mixing(DemixingState& state, int k) {
  Eigen::PartialPivLU<CMat> lu(state.w[k]);
  const CMat a = lu.inverse();
  if (!a.allFinite()) throw NumericalError("refresh_mixing: singular demixing matrix");
  state.a[k] = a;
}

IcaOutputs compute_outputs(const DemixingState& state, const std::vector<CMat>& xbins) {
  const int k_count = state.bins();
  const int m_count = state.mics();
  const long t_count = xbins.empty() ? 0 : xbins[0].cols();
  IcaOutputs out;
  out.y.resize(t_count, k_count);
  out.z.resize(k_count);
  parallel_for(k_count, [&](int k) {
    const CMat full = state.w[k] * xbins[k];  // M x T
    out.y.col(k) = full.row(0).transpose();
    out.z[k] = full.bottomRows(m_count - 1);
  });
  mdp_normalize(state, out);
  return out;
}

void mdp_normalize(const DemixingState& state, IcaOutputs& out) {
  const int k_count = state.bins();
  const int m_count = state.mics();
  out.s_hat.resize(out.y.rows(), out.y.cols());
  out.n_hat.resize(k_count);
  parallel_for(k_count, [&](int k) {
    out.s_hat.col(k) = state.a[k](0, 0) * out.y.col(k);
    out.n_hat[k] = out.z[k];
    for (int m = 1; m < m_count; ++m) out.n_hat[k].row(m - 1) *= state.a[k](m, m);
  });
}

RealField power_ratio(const IcaOutputs& out) {
  const long t_count = out.y.rows();
  const int k_count = static_cast<int>(out.y.cols());
  RealField r(t_count, k_count);
  for (int k = 0; k < k_count; ++k) {
    for (long t = 0; t < t_count; ++t) {
      const double nn = out.n_hat[k].col(t).squaredNorm();
      const double ss = std::norm(out.s_hat(t, k));
      const double denom = ss + nn;
      r(t, k) = denom > 0.0 ? nn / denom : 0.0;
    }
  }
  return r;
}

double update_target_lc(DemixingState& state, int k, const CMat& v, const CVec& h) {
  const CVec w1 = distortionless_filter(v, h);
  state.w[k].row(0) = w1.adjoint();
  refresh_mixing(state, k);
  return std::abs(w1.dot(h) - Complex(1.0, 0.0));
}

double update_target_hc(DemixingState& state, int k, const CMat& v, const CVec& h) {
  // the strict-distortionless solution approximates the hybrid stationary
  // point once the nulls hold
  return update_target_lc(state, k, v, h);
}

double update_target_pc(DemixingState& state, int k, const CMat& v, const CVec& h, double a1) {
  if (!(a1 > 0.0) || !std::isfinite(a1))
    throw InvalidInput("update_target_pc: a1 must be finite and positive");
  // one fixed-point step of H w1 = A e1 + a1 h with the mixing matrix frozen
  const CMat big_h = v + a1 * (h * h.adjoint());
  const CVec rhs = state.a[k].col(0) + a1 * h;
  const CVec w1 = solve_loaded(big_h, rhs);
  state.w[k].row(0) = w1.adjoint();
  refresh_mixing(state, k);
  return std::abs(w1.dot(h) - Complex(1.0, 0.0));
}

namespace {

// Unit normalization against the true quadratic form. Rows whose true
// energy is dominated by the diagonal loading (noise-free bins, where the
// quadratic form vanishes in the null space) are normalized against the
// loaded form instead so the row scale stays bounded.
CVec normalize_noise_row(const CVec& wt, const CMat& m_true, const CMat& m_loaded) {
  const double quad_true = std::real(wt.dot(m_true * wt));
  const double quad_loaded = std::real(wt.dot(m_loaded * wt));
  if (quad_loaded <= 0.0)
    throw NumericalError("noise row update: degenerate normalization");
  const double quad = 2.0 * quad_true > quad_loaded ? quad_true : quad_loaded;
  return wt / std::sqrt(quad);
}

}  // namespace

double update_noise_lc(DemixingState& state, int k, const CMat& vz, const CVec& h) {
  const int m_count = state.mics();
  const CMat vz_loaded = diagonal_load(vz, 1e-6);
  const CVec u = solve_hermitian(vz_loaded, h);
  const Complex hu = h.dot(u);  // h^H Vz^{-1} h
  if (hu.real() <= 0.0)
    throw NumericalError("update_noise_lc: h^H Vz^{-1} h is not positive");
  double worst = 0.0;
  for (int m = 1; m < m_count; ++m) {
    const CVec rhs = state.a[k].col(m);  // W^{-1} e_m with the current rows
    const CVec p = solve_hermitian(vz_loaded, rhs);
    const CVec wt = p - u * (h.dot(p) / hu);  // G_z W^{-1} e_m
    const CVec wm = normalize_noise_row(wt, vz, vz_loaded);
    state.w[k].row(m) = wm.adjoint();
    refresh_mixing(state, k);
    worst = std::max(worst, std::abs(wm.dot(h)));
  }
  return worst;
}

double update_noise_pc(DemixingState& state, int k, const CMat& vz, const CVec& h, double az) {
  if (az < 0.0) throw InvalidInput("update_noise_pc: az must be >= 0");
  const int m_count = state.mics();
  const CMat big_hz = vz + az * (h * h.adjoint());
  const CMat big_hz_loaded = diagonal_load(big_hz, 1e-6);
  double worst = 0.0;
  for (int m = 1; m < m_count; ++m) {
    // (W H_z)^{-1} e_m = H_z^{-1} A e_m
    const CVec wt = solve_hermitian(big_hz_loaded, state.a[k].col(m));
    const CVec wm = normalize_noise_row(wt, big_hz, big_hz_loaded);
    state.w[k].row(m) = wm.adjoint();
    refresh_mixing(state, k);
    const double quad_true = std::real(wm.dot(big_hz * wm));
    if (quad_true > 0.5)  // fallback-normalized rows carry the loaded form instead
      worst = std::max(worst, std::abs(quad_true - 1.0));
  }
  return worst;
}

namespace {

RealField noise_output_norms(const IcaOutputs& out) {
  const long t_count = out.y.rows();
  const int k_count = static_cast<int>(out.y.cols());
  RealField norms(t_count, k_count);
  for (int k = 0; k < k_count; ++k)
    for (long t = 0; t < t_count; ++t) norms(t, k) = out.z[k].col(t).norm();
  return norms;
}

double wa_identity_residual(const DemixingState& state) {
  double worst = 0.0;
  const int m_count = state.mics();
  for (int k = 0; k < state.bins(); ++k)
    worst = std::max(worst,
                     (state.w[k] * state.a[k] - CMat::Identity(m_count, m_count)).norm());
  return worst;
}

}  // namespace

IcaResult run_batch_ica(const Spectrogram& spec, const RealField* mask, const IcaConfig& cfg,
                        const ModelParams& params) {
  if (requires_mask(cfg.variant) && mask == nullptr)
    throw InvalidInput("run_batch_ica: " + variant_name(cfg.variant) + " requires a mask");
  if (cfg.mode == ConstraintMode::Pc && !std::isfinite(cfg.a1))
    throw InvalidInput("run_batch_ica: ica_pc requires a finite distortionless penalty");
  const int k_count = spec.bins();
  const int m_count = spec.channels();
  if (m_count < 2) throw InvalidInput("run_batch_ica: need >= 2 channels");
  if (mask && (mask->rows() != spec.frames() || mask->cols() != k_count))
    throw InvalidInput("run_batch_ica: mask shape mismatch");

  const std::vector<CMat> xbins = per_bin(spec);

  SteeringField h0;
  if (cfg.init_steering.bins() > 0) {
    if (cfg.init_steering.bins() != k_count || cfg.init_steering.mics() != m_count)
      throw InvalidInput("run_batch_ica: init steering shape mismatch");
    h0 = cfg.init_steering;
  } else if (cfg.init_identity) {
    h0.h.assign(k_count, CVec::Unit(m_count, 0));
  } else {
    h0.h.assign(k_count, CVec::Ones(m_count));
  }

  IcaResult res;
  res.state = init_demixing(h0, cfg.mode, cfg.a1, cfg.az);
  res.steering.h.resize(k_count);
  for (int k = 0; k < k_count; ++k) res.steering.h[k] = normalize_steering(h0.h[k]);

  RealField medmag;
  if (requires_mask(cfg.variant)) medmag = median_magnitude(spec, params.excluded_channels);
  const std::vector<CMat> r_x = scm_observations(xbins, mask);

  for (int round = 0; round < cfg.iters; ++round) {
    const IcaOutputs out = compute_outputs(res.state, xbins);
    const RealField r_n_ratio = power_ratio(out);
    const std::vector<CMat> r_n = noise_scm_from_ratio(xbins, r_n_ratio, mask);
    std::vector<char> skipped(k_count, 0);
    parallel_for(k_count, [&](int k) {
      const CMat r_s = r_x[k] - cfg.nu * r_n[k];
      // a subtraction cancelled down to the rounding floor carries no
      // directional information; keep the previous estimate
      if (r_s.norm() <= 1e-12 * r_x[k].norm()) return;
      try {
        res.steering.h[k] = normalize_steering(principal_eigenvector(r_s));
      } catch (const NumericalError&) {
        skipped[k] = 1;  // degenerate leading pair: keep the previous estimate
      }
    });
    for (char s : skipped) res.diag.sve_skips += s;
    res.steering_trace.push_back(res.steering);

    const RealField phi = variant_phi(cfg.variant, out.y, mask, medmag, params);
    const RealField phi_z = cfg.noise_model == NoiseModel::Laplacian
                                ? weight_noise_laplacian(noise_output_norms(out), params.phi0)
                                : weight_noise_gaussian(spec.frames(), k_count);
    const WscmStack v = accumulate_wscm(xbins, phi);
    const WscmStack vz = accumulate_wscm(xbins, phi_z);

    std::vector<double> target_res(k_count, 0.0), noise_res(k_count, 0.0);
    parallel_for(k_count, [&](int k) {
      const CVec& hk = res.steering.h[k];
      switch (cfg.mode) {
        case ConstraintMode::Lc:
          target_res[k] = update_target_lc(res.state, k, v.v[k], hk);
          noise_res[k] = update_noise_lc(res.state, k, vz.v[k], hk);
          break;
        case ConstraintMode::Pc:
          target_res[k] = update_target_pc(res.state, k, v.v[k], hk, cfg.a1);
          noise_res[k] = update_noise_pc(res.state, k, vz.v[k], hk, cfg.az);
          break;
        case ConstraintMode::Hc:
          target_res[k] = update_target_hc(res.state, k, v.v[k], hk);
          noise_res[k] = update_noise_pc(res.state, k, vz.v[k], hk, cfg.az);
          break;
      }
    });

    const double worst_target = *std::max_element(target_res.begin(), target_res.end());
    const double worst_noise = *std::max_element(noise_res.begin(), noise_res.end());
    if (cfg.mode != ConstraintMode::Pc)
      res.diag.distortionless_residuals.push_back(worst_target);
    if (cfg.mode == ConstraintMode::Lc)
      res.diag.null_residuals.push_back(worst_noise);
    else
      res.diag.norm_residuals.push_back(worst_noise);
    res.diag.wa_identity_residuals.push_back(wa_identity_residual(res.state));
  }
  res.diag.rounds = cfg.iters;
  res.outputs = compute_outputs(res.state, xbins);
  return res;
}

}  // namespace beamkit
