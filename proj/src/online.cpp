#include "beamkit/online.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "beamkit/hermitian.hpp"
#include "beamkit/parallel.hpp"

namespace beamkit {

namespace {
constexpr double kDenomFloor = 1e-12;
constexpr double kWaRefreshThreshold = 1e-8;
}  // namespace

void OnlineParams::validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(alpha_initial) || !in_unit(alpha_after) || !in_unit(gamma) || !in_unit(gamma_n) ||
      !in_unit(nu_initial) || !in_unit(nu_after))
    throw InvalidInput("online params: factors must lie in [0,1]");
  if (t_switch < 1) throw InvalidInput("online params: t_switch must be >= 1");
  if (epsilon <= 0.0 || epsilon >= 1.0) throw InvalidInput("online params: epsilon in (0,1)");
  if (delta_init <= 0.0) throw InvalidInput("online params: delta_init must be positive");
  if (az < 0.0) throw InvalidInput("online params: az must be >= 0");
  if (sve == SveMode::IcaLc || sve == SveMode::IcaPc)
    throw InvalidInput("online params: only ica_hc is available as an ICA SVE online");
}

double rho_factor(long t, double alpha) {
  if (t < 1) throw InvalidInput("rho_factor: t must be >= 1");
  double s = 0.0;
  for (long i = 0; i < t; ++i) s = 1.0 + alpha * s;
  return 1.0 - 1.0 / s;
}

ScheduledFactors schedule(const OnlineParams& p, long t) {
  if (t < 1) throw InvalidInput("schedule: t must be >= 1");
  if (t < p.t_switch) return {p.alpha_initial, p.nu_initial};
  return {p.alpha_after, p.nu_after};
}

double online_tvv_step(BeamformerVariant v, double lambda_prev, double gamma, double y_prev_mag,
                       double mask_value, double medmag, double alpha_lambda, double floor) {
  double innovation = 0.0;
  switch (v) {
    case BeamformerVariant::Mldr:
      innovation = (1.0 - gamma) * y_prev_mag * y_prev_mag;
      break;
    case BeamformerVariant::MaskMldr:
      innovation = (1.0 - gamma) * mask_value * medmag * medmag;
      break;
    case BeamformerVariant::MaskPMldr:
      innovation = (1.0 - gamma) * (mask_value * medmag * medmag + y_prev_mag * y_prev_mag) /
                   (alpha_lambda + 2.0);
      break;
    case BeamformerVariant::MaskSMldr:
      innovation = (1.0 - gamma) / 4.0 * mask_value * medmag * medmag;
      break;
    default:
      return lambda_prev;  // MPDR / Mask-MVDR carry no TVV
  }
  return std::max(gamma * lambda_prev + innovation, floor);
}

OnlineEngine::OnlineEngine(int mics, int bins, const OnlineParams& params,
                           const SteeringField* fixed_h)
    : mics_(mics), num_bins_(bins), p_(params) {
  p_.validate();
  if (mics < 1 || bins < 1) throw InvalidInput("online engine: bad dimensions");
  const bool ica = p_.sve == SveMode::IcaHc;
  if (ica && mics < 2) throw InvalidInput("online engine: ICA needs >= 2 channels");
  if (p_.sve == SveMode::Fixed) {
    if (!fixed_h) throw InvalidInput("online engine: sve=fixed requires a steering field");
    if (fixed_h->bins() != bins || fixed_h->mics() != mics)
      throw InvalidInput("online engine: steering field shape mismatch");
  }

  DemixingState demix;
  if (ica) {
    SteeringField h0;
    h0.h.assign(bins, CVec::Ones(mics));
    demix = init_demixing(h0, ConstraintMode::Hc, std::numeric_limits<double>::infinity(), p_.az);
  }

  bins_.resize(bins);
  for (int k = 0; k < bins; ++k) {
    OnlineBinState& b = bins_[k];
    b.u = CMat::Identity(mics, mics) / p_.delta_init;
    if (ica) {
      b.u_z = CMat::Identity(mics, mics) / p_.delta_init;
      b.v_z = CMat::Identity(mics, mics) * p_.delta_init;
      b.w = demix.w[k];
      b.a = demix.a[k];
    }
    b.w1 = CVec::Unit(mics, 0);
    b.r_x = CMat::Zero(mics, mics);
    b.r_n = CMat::Zero(mics, mics);
    b.h = p_.sve == SveMode::Fixed ? normalize_steering(fixed_h->h[k], p_.ref_channel)
                                   : normalize_steering(CVec::Ones(mics), p_.ref_channel);
    b.lambda = p_.model.tvv_floor;
  }
  bin_diags_.resize(bins);
  out_frame_.resize(bins);
}

SteeringField OnlineEngine::current_steering() const {
  SteeringField f;
  f.h.reserve(bins_.size());
  for (const auto& b : bins_) f.h.push_back(b.h);
  return f;
}

CVec OnlineEngine::process_frame(const CMat& x_t, const Eigen::ArrayXd* mask_t,
                                 FrameDiagnostics* diag) {
  if (x_t.rows() != mics_ || x_t.cols() != num_bins_)
    throw InvalidInput("process_frame: frame shape mismatch");
  if (requires_mask(p_.variant) && mask_t == nullptr)
    throw InvalidInput("process_frame: " + variant_name(p_.variant) + " requires a mask");
  if (mask_t && mask_t->size() != num_bins_)
    throw InvalidInput("process_frame: mask length mismatch");
  if (!x_t.allFinite()) throw InvalidInput("process_frame: non-finite input frame");

  ++t_;
  const ScheduledFactors sched = schedule(p_, t_);
  alpha_sum_ = 1.0 + sched.alpha * alpha_sum_;
  const double rho = 1.0 - 1.0 / alpha_sum_;

  parallel_for(num_bins_, [&](int k) {
    bin_diags_[k] = FrameDiagnostics{};
    double mask_value = 1.0;
    if (mask_t) mask_value = std::max((*mask_t)(k), p_.epsilon);  // floor-then-use
    process_bin(k, x_t.col(k), mask_t != nullptr, mask_value, sched.alpha, sched.nu, rho,
                &bin_diags_[k]);
  });

  FrameDiagnostics agg;
  for (const auto& d : bin_diags_) {
    agg.distortionless_residual = std::max(agg.distortionless_residual, d.distortionless_residual);
    agg.norm_residual = std::max(agg.norm_residual, d.norm_residual);
    agg.wa_residual = std::max(agg.wa_residual, d.wa_residual);
    agg.h_drift = std::max(agg.h_drift, d.h_drift);
    agg.recoveries += d.recoveries;
  }
  total_recoveries_ += agg.recoveries;
  if (diag) *diag = agg;
  if (!out_frame_.allFinite())
    throw NumericalError("process_frame: non-finite output at frame " + std::to_string(t_));
  return out_frame_;
}

void OnlineEngine::process_bin(int k, const CVec& x, bool has_mask, double mask_value,
                               double alpha, double nu, double rho, FrameDiagnostics* diag) {
  OnlineBinState& b = bins_[k];
  const bool ica = p_.sve == SveMode::IcaHc;
  const int m_count = mics_;

  // outputs with the previous weights
  Complex y_prev;
  CVec z_prev;
  if (ica) {
    const CVec full = b.w * x;
    y_prev = full(0);
    z_prev = full.tail(m_count - 1);
  } else {
    y_prev = b.w1.dot(x);
  }

  // per-frame median magnitude over the non-excluded channels
  double medmag = 0.0;
  if (requires_mask(p_.variant)) {
    std::vector<double> mags;
    mags.reserve(m_count);
    for (int m = 0; m < m_count; ++m) {
      if (std::find(p_.model.excluded_channels.begin(), p_.model.excluded_channels.end(), m) ==
          p_.model.excluded_channels.end())
        mags.push_back(std::abs(x(m)));
    }
    if (mags.empty()) throw InvalidInput("process_bin: all channels excluded");
    std::sort(mags.begin(), mags.end());
    const size_t n = mags.size();
    medmag = (n % 2 == 1) ? mags[n / 2] : 0.5 * (mags[n / 2 - 1] + mags[n / 2]);
  }

  // TVV and weighting functions first: the wSCM-driven SVE consumes phi as
  // its noise ratio
  b.lambda = online_tvv_step(p_.variant, b.lambda, p_.gamma, std::abs(y_prev), mask_value, medmag,
                             p_.model.alpha_lambda, p_.model.tvv_floor);
  double phi;
  switch (p_.variant) {
    case BeamformerVariant::Mpdr:
      phi = 1.0;
      break;
    case BeamformerVariant::MaskMvdr:
      phi = 1.0 - mask_value;
      break;
    case BeamformerVariant::MaskSMldr:
      phi = 1.0 / (2.0 * std::sqrt(b.lambda) * std::max(std::abs(y_prev), p_.model.mag_floor));
      break;
    default:
      phi = 1.0 / b.lambda;
      break;
  }
  phi = std::min(phi, p_.model.phi0);

  double phi_z = 1.0;
  if (ica && p_.noise_model == NoiseModel::Laplacian)
    phi_z = std::min(1.0 / (2.0 * std::max(z_prev.norm(), p_.model.mag_floor)), p_.model.phi0);

  // steering update by recursive covariance subtraction
  if (p_.sve != SveMode::Fixed) {
    double r_n_t;
    if (ica) {
      const Complex s_hat = b.a(0, 0) * y_prev;
      double n_hat_sq = 0.0;
      for (int m = 1; m < m_count; ++m) n_hat_sq += std::norm(b.a(m, m) * z_prev(m - 1));
      b.p_n = p_.gamma_n * b.p_n + (1.0 - p_.gamma_n) * n_hat_sq;
      const double denom = std::norm(s_hat) + b.p_n;
      r_n_t = denom > kDenomFloor ? b.p_n / denom : 0.0;
    } else if (p_.sve == SveMode::MaskOnly) {
      r_n_t = 1.0 - mask_value;
    } else {  // Wscm
      r_n_t = phi;
    }

    // masked observations sqrt(M) x feed the SCM estimates whenever a mask
    // is available, matching the batch estimators
    const CMat masked_outer = has_mask ? CMat(mask_value * (x * x.adjoint()))
                                       : CMat(x * x.adjoint());
    b.r_x = rho * b.r_x + (1.0 - rho) * masked_outer;
    b.ratio_sum = r_n_t + alpha * b.ratio_sum;
    if (b.ratio_sum > kDenomFloor) {
      const double rho_n = 1.0 - r_n_t / b.ratio_sum;
      b.r_n = rho_n * b.r_n + (1.0 - rho_n) * masked_outer;
    }
    const CMat r_s = b.r_x - nu * b.r_n;
    if (r_s.norm() > 1e-12 * b.r_x.norm()) {
      const CVec h_old = b.h;
      b.h = normalize_steering(refine_eigenvector(r_s, b.h, p_.eig_iters), p_.ref_channel);
      diag->h_drift = std::max(diag->h_drift, 1.0 - steering_cosine(b.h, h_old));
    }
  }

  // inverse wSCM recursions
  if (rho <= 0.0) {
    // first frame: the rank-1 observation replaces the state entirely, made
    // invertible with diagonal loading
    b.u = diagonal_load(phi * (x * x.adjoint()), 1e-6).inverse();
  } else {
    try {
      b.u = sm_inverse_update(b.u, x, rho, phi);
      if (!b.u.allFinite()) throw NumericalError("overflowed inverse wSCM");
    } catch (const NumericalError&) {
      b.u = CMat::Identity(m_count, m_count) / p_.delta_init;
      ++diag->recoveries;
    }
  }
  if (ica) {
    // the forward form tracks exactly what the inverse recursion inverts, so
    // G_z stays the true inverse of H_z
    if (rho <= 0.0) {
      b.v_z = diagonal_load(phi_z * (x * x.adjoint()), 1e-6);
      b.u_z = b.v_z.inverse();
    } else {
      b.v_z = rho * b.v_z + (1.0 - rho) * phi_z * (x * x.adjoint());
      try {
        b.u_z = sm_inverse_update(b.u_z, x, rho, phi_z);
        if (!b.u_z.allFinite() || !b.v_z.allFinite())
          throw NumericalError("overflowed noise wSCM");
      } catch (const NumericalError&) {
        b.v_z = CMat::Identity(m_count, m_count) * p_.delta_init;
        b.u_z = CMat::Identity(m_count, m_count) / p_.delta_init;
        ++diag->recoveries;
      }
    }
  }

  // target row: w1 = U h / (h^H U h)
  const CVec uh = b.u * b.h;
  const Complex denom = b.h.dot(uh);
  if (std::abs(denom) < kDenomFloor) {
    b.u = CMat::Identity(m_count, m_count) / p_.delta_init;
    b.w1 = CVec::Unit(m_count, 0);
    ++diag->recoveries;
  } else {
    b.w1 = uh / denom;
  }
  diag->distortionless_residual =
      std::max(diag->distortionless_residual, std::abs(b.w1.dot(b.h) - Complex(1.0, 0.0)));

  if (ica) {
    // rank-1 refresh of A for one changed row of W
    auto apply_row = [&](int row, const CVec& w_new) {
      const CVec delta_w = w_new - b.w.row(row).adjoint();
      const CVec a_col = b.a.col(row);
      const Complex d = Complex(1.0, 0.0) + delta_w.dot(a_col);
      b.w.row(row) = w_new.adjoint();
      if (std::abs(d) < kDenomFloor) {
        b.a = Eigen::PartialPivLU<CMat>(b.w).inverse();
        ++diag->recoveries;
      } else {
        b.a -= (a_col * (delta_w.adjoint() * b.a)) / d;
      }
    };
    apply_row(0, b.w1);

    // noise rows with penalized nulls
    const CMat h_z = b.v_z + p_.az * (b.h * b.h.adjoint());
    const CVec uzh = b.u_z * b.h;
    const Complex gz_denom = Complex(1.0 / std::max(p_.az, kDenomFloor), 0.0) + b.h.dot(uzh);
    CMat g_z = b.u_z;
    if (std::abs(gz_denom) > kDenomFloor) g_z -= (uzh * uzh.adjoint()) / gz_denom;
    for (int m = 1; m < m_count; ++m) {
      const CVec wt = g_z * b.a.col(m);
      const double quad = std::real(wt.dot(h_z * wt));
      if (quad <= kDenomFloor) {
        ++diag->recoveries;
        continue;  // keep the previous row; later frames repair it
      }
      const CVec wm = wt / std::sqrt(quad);
      apply_row(m, wm);
      diag->norm_residual =
          std::max(diag->norm_residual, std::abs(std::real(wm.dot(h_z * wm)) - 1.0));
    }

    double wa = (b.w * b.a - CMat::Identity(m_count, m_count)).norm();
    if (wa > kWaRefreshThreshold) {
      b.a = Eigen::PartialPivLU<CMat>(b.w).inverse();
      wa = (b.w * b.a - CMat::Identity(m_count, m_count)).norm();
      ++diag->recoveries;
    }
    diag->wa_residual = std::max(diag->wa_residual, wa);
  }

  out_frame_(k) = b.w1.dot(x);
}

}  // namespace beamkit
