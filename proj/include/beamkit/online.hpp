// online.hpp
// Frame-by-frame RLS beamforming and steering estimation: recursive wSCM
// inverses, scheduled forgetting/subtraction factors, per-frame constrained
// row updates, and the streaming diagnostics channel.

#ifndef BEAMKIT_ONLINE_HPP
#define BEAMKIT_ONLINE_HPP

#include <vector>

#include "beamkit/ica.hpp"
#include "beamkit/source_models.hpp"
#include "beamkit/sve.hpp"

namespace beamkit {

struct OnlineParams {
  double alpha_initial = 0.96;
  double alpha_after = 0.99;
  int t_switch = 100;        // frame index where alpha and nu switch
  double gamma = 0.1;        // TVV smoothing
  double gamma_n = 0.9;      // smoothed noise power
  double nu_initial = 0.0;
  double nu_after = 0.99;    // 0.8 is the unmasked setting
  double epsilon = 1e-2;     // online mask floor
  double az = 1.0;           // null penalty weight
  double delta_init = 1e-3;  // U = (1/delta) I at start and on recovery
  int eig_iters = 3;         // warm-started power iterations per frame
  int ref_channel = 0;

  BeamformerVariant variant = BeamformerVariant::MaskSMldr;
  NoiseModel noise_model = NoiseModel::Laplacian;
  SveMode sve = SveMode::IcaHc;  // Fixed | MaskOnly | Wscm | IcaHc
  ModelParams model;

  void validate() const;
};

// rho(t) = 1 - 1 / sum_{tau=1..t} alpha^{t-tau}, the sum kept recursively
// (s_t = 1 + alpha s_{t-1}); rho(1) = 0.
double rho_factor(long t, double alpha);

struct ScheduledFactors {
  double alpha;
  double nu;
};
ScheduledFactors schedule(const OnlineParams& p, long t);

// One TVV recursion step; mask_value is the floored mask (or unused).
double online_tvv_step(BeamformerVariant v, double lambda_prev, double gamma, double y_prev_mag,
                       double mask_value, double medmag, double alpha_lambda, double floor);

struct OnlineBinState {
  CMat u;        // inverse target wSCM
  CMat u_z;      // inverse noise wSCM (ICA modes)
  CMat v_z;      // forward noise wSCM (ICA modes)
  CMat w, a;     // demixing / mixing (ICA modes)
  CVec w1;       // target filter row
  CMat r_x, r_n; // normalized observation / noise SCMs (non-fixed SVE)
  CVec h;
  double lambda = 0.0;
  double p_n = 0.0;
  double ratio_sum = 0.0;  // sum alpha^{t-tau} r_n(tau)
};

struct FrameDiagnostics {
  double distortionless_residual = 0.0;  // |w1^H h - 1|
  double norm_residual = 0.0;            // worst |w_m^H H_z w_m - 1| (ICA)
  double wa_residual = 0.0;              // worst ||W A - I||_F (ICA)
  double h_drift = 0.0;                  // worst 1 - cos(h(t), h(t-1))
  int recoveries = 0;                    // collapsed-update reloads this frame
};

class OnlineEngine {
 public:
  // fixed_h is required for SveMode::Fixed and ignored otherwise.
  OnlineEngine(int mics, int bins, const OnlineParams& params,
               const SteeringField* fixed_h = nullptr);

  // Consumes one multichannel STFT frame (column k = x_k(t)) and emits the
  // enhanced frame. mask_t, when given, holds the target mask values for
  // every bin at this frame.
  CVec process_frame(const CMat& x_t, const Eigen::ArrayXd* mask_t,
                     FrameDiagnostics* diag = nullptr);

  long frame_index() const { return t_; }
  SteeringField current_steering() const;
  const OnlineBinState& bin(int k) const { return bins_.at(k); }
  int total_recoveries() const { return total_recoveries_; }

 private:
  void process_bin(int k, const CVec& x, bool has_mask, double mask_value, double alpha,
                   double nu, double rho, FrameDiagnostics* diag);

  int mics_;
  int num_bins_;
  OnlineParams p_;
  std::vector<OnlineBinState> bins_;
  long t_ = 0;
  double alpha_sum_ = 0.0;  // s_t
  int total_recoveries_ = 0;
  std::vector<FrameDiagnostics> bin_diags_;
  CVec out_frame_;
};

}  // namespace beamkit

#endif  // BEAMKIT_ONLINE_HPP
