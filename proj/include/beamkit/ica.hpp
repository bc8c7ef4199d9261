// ica.hpp
// Spatially constrained ICA for joint beamforming and steering estimation.
// The target row carries a distortionless constraint, the noise rows carry
// null constraints: strict Lagrangian (LC), quadratic penalties (PC), or the
// hybrid of a strict distortionless row with penalized nulls (HC).

#ifndef BEAMKIT_ICA_HPP
#define BEAMKIT_ICA_HPP

#include <string>
#include <vector>

#include "beamkit/batch.hpp"
#include "beamkit/source_models.hpp"
#include "beamkit/stft.hpp"
#include "beamkit/sve.hpp"

namespace beamkit {

enum class ConstraintMode { Lc, Pc, Hc };
enum class NoiseModel { Gaussian, Laplacian };

std::string constraint_mode_name(ConstraintMode mode);

struct DemixingState {
  std::vector<CMat> w;  // per bin, rows are w_m^H (row 0 = target)
  std::vector<CMat> a;  // per bin, A = W^{-1}
  ConstraintMode mode = ConstraintMode::Hc;
  double a1 = 50.0;  // distortionless penalty weight (PC)
  double az = 1.0;   // null penalty weight (PC/HC)

  int bins() const { return static_cast<int>(w.size()); }
  int mics() const { return w.empty() ? 0 : static_cast<int>(w[0].rows()); }
};

struct IcaOutputs {
  CMat y;                   // T x K target output
  std::vector<CMat> z;      // per bin: (M-1) x T noise outputs
  CMat s_hat;               // minimal-distortion-normalized target
  std::vector<CMat> n_hat;  // minimal-distortion-normalized noise outputs
};

// W_k = [h_k | e_2 ... e_M]^{-1}; identity up to the first column being the
// steering vector. Requires a nonzero first steering component per bin.
DemixingState init_demixing(const SteeringField& h, ConstraintMode mode, double a1, double az);

// A_k = W_k^{-1} by direct inversion.
void refresh_mixing(DemixingState& state, int k);

// Outputs [Y; z] = W x per bin, with the MDP-normalized copies filled in.
IcaOutputs compute_outputs(const DemixingState& state, const std::vector<CMat>& xbins);

// S_hat = A[0,0] * Y, n_hat_m = A[m,m] * z_m (scale restoration at the
// observation, minimal distortion principle).
void mdp_normalize(const DemixingState& state, IcaOutputs& out);

// r(t,k) = ||n_hat||^2 / (|s_hat|^2 + ||n_hat||^2), 0/0 defined as 0.
RealField power_ratio(const IcaOutputs& out);

// Row updates for one bin. Each returns the constraint residual it is
// accountable for: |w1^H h - 1| for strict target rows, the worst
// |w_m^H h| for LC noise rows, the worst |w_m^H H_z w_m - 1| for PC/HC
// noise rows. The mixing matrix is refreshed after every row.
double update_target_lc(DemixingState& state, int k, const CMat& v, const CVec& h);
double update_target_hc(DemixingState& state, int k, const CMat& v, const CVec& h);
double update_target_pc(DemixingState& state, int k, const CMat& v, const CVec& h, double a1);
double update_noise_lc(DemixingState& state, int k, const CMat& vz, const CVec& h);
double update_noise_pc(DemixingState& state, int k, const CMat& vz, const CVec& h, double az);

struct IcaDiagnostics {
  std::vector<double> distortionless_residuals;  // per round (strict target rows)
  std::vector<double> null_residuals;            // per round, LC noise rows
  std::vector<double> norm_residuals;            // per round, PC/HC noise rows
  std::vector<double> wa_identity_residuals;     // per round max_k ||W A - I||_F
  int rounds = 0;
  int sve_skips = 0;  // bins that kept a previous steering estimate
};

struct IcaConfig {
  ConstraintMode mode = ConstraintMode::Hc;
  double a1 = 50.0;
  double az = 1.0;
  BeamformerVariant variant = BeamformerVariant::MaskSMldr;
  // Laplacian pairs with the sparse target model; Gaussian with the rest.
  NoiseModel noise_model = NoiseModel::Laplacian;
  int iters = 10;
  double nu = 1.0;             // batch covariance-subtraction scale
  bool init_identity = false;  // identity demixing for unknown-direction scenes
  SteeringField init_steering; // overrides the all-ones start when non-empty
};

struct IcaResult {
  IcaOutputs outputs;
  DemixingState state;
  SteeringField steering;
  std::vector<SteeringField> steering_trace;  // per round
  IcaDiagnostics diag;
};

// Joint loop: per round, outputs -> MDP -> noise ratio -> steering update by
// covariance subtraction -> target/noise wSCMs -> constrained row updates.
IcaResult run_batch_ica(const Spectrogram& spec, const RealField* mask, const IcaConfig& cfg,
                        const ModelParams& params);

}  // namespace beamkit

#endif  // BEAMKIT_ICA_HPP
