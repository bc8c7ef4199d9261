// scene.hpp
// Synthetic multichannel scenes with exact ground truth: far-field steering
// on a linear array, diffuse and point noise, SNR control, instantaneous
// source moves, oracle ratio masks, and signal-level metrics.

#ifndef BEAMKIT_SCENE_HPP
#define BEAMKIT_SCENE_HPP

#include <string>
#include <vector>

#include "beamkit/common.hpp"
#include "beamkit/stft.hpp"
#include "beamkit/sve.hpp"
#include "beamkit/wav.hpp"

namespace beamkit {

struct MoveEvent {
  double time_s;
  double doa_deg;
};

struct SourceSpec {
  std::string kind = "speechlike";  // speechlike | tone | noise | file
  std::string path;                 // for kind=file
  double doa_deg = 0.0;
  double onset_s = 0.0;
  double offset_s = -1.0;  // < 0: to the end
  double gain = 1.0;
  double tone_hz = 1000.0;
  std::vector<MoveEvent> moves;  // strictly increasing times
};

struct PointNoise {
  double doa_deg;
  double gain;
};

struct SceneSpec {
  int mics = 4;
  double spacing_m = 0.05;
  double duration_s = 10.0;
  double snr_db = 5.0;
  std::uint64_t seed = 0;
  double diffuse_level = 1.0;     // 0 disables diffuse noise
  int diffuse_count = 24;         // independent plane waves approximating a diffuse field
  double sensor_noise = 1e-3;     // uncorrelated floor, relative to the diffuse level
  std::vector<PointNoise> point_noises;
  SourceSpec target;
  StftConfig stft;

  void validate() const;
};

SceneSpec parse_scene_spec(const std::string& path);

struct SegmentSteering {
  long start_frame;
  double doa_deg;
  SteeringField field;
};

struct SceneTruth {
  std::vector<std::vector<double>> target_image;  // per channel
  std::vector<std::vector<double>> noise_image;   // per channel, scaled to the SNR
  std::vector<SegmentSteering> steering;          // true steering per segment
  std::vector<long> move_frames;
  double measured_snr_db = 0.0;  // +inf when noiseless
};

struct SceneRender {
  WavData mixture;
  SceneTruth truth;
};

// Far-field phase ramp for a uniform linear array, unit norm, phase-aligned
// to the first microphone: h_m = exp(-j 2 pi f_k (m * d) sin(doa) / c) / sqrt(M).
CVec far_field_steering(int mics, double spacing_m, double doa_deg, int k, const StftConfig& cfg);
SteeringField far_field_steering_field(int mics, double spacing_m, double doa_deg,
                                       const StftConfig& cfg);

SceneRender synthesize(const SceneSpec& spec);

// Ideal ratio mask |S|^2/(|S|^2+|N|^2) from the reference-channel truth.
RealField oracle_mask(const SceneTruth& truth, const StftConfig& cfg, int ref_channel = 0);

struct SignalMetrics {
  double si_sdr_db;
  double seg_snr_db;
};

// Scale-invariant SDR (capped at +60 dB) and segmental SNR of est against
// the clean reference.
SignalMetrics signal_metrics(const std::vector<double>& est, const std::vector<double>& ref);

// Mean per-bin |h_est^H h_true|; optional per-bin weights (e.g. speech
// energy) select the bins that matter.
double mean_steering_cosine(const SteeringField& est, const SteeringField& truth,
                            const std::vector<double>* bin_weights = nullptr);

}  // namespace beamkit

#endif  // BEAMKIT_SCENE_HPP
