// enhance.hpp
// The run configuration and the enhancement driver shared by the CLI and the
// test suites.

#ifndef BEAMKIT_ENHANCE_HPP
#define BEAMKIT_ENHANCE_HPP

#include <optional>
#include <string>
#include <vector>

#include "beamkit/config.hpp"
#include "beamkit/ica.hpp"
#include "beamkit/online.hpp"

namespace beamkit {

struct RunConfig {
  std::string mode = "batch";  // batch | online
  BeamformerVariant beamformer = BeamformerVariant::MaskSMldr;
  SveMode sve = SveMode::IcaHc;
  double a1 = 50.0;  // distortionless penalty (ica_pc)
  double az = 1.0;   // null penalty (ica_pc / ica_hc)
  int iters = 10;
  std::uint64_t seed = 0;
  bool ica_init_identity = false;
  std::optional<NoiseModel> noise_model;  // defaults per beamformer
  StftConfig stft;
  ModelParams model;
  OnlineParams online;

  struct Paths {
    std::string input, mask, steering, output, report, truth_steering;
  } paths;

  static RunConfig from_config(const KeyValueConfig& cfg);
  // Throws InvalidInput naming the violated invariant.
  void validate() const;
  NoiseModel effective_noise_model() const;
};

struct EnhanceReport {
  std::string mode, beamformer, sve;
  int channels = 0;
  int bins = 0;
  long frames = 0;
  long samples = 0;
  double runtime_s = 0.0;
  double max_distortionless_residual = 0.0;
  double max_null_residual = 0.0;  // LC strict nulls
  double max_norm_residual = 0.0;  // PC/HC noise-row normalization
  double max_wa_residual = 0.0;
  double sve_cosine_mean = -1.0;  // vs provided truth steering; -1 = not scored
  int recoveries = 0;

  std::string to_text() const;
  std::string to_json() const;
};

// Runs the configured pipeline: reads input (and mask/steering sidecars),
// enhances, writes the output wav and report files when paths are set.
EnhanceReport run_enhance(const RunConfig& cfg);

}  // namespace beamkit

#endif  // BEAMKIT_ENHANCE_HPP
