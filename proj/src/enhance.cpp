#include "beamkit/enhance.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "beamkit/mask_io.hpp"
#include "beamkit/scene.hpp"
#include "beamkit/wav.hpp"

namespace beamkit {

RunConfig RunConfig::from_config(const KeyValueConfig& cfg) {
  RunConfig rc;
  rc.mode = cfg.get_string("mode", rc.mode);

  const std::string bf = cfg.get_string("beamformer", variant_name(rc.beamformer));
  const auto bf_parsed = variant_from_name(bf);
  if (!bf_parsed) throw InvalidInput("config: unknown beamformer: " + bf);
  rc.beamformer = *bf_parsed;

  const std::string sve = cfg.get_string("sve", sve_mode_name(rc.sve));
  const auto sve_parsed = sve_mode_from_name(sve);
  if (!sve_parsed) throw InvalidInput("config: unknown sve mode: " + sve);
  rc.sve = *sve_parsed;

  rc.a1 = cfg.get_double("penalty.a1", rc.a1);
  rc.az = cfg.get_double("penalty.az", rc.az);
  rc.iters = static_cast<int>(cfg.get_long("iters", rc.iters));
  rc.seed = static_cast<std::uint64_t>(cfg.get_long("seed", 0));
  rc.ica_init_identity = cfg.get_bool("ica.init_identity", false);
  const std::string nm = cfg.get_string("noise_model", "auto");
  if (nm == "gaussian")
    rc.noise_model = NoiseModel::Gaussian;
  else if (nm == "laplacian")
    rc.noise_model = NoiseModel::Laplacian;
  else if (nm != "auto")
    throw InvalidInput("config: unknown noise_model: " + nm);

  rc.stft.window_len = static_cast<int>(cfg.get_long("stft.window_len", rc.stft.window_len));
  rc.stft.hop = static_cast<int>(cfg.get_long("stft.hop", rc.stft.hop));
  rc.stft.sample_rate = cfg.get_double("stft.sample_rate", rc.stft.sample_rate);

  rc.model.tau0 = static_cast<int>(cfg.get_long("model.tau0", rc.model.tau0));
  rc.model.alpha_lambda = cfg.get_double("model.alpha_lambda", rc.model.alpha_lambda);
  rc.model.phi0 = cfg.get_double("model.phi0", rc.model.phi0);
  rc.model.mask_floor = cfg.get_double("model.mask_floor", rc.model.mask_floor);
  if (const auto excl = cfg.get("model.exclude_channels"))
    for (const auto& item : split_list(*excl))
      rc.model.excluded_channels.push_back(std::stoi(item));

  rc.online.alpha_initial = cfg.get_double("online.alpha_initial", rc.online.alpha_initial);
  rc.online.alpha_after = cfg.get_double("online.alpha_after", rc.online.alpha_after);
  rc.online.t_switch = static_cast<int>(cfg.get_long("online.t_switch", rc.online.t_switch));
  rc.online.gamma = cfg.get_double("online.gamma", rc.online.gamma);
  rc.online.gamma_n = cfg.get_double("online.gamma_n", rc.online.gamma_n);
  rc.online.nu_initial = cfg.get_double("online.nu_initial", rc.online.nu_initial);
  rc.online.nu_after = cfg.get_double("online.nu_after", rc.online.nu_after);
  rc.online.epsilon = cfg.get_double("online.epsilon", rc.online.epsilon);
  rc.online.eig_iters = static_cast<int>(cfg.get_long("online.eig_iters", rc.online.eig_iters));
  rc.online.delta_init = cfg.get_double("online.delta_init", rc.online.delta_init);

  rc.paths.input = cfg.get_string("paths.input", "");
  rc.paths.mask = cfg.get_string("paths.mask", "");
  rc.paths.steering = cfg.get_string("paths.steering", "");
  rc.paths.output = cfg.get_string("paths.output", "");
  rc.paths.report = cfg.get_string("paths.report", "");
  rc.paths.truth_steering = cfg.get_string("paths.truth_steering", "");
  return rc;
}

void RunConfig::validate() const {
  if (mode != "batch" && mode != "online")
    throw InvalidInput("config: mode must be batch or online");
  if (paths.input.empty()) throw InvalidInput("config: paths.input is required");
  if (requires_mask(beamformer) && paths.mask.empty())
    throw InvalidInput("config violates invariant: beamformer=" + variant_name(beamformer) +
                       " requires a mask file (paths.mask)");
  if (sve == SveMode::Fixed && paths.steering.empty())
    throw InvalidInput("config violates invariant: sve=fixed requires a steering file "
                       "(paths.steering)");
  if (sve == SveMode::IcaPc && !std::isfinite(a1))
    throw InvalidInput("config violates invariant: sve=ica_pc requires finite penalty.a1");
  if (sve == SveMode::MaskOnly && paths.mask.empty())
    throw InvalidInput("config violates invariant: sve=mask_only requires a mask file");
  if (mode == "online" && (sve == SveMode::IcaLc || sve == SveMode::IcaPc))
    throw InvalidInput("config: online mode supports sve in {fixed, mask_only, wscm, ica_hc}");
  if (iters < 0) throw InvalidInput("config: iters must be >= 0");
  stft.validate();
}

NoiseModel RunConfig::effective_noise_model() const {
  if (noise_model) return *noise_model;
  return beamformer == BeamformerVariant::MaskSMldr ? NoiseModel::Laplacian
                                                    : NoiseModel::Gaussian;
}

std::string EnhanceReport::to_text() const {
  std::ostringstream os;
  os << "mode               " << mode << "\n"
     << "beamformer         " << beamformer << "\n"
     << "sve                " << sve << "\n"
     << "channels           " << channels << "\n"
     << "frames x bins      " << frames << " x " << bins << "\n"
     << "runtime_s          " << runtime_s << "\n"
     << "max |w1^H h - 1|   " << max_distortionless_residual << "\n"
     << "max |w_m^H h|      " << max_null_residual << "\n"
     << "max |w^H Hz w - 1| " << max_norm_residual << "\n"
     << "max ||WA - I||     " << max_wa_residual << "\n"
     << "recoveries         " << recoveries << "\n";
  if (sve_cosine_mean >= 0.0) os << "sve_cosine_mean    " << sve_cosine_mean << "\n";
  return os.str();
}

std::string EnhanceReport::to_json() const {
  nlohmann::json j;
  j["mode"] = mode;
  j["beamformer"] = beamformer;
  j["sve"] = sve;
  j["channels"] = channels;
  j["bins"] = bins;
  j["frames"] = frames;
  j["samples"] = samples;
  j["runtime_s"] = runtime_s;
  j["residuals"]["distortionless"] = max_distortionless_residual;
  j["residuals"]["null"] = max_null_residual;
  j["residuals"]["norm"] = max_norm_residual;
  j["residuals"]["wa_identity"] = max_wa_residual;
  j["recoveries"] = recoveries;
  if (sve_cosine_mean >= 0.0) j["sve_cosine_mean"] = sve_cosine_mean;
  return j.dump(2) + "\n";
}

namespace {

double vec_max(const std::vector<double>& v) {
  double worst = 0.0;
  for (double x : v) worst = std::max(worst, x);
  return worst;
}

}  // namespace

EnhanceReport run_enhance(const RunConfig& cfg) {
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();

  const WavData wav = read_wav(cfg.paths.input);
  if (wav.sample_rate != static_cast<int>(cfg.stft.sample_rate))
    throw InvalidInput("enhance: input sample rate " + std::to_string(wav.sample_rate) +
                       " does not match stft.sample_rate (resampling is unsupported)");
  const Spectrogram spec = stft(wav.samples, cfg.stft);

  std::optional<RealField> mask;
  if (!cfg.paths.mask.empty()) {
    mask = read_mask(cfg.paths.mask);
    if (mask->rows() != spec.frames() || mask->cols() != spec.bins())
      throw InvalidInput("enhance: mask shape " + std::to_string(mask->rows()) + "x" +
                         std::to_string(mask->cols()) + " does not match spectrogram " +
                         std::to_string(spec.frames()) + "x" + std::to_string(spec.bins()));
  }
  std::optional<SteeringField> fixed_h;
  if (!cfg.paths.steering.empty()) {
    fixed_h = read_steering(cfg.paths.steering);
    if (fixed_h->bins() != spec.bins() || fixed_h->mics() != spec.channels())
      throw InvalidInput("enhance: steering file shape does not match input");
  }

  EnhanceReport rep;
  rep.mode = cfg.mode;
  rep.beamformer = variant_name(cfg.beamformer);
  rep.sve = sve_mode_name(cfg.sve);
  rep.channels = spec.channels();
  rep.bins = spec.bins();
  rep.frames = spec.frames();
  rep.samples = wav.frames();

  CMat y;
  SteeringField h_final;

  if (cfg.mode == "batch") {
    if (is_ica_sve(cfg.sve)) {
      IcaConfig ica;
      ica.mode = cfg.sve == SveMode::IcaLc   ? ConstraintMode::Lc
                 : cfg.sve == SveMode::IcaPc ? ConstraintMode::Pc
                                             : ConstraintMode::Hc;
      ica.a1 = cfg.a1;
      ica.az = cfg.az;
      ica.variant = cfg.beamformer;
      ica.noise_model = cfg.effective_noise_model();
      ica.iters = cfg.iters;
      ica.init_identity = cfg.ica_init_identity;
      const IcaResult res = run_batch_ica(spec, mask ? &*mask : nullptr, ica, cfg.model);
      y = res.outputs.y;
      h_final = res.steering;
      rep.max_distortionless_residual = vec_max(res.diag.distortionless_residuals);
      rep.max_null_residual = vec_max(res.diag.null_residuals);
      rep.max_norm_residual = vec_max(res.diag.norm_residuals);
      rep.max_wa_residual = vec_max(res.diag.wa_identity_residuals);
    } else {
      const BatchResult res =
          run_batch_with_sve(spec, cfg.sve, cfg.beamformer, mask ? &*mask : nullptr, cfg.iters,
                             cfg.model, fixed_h ? &*fixed_h : nullptr);
      y = res.y;
      h_final = res.steering;
      rep.max_distortionless_residual = vec_max(res.diag.distortionless_residuals);
    }
  } else {
    OnlineParams op = cfg.online;
    op.variant = cfg.beamformer;
    op.noise_model = cfg.effective_noise_model();
    op.sve = cfg.sve;
    op.az = cfg.az;
    op.model = cfg.model;
    OnlineEngine engine(spec.channels(), spec.bins(), op, fixed_h ? &*fixed_h : nullptr);
    y.resize(spec.frames(), spec.bins());
    FrameDiagnostics diag;
    for (long t = 0; t < spec.frames(); ++t) {
      CMat x_t(spec.channels(), spec.bins());
      for (int m = 0; m < spec.channels(); ++m) x_t.row(m) = spec.ch[m].row(t);
      std::optional<Eigen::ArrayXd> mask_row;
      if (mask) mask_row = mask->row(t).transpose();
      y.row(t) = engine.process_frame(x_t, mask_row ? &*mask_row : nullptr, &diag).transpose();
      rep.max_distortionless_residual =
          std::max(rep.max_distortionless_residual, diag.distortionless_residual);
      rep.max_norm_residual = std::max(rep.max_norm_residual, diag.norm_residual);
      rep.max_wa_residual = std::max(rep.max_wa_residual, diag.wa_residual);
    }
    rep.recoveries = engine.total_recoveries();
    h_final = engine.current_steering();
  }

  if (!cfg.paths.truth_steering.empty() && h_final.bins() > 0) {
    const SteeringField truth = read_steering(cfg.paths.truth_steering);
    if (truth.bins() == h_final.bins() && truth.mics() == h_final.mics())
      rep.sve_cosine_mean = mean_steering_cosine(h_final, truth);
  }

  if (!cfg.paths.output.empty()) {
    Spectrogram enhanced;
    enhanced.cfg = cfg.stft;
    enhanced.ch.assign(1, y);
    std::vector<std::vector<double>> out = istft(enhanced);
    out[0].resize(wav.frames());  // trim the synthesis padding to the input length
    WavData out_wav;
    out_wav.sample_rate = wav.sample_rate;
    out_wav.samples = {out[0]};
    write_wav(cfg.paths.output, out_wav);
  }

  rep.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  if (!cfg.paths.report.empty()) {
    std::ofstream os(cfg.paths.report, std::ios::trunc);
    if (!os) throw IoError("cannot write report: " + cfg.paths.report);
    os << rep.to_json();
  }
  return rep;
}

}  // namespace beamkit
