#include "beamkit/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "beamkit/enhance.hpp"
#include "beamkit/mask_io.hpp"
#include "beamkit/scene.hpp"
#include "beamkit/wav.hpp"

namespace beamkit {

namespace fs = std::filesystem;

namespace {

int cmd_simulate(const std::string& spec_path, const std::string& out_dir, long seed_override) {
  SceneSpec spec = parse_scene_spec(spec_path);
  if (seed_override >= 0) spec.seed = static_cast<std::uint64_t>(seed_override);
  fs::create_directories(out_dir);
  const SceneRender render = synthesize(spec);

  const fs::path dir(out_dir);
  write_wav((dir / "mixture.wav").string(), render.mixture);
  WavData target{render.truth.target_image, render.mixture.sample_rate};
  WavData noise{render.truth.noise_image, render.mixture.sample_rate};
  write_wav((dir / "target_image.wav").string(), target);
  write_wav((dir / "noise_image.wav").string(), noise);
  write_mask(oracle_mask(render.truth, spec.stft), (dir / "oracle_mask.bkm").string());

  std::ostringstream manifest;
  manifest << "[scene]\n"
           << "mics = " << spec.mics << "\n"
           << "spacing = " << spec.spacing_m << "\n"
           << "duration_s = " << spec.duration_s << "\n"
           << "seed = " << spec.seed << "\n";
  if (std::isfinite(render.truth.measured_snr_db))
    manifest << "snr_db = " << render.truth.measured_snr_db << "\n";
  else
    manifest << "snr_db = inf\n";
  manifest << "sample_rate = " << spec.stft.sample_rate << "\n\n[stft]\n"
           << "window_len = " << spec.stft.window_len << "\n"
           << "hop = " << spec.stft.hop << "\n\n[files]\n"
           << "mixture = mixture.wav\n"
           << "target_image = target_image.wav\n"
           << "noise_image = noise_image.wav\n"
           << "oracle_mask = oracle_mask.bkm\n";
  for (size_t s = 0; s < render.truth.steering.size(); ++s) {
    const std::string name = "steering_true_seg" + std::to_string(s) + ".bkh";
    write_steering(render.truth.steering[s].field, (dir / name).string());
    manifest << "steering_seg" << s << " = " << name << "\n";
  }
  manifest << "\n[segments]\ncount = " << render.truth.steering.size() << "\n";
  for (size_t s = 0; s < render.truth.steering.size(); ++s) {
    manifest << "seg" << s << "_start_frame = " << render.truth.steering[s].start_frame << "\n"
             << "seg" << s << "_doa = " << render.truth.steering[s].doa_deg << "\n";
  }
  if (!render.truth.move_frames.empty()) {
    manifest << "move_frames = ";
    for (size_t i = 0; i < render.truth.move_frames.size(); ++i)
      manifest << (i ? "," : "") << render.truth.move_frames[i];
    manifest << "\n";
  }
  std::ofstream mf(dir / "manifest.txt", std::ios::trunc);
  if (!mf) throw IoError("cannot write manifest");
  mf << manifest.str();

  std::cout << "scene written to " << out_dir << " ("
            << (std::isfinite(render.truth.measured_snr_db)
                    ? std::to_string(render.truth.measured_snr_db) + " dB SNR"
                    : std::string("SNR=inf, noiseless"))
            << ", " << render.truth.steering.size() << " segment(s))\n";
  return 0;
}

int cmd_eval(const std::string& est_path, const std::string& manifest_path,
             const std::string& steering_path, const std::string& report_path) {
  const fs::path manifest_file = fs::is_directory(manifest_path)
                                     ? fs::path(manifest_path) / "manifest.txt"
                                     : fs::path(manifest_path);
  const KeyValueConfig manifest = KeyValueConfig::parse_file(manifest_file.string());
  const fs::path dir = manifest_file.parent_path();

  const WavData est = read_wav(est_path);
  const WavData clean =
      read_wav((dir / manifest.get_string("files.target_image", "target_image.wav")).string());
  const WavData mix =
      read_wav((dir / manifest.get_string("files.mixture", "mixture.wav")).string());

  std::vector<double> est0 = est.samples[0];
  if (est0.size() != clean.samples[0].size())
    throw InvalidInput("eval: estimate length " + std::to_string(est0.size()) +
                       " does not match truth length " +
                       std::to_string(clean.samples[0].size()));
  const SignalMetrics m = signal_metrics(est0, clean.samples[0]);
  const SignalMetrics base = signal_metrics(mix.samples[0], clean.samples[0]);

  nlohmann::json j;
  j["si_sdr_db"] = m.si_sdr_db;
  j["seg_snr_db"] = m.seg_snr_db;
  j["mixture_si_sdr_db"] = base.si_sdr_db;
  j["si_sdr_improvement_db"] = m.si_sdr_db - base.si_sdr_db;

  if (!steering_path.empty()) {
    const SteeringField est_h = read_steering(steering_path);
    const long seg_count = manifest.get_long("segments.count", 1);
    const std::string key = "files.steering_seg" + std::to_string(seg_count - 1);
    const SteeringField truth_h =
        read_steering((dir / manifest.get_string(key, "steering_true_seg0.bkh")).string());
    j["sve_cosine_mean"] = mean_steering_cosine(est_h, truth_h);
  }

  std::cout << "si_sdr_db          " << m.si_sdr_db << "\n"
            << "seg_snr_db         " << m.seg_snr_db << "\n"
            << "mixture_si_sdr_db  " << base.si_sdr_db << "\n"
            << "si_sdr_improvement " << m.si_sdr_db - base.si_sdr_db << "\n";
  if (j.contains("sve_cosine_mean"))
    std::cout << "sve_cosine_mean    " << j["sve_cosine_mean"].get<double>() << "\n";
  if (!report_path.empty()) {
    std::ofstream os(report_path, std::ios::trunc);
    if (!os) throw IoError("cannot write report: " + report_path);
    os << j.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"beamkit: mask-based statistical beamforming with constrained-ICA steering "
               "estimation"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "synthesize a scene with ground truth");
  std::string scene_spec, out_dir;
  long sim_seed = -1;
  sim->add_option("scene_spec", scene_spec, "scene spec file")->required();
  sim->add_option("out_dir", out_dir, "output directory")->required();
  sim->add_option("--seed", sim_seed, "override the scene seed");

  // enhance
  auto* enh = app.add_subcommand("enhance", "run a beamformer over a recording");
  std::string config_path, in_path, mode, beamformer, sve, mask_path, steering_path, out_path,
      report_path, truth_steering;
  long seed = -1, iters = -1;
  enh->add_option("--config", config_path, "run config file (dotted keys)");
  enh->add_option("--input", in_path, "input wav");
  enh->add_option("--mode", mode, "batch | online");
  enh->add_option("--beamformer", beamformer,
                  "mpdr | mask_mvdr | mldr | mask_mldr | mask_p_mldr | mask_s_mldr");
  enh->add_option("--sve", sve, "fixed | mask_only | wscm | ica_lc | ica_pc | ica_hc");
  enh->add_option("--mask", mask_path, "mask file (BKM1)");
  enh->add_option("--steering", steering_path, "steering file (BKH1)");
  enh->add_option("--out", out_path, "output wav");
  enh->add_option("--report", report_path, "report json");
  enh->add_option("--seed", seed, "seed recorded in the run");
  enh->add_option("--iters", iters, "batch iterations");
  enh->add_option("--truth-steering", truth_steering, "true steering for cosine diagnostics");

  // eval
  auto* ev = app.add_subcommand("eval", "score an enhanced wav against scene truth");
  std::string est_path, manifest_path, eval_steering, eval_report;
  ev->add_option("--est", est_path, "estimated wav")->required();
  ev->add_option("--truth", manifest_path, "truth manifest file or scene directory")->required();
  ev->add_option("--steering", eval_steering, "estimated steering field to score");
  ev->add_option("--report", eval_report, "report json");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (sim->parsed()) return cmd_simulate(scene_spec, out_dir, sim_seed);
    if (ev->parsed()) return cmd_eval(est_path, manifest_path, eval_steering, eval_report);

    KeyValueConfig cfg = config_path.empty() ? KeyValueConfig::parse_text("", "<flags>")
                                             : KeyValueConfig::parse_file(config_path);
    if (!in_path.empty()) cfg.set("paths.input", in_path);
    if (!mode.empty()) cfg.set("mode", mode);
    if (!beamformer.empty()) cfg.set("beamformer", beamformer);
    if (!sve.empty()) cfg.set("sve", sve);
    if (!mask_path.empty()) cfg.set("paths.mask", mask_path);
    if (!steering_path.empty()) cfg.set("paths.steering", steering_path);
    if (!out_path.empty()) cfg.set("paths.output", out_path);
    if (!report_path.empty()) cfg.set("paths.report", report_path);
    if (!truth_steering.empty()) cfg.set("paths.truth_steering", truth_steering);
    if (seed >= 0) cfg.set("seed", std::to_string(seed));
    if (iters >= 0) cfg.set("iters", std::to_string(iters));

    const RunConfig rc = RunConfig::from_config(cfg);
    for (const auto& key : cfg.unused_keys())
      std::cerr << "warning: unrecognized config key: " << key << "\n";
    const EnhanceReport rep = run_enhance(rc);
    std::cout << rep.to_text();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace beamkit
