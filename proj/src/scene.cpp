#include "beamkit/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "beamkit/config.hpp"
#include "beamkit/rng.hpp"

namespace beamkit {

namespace {
constexpr double kSpeedOfSound = 343.0;  // m/s
constexpr double kSiSdrCap = 60.0;       // dB
}  // namespace

void SceneSpec::validate() const {
  if (mics < 2) throw InvalidInput("scene: mics must be >= 2");
  if (spacing_m <= 0) throw InvalidInput("scene: spacing must be positive");
  if (duration_s <= 0) throw InvalidInput("scene: duration must be positive");
  if (!std::isfinite(snr_db)) throw InvalidInput("scene: snr_db must be finite");
  if (std::abs(target.doa_deg) > 90.0) throw InvalidInput("scene: |doa| must be <= 90 degrees");
  double prev = target.onset_s;
  for (const auto& mv : target.moves) {
    if (mv.time_s <= prev) throw InvalidInput("scene: move events must be strictly increasing");
    if (std::abs(mv.doa_deg) > 90.0) throw InvalidInput("scene: |doa| must be <= 90 degrees");
    prev = mv.time_s;
  }
  stft.validate();
}

SceneSpec parse_scene_spec(const std::string& path) {
  const KeyValueConfig cfg = KeyValueConfig::parse_file(path);
  SceneSpec spec;
  spec.mics = static_cast<int>(cfg.get_long("scene.mics", spec.mics));
  spec.spacing_m = cfg.get_double("scene.spacing", spec.spacing_m);
  spec.duration_s = cfg.get_double("scene.duration_s", spec.duration_s);
  spec.snr_db = cfg.get_double("scene.snr_db", spec.snr_db);
  spec.seed = static_cast<std::uint64_t>(cfg.get_long("scene.seed", 0));
  spec.stft.window_len = static_cast<int>(cfg.get_long("stft.window_len", spec.stft.window_len));
  spec.stft.hop = static_cast<int>(cfg.get_long("stft.hop", spec.stft.hop));
  spec.stft.sample_rate = cfg.get_double("stft.sample_rate", spec.stft.sample_rate);

  spec.target.kind = cfg.get_string("target.kind", spec.target.kind);
  spec.target.path = cfg.get_string("target.path", "");
  spec.target.doa_deg = cfg.get_double("target.doa_deg", spec.target.doa_deg);
  spec.target.onset_s = cfg.get_double("target.onset_s", 0.0);
  spec.target.offset_s = cfg.get_double("target.offset_s", -1.0);
  spec.target.gain = cfg.get_double("target.gain", 1.0);
  spec.target.tone_hz = cfg.get_double("target.tone_hz", 1000.0);
  if (const auto moves = cfg.get("target.move")) {
    for (const auto& item : split_list(*moves)) {
      const auto colon = item.find(':');
      if (colon == std::string::npos)
        throw InvalidInput("scene: move entries are time:doa, got " + item);
      spec.target.moves.push_back(
          {std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
    }
  }

  spec.diffuse_level = cfg.get_double("noise.diffuse_level", spec.diffuse_level);
  spec.diffuse_count = static_cast<int>(cfg.get_long("noise.diffuse_count", spec.diffuse_count));
  spec.sensor_noise = cfg.get_double("noise.sensor_noise", spec.sensor_noise);
  if (const auto points = cfg.get("noise.point")) {
    for (const auto& item : split_list(*points)) {
      const auto colon = item.find(':');
      if (colon == std::string::npos)
        throw InvalidInput("scene: point entries are doa:gain, got " + item);
      spec.point_noises.push_back(
          {std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
    }
  }
  spec.validate();
  return spec;
}

CVec far_field_steering(int mics, double spacing_m, double doa_deg, int k, const StftConfig& cfg) {
  if (std::abs(doa_deg) > 90.0) throw InvalidInput("far_field_steering: |doa| must be <= 90");
  const double f_k = k * cfg.sample_rate / cfg.window_len;
  const double delay_per_mic = spacing_m * std::sin(doa_deg * M_PI / 180.0) / kSpeedOfSound;
  CVec h(mics);
  const double scale = 1.0 / std::sqrt(static_cast<double>(mics));
  for (int m = 0; m < mics; ++m)
    h(m) = std::polar(scale, -2.0 * M_PI * f_k * m * delay_per_mic);
  return h;
}

SteeringField far_field_steering_field(int mics, double spacing_m, double doa_deg,
                                       const StftConfig& cfg) {
  SteeringField field;
  field.h.reserve(cfg.bins());
  for (int k = 0; k < cfg.bins(); ++k)
    field.h.push_back(far_field_steering(mics, spacing_m, doa_deg, k, cfg));
  return field;
}

namespace {

std::vector<double> generate_speechlike(long n, double fs, Rng& rng) {
  std::vector<double> out(n, 0.0);
  long pos = 0;
  while (pos < n) {
    const long active = static_cast<long>(rng.uniform(0.08, 0.35) * fs);
    const long pause = static_cast<long>(rng.uniform(0.04, 0.25) * fs);
    const double amp = rng.uniform(0.5, 1.0);
    for (long i = 0; i < active && pos + i < n; ++i) {
      const double env = std::sin(M_PI * i / static_cast<double>(active));
      out[pos + i] = amp * env * env * rng.normal();
    }
    pos += active + pause;
  }
  // one-pole lowpass for a speech-like spectral tilt
  double state = 0.0;
  for (long i = 0; i < n; ++i) {
    state = 0.7 * state + 0.3 * out[i];
    out[i] = state;
  }
  return out;
}

std::vector<double> generate_source(const SourceSpec& src, long n, double fs, Rng& rng) {
  std::vector<double> s;
  if (src.kind == "speechlike") {
    s = generate_speechlike(n, fs, rng);
  } else if (src.kind == "tone") {
    s.resize(n);
    for (long i = 0; i < n; ++i) s[i] = std::sin(2.0 * M_PI * src.tone_hz * i / fs);
  } else if (src.kind == "noise") {
    s.resize(n);
    for (long i = 0; i < n; ++i) s[i] = rng.normal();
  } else if (src.kind == "file") {
    WavData wav;
    try {
      wav = read_wav(src.path);
    } catch (const IoError& e) {
      throw InvalidInput(std::string("scene: unreadable source audio: ") + e.what());
    }
    if (wav.sample_rate != static_cast<int>(fs))
      throw InvalidInput("scene: source sample rate mismatch (resampling unsupported)");
    s.assign(n, 0.0);
    const long copy = std::min<long>(n, wav.frames());
    std::copy(wav.samples[0].begin(), wav.samples[0].begin() + copy, s.begin());
  } else {
    throw InvalidInput("scene: unknown source kind: " + src.kind);
  }
  // onset/offset gating
  const long on = std::max<long>(0, static_cast<long>(src.onset_s * fs));
  const long off = src.offset_s < 0 ? n : std::min<long>(n, static_cast<long>(src.offset_s * fs));
  for (long i = 0; i < n; ++i)
    if (i < on || i >= off) s[i] = 0.0;
  for (auto& v : s) v *= src.gain;
  return s;
}

// Renders a source to channel images by per-frame steering in the STFT
// domain (narrowband far-field model); doa_of_frame picks the segment.
std::vector<std::vector<double>> render_images(const std::vector<double>& s,
                                               const SceneSpec& spec,
                                               const std::vector<SteeringField>& segment_fields,
                                               const std::vector<long>& segment_starts,
                                               long out_len) {
  const Spectrogram src_spec = stft({s}, spec.stft);
  const long t_count = src_spec.frames();
  const int k_count = src_spec.bins();
  Spectrogram multi;
  multi.cfg = spec.stft;
  multi.ch.assign(spec.mics, CMat::Zero(t_count, k_count));
  size_t seg = 0;
  for (long t = 0; t < t_count; ++t) {
    while (seg + 1 < segment_starts.size() && t >= segment_starts[seg + 1]) ++seg;
    const SteeringField& field = segment_fields[seg];
    for (int k = 0; k < k_count; ++k) {
      const Complex v = src_spec.ch[0](t, k);
      for (int m = 0; m < spec.mics; ++m) multi.ch[m](t, k) = field.h[k](m) * v;
    }
  }
  std::vector<std::vector<double>> images = istft(multi);
  for (auto& ch : images) ch.resize(out_len, 0.0);
  return images;
}

void accumulate(std::vector<std::vector<double>>& acc,
                const std::vector<std::vector<double>>& add, double gain) {
  for (size_t m = 0; m < acc.size(); ++m)
    for (size_t i = 0; i < acc[m].size(); ++i) acc[m][i] += gain * add[m][i];
}

}  // namespace

SceneRender synthesize(const SceneSpec& spec) {
  spec.validate();
  const double fs = spec.stft.sample_rate;
  const long n = static_cast<long>(std::llround(spec.duration_s * fs));
  if (n < spec.stft.window_len) throw InvalidInput("scene: duration shorter than one window");
  Rng rng(spec.seed);

  // target segments: initial DOA plus one segment per move event
  std::vector<long> segment_starts{0};
  std::vector<double> segment_doas{spec.target.doa_deg};
  for (const auto& mv : spec.target.moves) {
    segment_starts.push_back(std::lround(mv.time_s * fs / spec.stft.hop));
    segment_doas.push_back(mv.doa_deg);
  }
  std::vector<SteeringField> segment_fields;
  for (double doa : segment_doas)
    segment_fields.push_back(far_field_steering_field(spec.mics, spec.spacing_m, doa, spec.stft));

  const std::vector<double> src = generate_source(spec.target, n, fs, rng);
  SceneRender render;
  render.truth.target_image = render_images(src, spec, segment_fields, segment_starts, n);
  for (size_t s = 0; s < segment_starts.size(); ++s) {
    render.truth.steering.push_back({segment_starts[s], segment_doas[s], segment_fields[s]});
    if (s > 0) render.truth.move_frames.push_back(segment_starts[s]);
  }

  // noise image: independent plane waves spread across the aperture plus an
  // uncorrelated sensor floor, then explicit point interferers
  std::vector<std::vector<double>> noise(spec.mics, std::vector<double>(n, 0.0));
  bool any_noise = false;
  if (spec.diffuse_level > 0.0 && spec.diffuse_count > 0) {
    any_noise = true;
    for (int d = 0; d < spec.diffuse_count; ++d) {
      const double doa = -80.0 + 160.0 * d / std::max(1, spec.diffuse_count - 1);
      std::vector<double> w(n);
      for (long i = 0; i < n; ++i) w[i] = rng.normal();
      const std::vector<SteeringField> fields{
          far_field_steering_field(spec.mics, spec.spacing_m, doa, spec.stft)};
      accumulate(noise, render_images(w, spec, fields, {0}, n),
                 spec.diffuse_level / std::sqrt(static_cast<double>(spec.diffuse_count)));
    }
    if (spec.sensor_noise > 0.0) {
      for (int m = 0; m < spec.mics; ++m)
        for (long i = 0; i < n; ++i)
          noise[m][i] += spec.diffuse_level * spec.sensor_noise * rng.normal();
    }
  }
  for (const auto& pt : spec.point_noises) {
    any_noise = true;
    std::vector<double> w(n);
    for (long i = 0; i < n; ++i) w[i] = rng.normal();
    const std::vector<SteeringField> fields{
        far_field_steering_field(spec.mics, spec.spacing_m, pt.doa_deg, spec.stft)};
    accumulate(noise, render_images(w, spec, fields, {0}, n), pt.gain);
  }

  // scale the noise to the requested SNR, measured on the reference channel
  // over the speech-active span
  if (any_noise) {
    const long on = std::max<long>(0, static_cast<long>(spec.target.onset_s * fs));
    const long off = spec.target.offset_s < 0
                         ? n
                         : std::min<long>(n, static_cast<long>(spec.target.offset_s * fs));
    double p_s = 0.0, p_n = 0.0;
    for (long i = on; i < off; ++i) {
      p_s += render.truth.target_image[0][i] * render.truth.target_image[0][i];
      p_n += noise[0][i] * noise[0][i];
    }
    if (p_s <= 0.0 || p_n <= 0.0) throw NumericalError("scene: cannot measure SNR");
    const double gain = std::sqrt(p_s / (p_n * std::pow(10.0, spec.snr_db / 10.0)));
    for (auto& ch : noise)
      for (auto& v : ch) v *= gain;
    render.truth.measured_snr_db = 10.0 * std::log10(p_s / (p_n * gain * gain));
  } else {
    render.truth.measured_snr_db = std::numeric_limits<double>::infinity();
  }
  render.truth.noise_image = noise;

  render.mixture.sample_rate = static_cast<int>(fs);
  render.mixture.samples = render.truth.target_image;
  accumulate(render.mixture.samples, noise, 1.0);
  return render;
}

RealField oracle_mask(const SceneTruth& truth, const StftConfig& cfg, int ref_channel) {
  const Spectrogram s = stft({truth.target_image.at(ref_channel)}, cfg);
  const Spectrogram n = stft({truth.noise_image.at(ref_channel)}, cfg);
  const RealField ps = s.ch[0].cwiseAbs2().array();
  const RealField pn = n.ch[0].cwiseAbs2().array();
  RealField mask(ps.rows(), ps.cols());
  for (long t = 0; t < ps.rows(); ++t)
    for (long k = 0; k < ps.cols(); ++k) {
      const double denom = ps(t, k) + pn(t, k);
      mask(t, k) = denom > 0.0 ? ps(t, k) / denom : 0.0;
    }
  return mask;
}

SignalMetrics signal_metrics(const std::vector<double>& est, const std::vector<double>& ref) {
  if (est.size() != ref.size()) throw InvalidInput("signal_metrics: length mismatch");
  if (est.empty()) throw InvalidInput("signal_metrics: empty signals");
  const long n = static_cast<long>(est.size());

  double rr = 0.0, re = 0.0;
  for (long i = 0; i < n; ++i) {
    rr += ref[i] * ref[i];
    re += ref[i] * est[i];
  }
  if (rr <= 0.0) throw InvalidInput("signal_metrics: silent reference");
  const double scale = re / rr;
  double target_e = 0.0, err_e = 0.0;
  for (long i = 0; i < n; ++i) {
    const double t = scale * ref[i];
    const double e = est[i] - t;
    target_e += t * t;
    err_e += e * e;
  }
  double si_sdr;
  if (err_e <= 0.0 || target_e / err_e > std::pow(10.0, kSiSdrCap / 10.0))
    si_sdr = kSiSdrCap;
  else
    si_sdr = 10.0 * std::log10(target_e / err_e);

  // segmental SNR: 256-sample segments, per-segment clamp [-10, 35] dB,
  // active segments only
  const long seg_len = 256;
  double max_seg_energy = 0.0;
  for (long start = 0; start + seg_len <= n; start += seg_len) {
    double e = 0.0;
    for (long i = start; i < start + seg_len; ++i) e += ref[i] * ref[i];
    max_seg_energy = std::max(max_seg_energy, e);
  }
  double acc = 0.0;
  long count = 0;
  for (long start = 0; start + seg_len <= n; start += seg_len) {
    double se = 0.0, ee = 0.0;
    for (long i = start; i < start + seg_len; ++i) {
      se += ref[i] * ref[i];
      ee += (est[i] - ref[i]) * (est[i] - ref[i]);
    }
    if (se <= 1e-10 * max_seg_energy) continue;
    const double snr = ee > 0.0 ? 10.0 * std::log10(se / ee) : 35.0;
    acc += std::clamp(snr, -10.0, 35.0);
    ++count;
  }
  return {si_sdr, count > 0 ? acc / count : 0.0};
}

double mean_steering_cosine(const SteeringField& est, const SteeringField& truth,
                            const std::vector<double>* bin_weights) {
  if (est.bins() != truth.bins()) throw InvalidInput("mean_steering_cosine: bin count mismatch");
  double acc = 0.0, wsum = 0.0;
  for (int k = 0; k < est.bins(); ++k) {
    const double w = bin_weights ? (*bin_weights)[k] : 1.0;
    if (w <= 0.0) continue;
    acc += w * steering_cosine(est.h[k].normalized(), truth.h[k].normalized());
    wsum += w;
  }
  return wsum > 0.0 ? acc / wsum : 0.0;
}

}  // namespace beamkit
