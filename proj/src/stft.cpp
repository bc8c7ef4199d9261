#include "beamkit/stft.hpp"

#include <cmath>

#include "beamkit/parallel.hpp"

namespace beamkit {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

void StftConfig::validate() const {
  if (!power_of_two(window_len)) throw InvalidInput("stft: window_len must be a power of two");
  if (hop <= 0 || window_len % hop != 0) throw InvalidInput("stft: hop must divide window_len");
  if (sample_rate <= 0) throw InvalidInput("stft: sample_rate must be positive");
}

long StftConfig::frame_count(long num_samples) const {
  // (T-1)*hop >= num_samples so the tail is padded by at least half a window.
  return (num_samples + hop - 1) / hop + 1;
}

std::vector<double> hann_periodic(int len) {
  std::vector<double> w(len);
  for (int n = 0; n < len; ++n) w[n] = 0.5 - 0.5 * std::cos(2.0 * M_PI * n / len);
  return w;
}

void fft_inplace(std::vector<Complex>& a, bool inverse) {
  const size_t n = a.size();
  if (!power_of_two(static_cast<int>(n))) throw InvalidInput("fft: size must be a power of two");
  // bit reversal
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const Complex wstep(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      Complex w(1.0, 0.0);
      for (size_t j = 0; j < len / 2; ++j) {
        const Complex u = a[i + j];
        const Complex v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wstep;
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= scale;
  }
}

CVec Spectrogram::frame_vector(long t, int k) const {
  CVec x(channels());
  for (int m = 0; m < channels(); ++m) x(m) = ch[m](t, k);
  return x;
}

CMat Spectrogram::bin_matrix(int k) const {
  const int m_count = channels();
  const long t_count = frames();
  CMat out(m_count, t_count);
  for (int m = 0; m < m_count; ++m) out.row(m) = ch[m].col(k).transpose();
  return out;
}

Spectrogram stft(const std::vector<std::vector<double>>& signal, const StftConfig& cfg) {
  cfg.validate();
  if (signal.empty() || signal[0].empty()) throw InvalidInput("stft: empty signal");
  const long num_samples = static_cast<long>(signal[0].size());
  for (const auto& c : signal) {
    if (static_cast<long>(c.size()) != num_samples)
      throw InvalidInput("stft: channel length mismatch");
    for (double v : c)
      if (!std::isfinite(v)) throw InvalidInput("stft: non-finite input sample");
  }
  if (num_samples < cfg.window_len) throw InvalidInput("stft: signal shorter than one window");

  const int win_len = cfg.window_len;
  const int half = win_len / 2;
  const int num_bins = cfg.bins();
  const long num_frames = cfg.frame_count(num_samples);
  const std::vector<double> win = hann_periodic(win_len);

  Spectrogram spec;
  spec.cfg = cfg;
  spec.ch.resize(signal.size());

  parallel_for(static_cast<int>(signal.size()), [&](int m) {
    CMat& out = spec.ch[m];
    out.resize(num_frames, num_bins);
    std::vector<Complex> buf(win_len);
    const std::vector<double>& x = signal[m];
    for (long t = 0; t < num_frames; ++t) {
      const long start = t * cfg.hop - half;  // position in the unpadded signal
      for (int n = 0; n < win_len; ++n) {
        const long idx = start + n;
        const double s = (idx >= 0 && idx < num_samples) ? x[idx] : 0.0;
        buf[n] = Complex(win[n] * s, 0.0);
      }
      fft_inplace(buf, false);
      for (int k = 0; k < num_bins; ++k) out(t, k) = buf[k];
    }
  });
  return spec;
}

std::vector<std::vector<double>> istft(const Spectrogram& spec, bool trim_edges) {
  spec.cfg.validate();
  if (spec.ch.empty()) throw InvalidInput("istft: empty spectrogram");
  const int win_len = spec.cfg.window_len;
  const int half = win_len / 2;
  const int hop = spec.cfg.hop;
  const long num_frames = spec.frames();
  const int num_bins = spec.bins();
  if (num_bins != spec.cfg.bins()) throw InvalidInput("istft: bin count does not match config");
  for (const auto& c : spec.ch)
    if (!c.allFinite()) throw InvalidInput("istft: non-finite spectrogram entries");

  const long padded_len = (num_frames - 1) * hop + win_len;
  const std::vector<double> win = hann_periodic(win_len);
  std::vector<double> wsum(padded_len, 0.0);
  for (long t = 0; t < num_frames; ++t)
    for (int n = 0; n < win_len; ++n) wsum[t * hop + n] += win[n] * win[n];

  std::vector<std::vector<double>> out(spec.channels());
  parallel_for(spec.channels(), [&](int m) {
    std::vector<double> acc(padded_len, 0.0);
    std::vector<Complex> buf(win_len);
    for (long t = 0; t < num_frames; ++t) {
      // rebuild the full spectrum from the one-sided half
      for (int k = 0; k < num_bins; ++k) buf[k] = spec.ch[m](t, k);
      for (int k = num_bins; k < win_len; ++k) buf[k] = std::conj(buf[win_len - k]);
      fft_inplace(buf, true);
      for (int n = 0; n < win_len; ++n) acc[t * hop + n] += win[n] * buf[n].real();
    }
    for (long p = 0; p < padded_len; ++p)
      acc[p] = wsum[p] > 1e-12 ? acc[p] / wsum[p] : 0.0;
    if (trim_edges)
      out[m].assign(acc.begin() + half, acc.end() - half);
    else
      out[m] = std::move(acc);
  });
  return out;
}

std::vector<CMat> per_bin(const Spectrogram& spec) {
  std::vector<CMat> bins(spec.bins());
  parallel_for(spec.bins(), [&](int k) { bins[k] = spec.bin_matrix(k); });
  return bins;
}

}  // namespace beamkit
