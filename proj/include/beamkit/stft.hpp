// stft.hpp
// Analysis/synthesis between multichannel time signals and the STFT domain.
//
// Conventions:
//  - periodic (DFT-even) Hann window; COLA at 75% overlap
//  - one-sided spectrum, K = window_len/2 + 1 bins
//  - half a window of zero padding at each end, so every input sample is
//    covered by a full analysis frame; istft trims the same padding, giving
//    (T-1)*hop output samples (>= input length, callers truncate)

#ifndef BEAMKIT_STFT_HPP
#define BEAMKIT_STFT_HPP

#include <vector>

#include "beamkit/common.hpp"

namespace beamkit {

struct StftConfig {
  int window_len = 1024;
  int hop = 256;
  double sample_rate = 16000.0;

  int bins() const { return window_len / 2 + 1; }
  // Frame count for a given input length under the padding policy.
  long frame_count(long num_samples) const;
  void validate() const;  // window_len power of two, hop divides window_len
};

struct Spectrogram {
  std::vector<CMat> ch;  // per channel: T x K, row = frame
  StftConfig cfg;

  int channels() const { return static_cast<int>(ch.size()); }
  long frames() const { return ch.empty() ? 0 : ch[0].rows(); }
  int bins() const { return ch.empty() ? 0 : static_cast<int>(ch[0].cols()); }

  // Multichannel snapshot x_k(t) as an M-vector.
  CVec frame_vector(long t, int k) const;
  // All snapshots of one bin as an M x T matrix (column t = x_k(t)).
  CMat bin_matrix(int k) const;
};

std::vector<double> hann_periodic(int len);

// In-place radix-2 FFT (size must be a power of two); inverse applies 1/n.
void fft_inplace(std::vector<Complex>& a, bool inverse);

Spectrogram stft(const std::vector<std::vector<double>>& signal, const StftConfig& cfg);

// Overlap-add synthesis. With trim_edges the half-window padding is removed
// from both ends; otherwise the full padded reconstruction is returned.
std::vector<std::vector<double>> istft(const Spectrogram& spec, bool trim_edges = true);

// Per-bin layout used by the beamforming modules: K matrices of size M x T.
std::vector<CMat> per_bin(const Spectrogram& spec);

}  // namespace beamkit

#endif  // BEAMKIT_STFT_HPP
