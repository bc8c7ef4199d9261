// wav.hpp
// Minimal RIFF/WAVE reader and writer: PCM 16-bit and IEEE float 32-bit,
// interleaved multichannel.

#ifndef BEAMKIT_WAV_HPP
#define BEAMKIT_WAV_HPP

#include <string>
#include <vector>

namespace beamkit {

struct WavData {
  std::vector<std::vector<double>> samples;  // [channel][sample], in [-1, 1] for PCM
  int sample_rate = 0;

  int channels() const { return static_cast<int>(samples.size()); }
  long frames() const { return samples.empty() ? 0 : static_cast<long>(samples[0].size()); }
};

WavData read_wav(const std::string& path);

// format: 16 = PCM16, 32 = IEEE float32 (default; lossless for our pipeline).
void write_wav(const std::string& path, const WavData& wav, int format = 32);

}  // namespace beamkit

#endif  // BEAMKIT_WAV_HPP
