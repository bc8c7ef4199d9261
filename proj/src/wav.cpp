#include "beamkit/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "beamkit/common.hpp"

namespace beamkit {
namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

WavData read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open wav file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const size_t n = bytes.size();
  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
    throw IoError("not a RIFF/WAVE file: " + path);

  int channels = 0, bits = 0, fmt_code = 0, rate = 0;
  size_t data_off = 0, data_len = 0;
  size_t off = 12;
  while (off + 8 <= n) {
    const std::uint32_t chunk_len = read_u32(p + off + 4);
    if (std::memcmp(p + off, "fmt ", 4) == 0) {
      if (off + 8 + 16 > n) throw IoError("truncated fmt chunk: " + path);
      fmt_code = read_u16(p + off + 8);
      channels = read_u16(p + off + 10);
      rate = static_cast<int>(read_u32(p + off + 12));
      bits = read_u16(p + off + 22);
    } else if (std::memcmp(p + off, "data", 4) == 0) {
      data_off = off + 8;
      data_len = chunk_len;
    }
    off += 8 + chunk_len + (chunk_len & 1);
  }
  if (channels <= 0 || data_off == 0) throw IoError("missing fmt/data chunk: " + path);
  if (data_off + data_len > n) throw IoError("truncated data chunk: " + path);

  const bool pcm16 = (fmt_code == 1 && bits == 16);
  const bool f32 = (fmt_code == 3 && bits == 32);
  if (!pcm16 && !f32)
    throw IoError("unsupported wav format (want PCM16 or float32): " + path);

  const int bytes_per = bits / 8;
  const long frames = static_cast<long>(data_len / (static_cast<size_t>(bytes_per) * channels));
  WavData wav;
  wav.sample_rate = rate;
  wav.samples.assign(channels, std::vector<double>(frames, 0.0));
  const unsigned char* d = p + data_off;
  for (long i = 0; i < frames; ++i) {
    for (int c = 0; c < channels; ++c) {
      const unsigned char* s = d + (static_cast<size_t>(i) * channels + c) * bytes_per;
      if (pcm16) {
        const std::int16_t v = static_cast<std::int16_t>(s[0] | (s[1] << 8));
        wav.samples[c][i] = v / 32768.0;
      } else {
        std::uint32_t u = read_u32(s);
        float f;
        std::memcpy(&f, &u, 4);
        wav.samples[c][i] = f;
      }
    }
  }
  return wav;
}

void write_wav(const std::string& path, const WavData& wav, int format) {
  if (wav.samples.empty()) throw InvalidInput("write_wav: no channels");
  if (format != 16 && format != 32) throw InvalidInput("write_wav: format must be 16 or 32");
  const int channels = wav.channels();
  const long frames = wav.frames();
  for (const auto& ch : wav.samples)
    if (static_cast<long>(ch.size()) != frames)
      throw InvalidInput("write_wav: channel length mismatch");

  const int bytes_per = format / 8;
  const std::uint32_t data_len = static_cast<std::uint32_t>(frames * channels * bytes_per);
  std::string out;
  out.reserve(44 + data_len);
  out += "RIFF";
  put_u32(out, 36 + data_len);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, format == 16 ? 1 : 3);  // PCM vs IEEE float
  put_u16(out, static_cast<std::uint16_t>(channels));
  put_u32(out, static_cast<std::uint32_t>(wav.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(wav.sample_rate * channels * bytes_per));
  put_u16(out, static_cast<std::uint16_t>(channels * bytes_per));
  put_u16(out, static_cast<std::uint16_t>(format));
  out += "data";
  put_u32(out, data_len);
  for (long i = 0; i < frames; ++i) {
    for (int c = 0; c < channels; ++c) {
      const double v = wav.samples[c][i];
      if (format == 16) {
        const long q = std::clamp(std::lround(v * 32768.0), -32768l, 32767l);
        put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
      } else {
        const float f = static_cast<float>(v);
        std::uint32_t u;
        std::memcpy(&u, &f, 4);
        put_u32(out, u);
      }
    }
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) throw IoError("short write: " + path);
}

}  // namespace beamkit
