#include "beamkit/mask_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>

namespace beamkit {

namespace {

constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f32(std::string& out, float f) {
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  put_u32(out, u);
}

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::uint32_t get_u32(const std::string& bytes, size_t off) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + off);
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

float get_f32(const std::string& bytes, size_t off) {
  const std::uint32_t u = get_u32(bytes, off);
  float f;
  std::memcpy(&f, &u, 4);
  return f;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("short write: " + path);
}

}  // namespace

RealField read_mask(const std::string& path) {
  const std::string bytes = read_all(path);
  if (bytes.size() < 16 || bytes.compare(0, 4, "BKM1") != 0)
    throw IoError("bad mask file magic: " + path);
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kFormatVersion) throw IoError("unsupported mask file version: " + path);
  const std::uint32_t t_count = get_u32(bytes, 8);
  const std::uint32_t k_count = get_u32(bytes, 12);
  const size_t need = 16 + 4ull * t_count * k_count;
  if (bytes.size() < need) throw IoError("truncated mask file: " + path);

  RealField mask(t_count, k_count);
  long clamped = 0;
  size_t off = 16;
  for (std::uint32_t t = 0; t < t_count; ++t) {
    for (std::uint32_t k = 0; k < k_count; ++k, off += 4) {
      const double v = get_f32(bytes, off);
      if (std::isnan(v)) throw IoError("NaN mask entry: " + path);
      const double c = std::clamp(v, 0.0, 1.0);
      if (c != v) ++clamped;
      mask(t, k) = c;
    }
  }
  if (clamped > 0)
    std::cerr << "warning: " << path << ": clamped " << clamped << " mask values to [0,1]\n";
  return mask;
}

void write_mask(const RealField& mask, const std::string& path) {
  if (!mask.isFinite().all()) throw InvalidInput("write_mask: non-finite entries");
  std::string out;
  out.reserve(16 + 4ull * mask.size());
  out += "BKM1";
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(mask.rows()));
  put_u32(out, static_cast<std::uint32_t>(mask.cols()));
  for (long t = 0; t < mask.rows(); ++t)
    for (long k = 0; k < mask.cols(); ++k) put_f32(out, static_cast<float>(mask(t, k)));
  write_file(path, out);
}

SteeringField read_steering(const std::string& path) {
  const std::string bytes = read_all(path);
  if (bytes.size() < 16 || bytes.compare(0, 4, "BKH1") != 0)
    throw IoError("bad steering file magic: " + path);
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kFormatVersion) throw IoError("unsupported steering file version: " + path);
  const std::uint32_t k_count = get_u32(bytes, 8);
  const std::uint32_t m_count = get_u32(bytes, 12);
  const size_t need = 16 + 8ull * k_count * m_count;
  if (bytes.size() < need) throw IoError("truncated steering file: " + path);

  SteeringField field;
  field.h.reserve(k_count);
  size_t off = 16;
  long renormalized = 0;
  for (std::uint32_t k = 0; k < k_count; ++k) {
    CVec h(m_count);
    for (std::uint32_t m = 0; m < m_count; ++m, off += 8) {
      const double re = get_f32(bytes, off);
      const double im = get_f32(bytes, off + 4);
      if (std::isnan(re) || std::isnan(im)) throw IoError("NaN steering entry: " + path);
      h(m) = Complex(re, im);
    }
    const double norm = h.norm();
    if (norm <= 0.0) throw IoError("zero steering vector in bin " + std::to_string(k));
    if (std::abs(norm - 1.0) > 1e-3) ++renormalized;
    // vectors already unit at float precision pass through untouched so that
    // read/write round trips stay byte-identical
    field.h.push_back(std::abs(norm - 1.0) > 1e-6 ? CVec(h / norm) : h);
  }
  if (renormalized > 0)
    std::cerr << "warning: " << path << ": re-normalized " << renormalized
              << " steering vectors (norm off by > 1e-3)\n";
  return field;
}

void write_steering(const SteeringField& field, const std::string& path) {
  std::string out;
  out.reserve(16 + 8ull * field.bins() * field.mics());
  out += "BKH1";
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(field.bins()));
  put_u32(out, static_cast<std::uint32_t>(field.mics()));
  for (const auto& h : field.h) {
    if (!h.allFinite()) throw InvalidInput("write_steering: non-finite entries");
    for (long m = 0; m < h.size(); ++m) {
      put_f32(out, static_cast<float>(h(m).real()));
      put_f32(out, static_cast<float>(h(m).imag()));
    }
  }
  write_file(path, out);
}

}  // namespace beamkit
