// mask_io.hpp
// Bit-exact external representation of mask tensors ("BKM1") and steering
// fields ("BKH1") so masks can be produced by external tooling and consumed
// reproducibly. Little-endian, no compression.
//
//   mask file:     "BKM1" | u32 version | u32 T | u32 K | T*K float32 (row-major by frame)
//   steering file: "BKH1" | u32 version | u32 K | u32 M | K*M complex64 (float32 re,im)

#ifndef BEAMKIT_MASK_IO_HPP
#define BEAMKIT_MASK_IO_HPP

#include <string>

#include "beamkit/common.hpp"
#include "beamkit/sve.hpp"

namespace beamkit {

// Values outside [0,1] are clamped on read with a warning on stderr; NaN is
// an error, as is any truncation.
RealField read_mask(const std::string& path);
void write_mask(const RealField& mask, const std::string& path);

// Per-bin vectors are re-normalized on read; a warning is emitted when the
// stored norm is off by more than 1e-3.
SteeringField read_steering(const std::string& path);
void write_steering(const SteeringField& field, const std::string& path);

}  // namespace beamkit

#endif  // BEAMKIT_MASK_IO_HPP
