// common.hpp
// Shared scalar/matrix aliases and error types.

#ifndef BEAMKIT_COMMON_HPP
#define BEAMKIT_COMMON_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace beamkit {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RealField = Eigen::ArrayXXd;  // frame-major [T x K] fields (masks, TVVs, weights)

// Invalid arguments, malformed files, contract violations in configs.
class InvalidInput : public std::runtime_error {
 public:
  explicit InvalidInput(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical breakdown: singular solves, collapsed recursions, non-convergence.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace beamkit

#endif  // BEAMKIT_COMMON_HPP
