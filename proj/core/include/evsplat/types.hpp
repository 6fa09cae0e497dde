#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace evsplat {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat23 = Eigen::Matrix<double, 2, 3>;
using Mat34 = Eigen::Matrix<double, 3, 4>;
using Quat = Eigen::Quaterniond;

// A caller broke a documented precondition (wrong shapes, bad ranges,
// inconsistent arguments). Maps to CLI exit code 2.
class ContractViolation : public std::invalid_argument {
 public:
  explicit ContractViolation(const std::string& msg) : std::invalid_argument(msg) {}
};

// Numeric state became unusable (non-finite parameters or loss, degenerate
// rotation encodings). Maps to CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// I/O and format problems (missing files, bad magic, truncated records).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// inverse of sigmoid; p must be in (0, 1)
inline double logit(double p) { return std::log(p) - std::log1p(-p); }

inline double sqr(double x) { return x * x; }

}  // namespace evsplat
