#pragma once

#include "evsplat/types.hpp"

#include <cstddef>
#include <vector>

namespace evsplat {

// Structure-of-arrays store for the optimizable scene. Rotations are
// quaternions in (w, x, y, z) order, kept near unit norm by the trainer but
// normalized again wherever a rotation matrix is built. SH coefficients are
// packed per Gaussian as basis-major blocks: block[b * 3 + c] for basis b and
// color channel c.
struct GaussianCloud {
  std::vector<Vec3> means;
  std::vector<Vec3> log_scales;
  std::vector<Vec4> rotations;
  std::vector<double> opacity_logits;
  std::vector<double> sh;
  int sh_degree = 0;

  std::size_t size() const { return means.size(); }
  int basis_count() const { return (sh_degree + 1) * (sh_degree + 1); }
  int sh_stride() const { return 3 * basis_count(); }

  double* sh_block(std::size_t i) { return sh.data() + i * sh_stride(); }
  const double* sh_block(std::size_t i) const { return sh.data() + i * sh_stride(); }

  static GaussianCloud sized(std::size_t n, int sh_degree);

  void push_back(const Vec3& mean, const Vec3& log_scale, const Vec4& rotation,
                 double opacity_logit, const double* sh_block);

  // keep[i] == 0 drops Gaussian i; preserves relative order
  void apply_keep_mask(const std::vector<std::uint8_t>& keep);

  // throws ContractViolation on inconsistent array lengths or bad degree,
  // NumericError (naming the index) on non-finite parameters
  void validate() const;

  void renormalize_rotations();
};

// world covariance R(q) * diag(exp(2*log_scale)) * R(q)^T; quaternion is
// normalized first (zero-norm quaternions raise NumericError)
Mat3 covariance_from_params(const Vec3& log_scale, const Vec4& rotation);

// rotation matrix of a (w,x,y,z) quaternion after normalization
Mat3 rotation_from_quat(const Vec4& q);

}  // namespace evsplat
