#include "evsplat/gaussian_cloud.hpp"

#include <cmath>
#include <sstream>

namespace evsplat {

GaussianCloud GaussianCloud::sized(std::size_t n, int sh_degree) {
  if (sh_degree < 0 || sh_degree > 3)
    throw ContractViolation("cloud: sh_degree must be in [0, 3]");
  GaussianCloud c;
  c.sh_degree = sh_degree;
  c.means.assign(n, Vec3::Zero());
  c.log_scales.assign(n, Vec3::Zero());
  c.rotations.assign(n, Vec4(1, 0, 0, 0));
  c.opacity_logits.assign(n, 0.0);
  c.sh.assign(n * c.sh_stride(), 0.0);
  return c;
}

void GaussianCloud::push_back(const Vec3& mean, const Vec3& log_scale, const Vec4& rotation,
                              double opacity_logit, const double* sh_block) {
  means.push_back(mean);
  log_scales.push_back(log_scale);
  rotations.push_back(rotation);
  opacity_logits.push_back(opacity_logit);
  sh.insert(sh.end(), sh_block, sh_block + sh_stride());
}

void GaussianCloud::apply_keep_mask(const std::vector<std::uint8_t>& keep) {
  if (keep.size() != size()) throw ContractViolation("cloud: keep mask length mismatch");
  const int stride = sh_stride();
  std::size_t w = 0;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (!keep[i]) continue;
    if (w != i) {
      means[w] = means[i];
      log_scales[w] = log_scales[i];
      rotations[w] = rotations[i];
      opacity_logits[w] = opacity_logits[i];
      std::copy(sh.begin() + i * stride, sh.begin() + (i + 1) * stride, sh.begin() + w * stride);
    }
    ++w;
  }
  means.resize(w);
  log_scales.resize(w);
  rotations.resize(w);
  opacity_logits.resize(w);
  sh.resize(w * stride);
}

void GaussianCloud::validate() const {
  if (sh_degree < 0 || sh_degree > 3)
    throw ContractViolation("cloud: sh_degree must be in [0, 3]");
  const std::size_t n = size();
  if (log_scales.size() != n || rotations.size() != n || opacity_logits.size() != n ||
      sh.size() != n * static_cast<std::size_t>(sh_stride()))
    throw ContractViolation("cloud: parameter array lengths disagree");
  for (std::size_t i = 0; i < n; ++i) {
    const bool ok = means[i].allFinite() && log_scales[i].allFinite() &&
                    rotations[i].allFinite() && std::isfinite(opacity_logits[i]);
    if (!ok) {
      std::ostringstream err;
      err << "gaussian " << i << ": non-finite parameters";
      throw NumericError(err.str());
    }
    if (!(rotations[i].norm() > 0.0)) {
      std::ostringstream err;
      err << "gaussian " << i << ": zero-norm rotation quaternion";
      throw NumericError(err.str());
    }
  }
  for (std::size_t k = 0; k < sh.size(); ++k)
    if (!std::isfinite(sh[k])) {
      std::ostringstream err;
      err << "gaussian " << k / sh_stride() << ": non-finite sh coefficient";
      throw NumericError(err.str());
    }
}

void GaussianCloud::renormalize_rotations() {
  for (auto& q : rotations) {
    const double n = q.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw NumericError("cloud: rotation became degenerate");
    q /= n;
  }
}

Mat3 rotation_from_quat(const Vec4& q) {
  const double n = q.norm();
  if (!(n > 0.0) || !std::isfinite(n))
    throw NumericError("rotation_from_quat: zero or non-finite quaternion");
  const double w = q[0] / n, x = q[1] / n, y = q[2] / n, z = q[3] / n;
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
       2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
       2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

Mat3 covariance_from_params(const Vec3& log_scale, const Vec4& rotation) {
  const Mat3 r = rotation_from_quat(rotation);
  const Vec3 s = log_scale.array().exp();
  // M = R * S, covariance = M * M^T
  Mat3 m = r;
  m.col(0) *= s[0];
  m.col(1) *= s[1];
  m.col(2) *= s[2];
  return m * m.transpose();
}

}  // namespace evsplat
