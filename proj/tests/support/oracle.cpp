#include "support/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace evsplat::testing {
namespace {

// All model constants restated here on purpose so the reference does not
// inherit a typo from the library under test.
constexpr double kFloor2d = 0.3;
constexpr double kCutQ = 9.0;       // (3 sigma)^2
constexpr double kAlphaMin = 1.0 / 255.0;
constexpr double kAlphaMax = 0.99;

Mat3 quat_to_rot(const Vec4& q_raw) {
  const Vec4 q = q_raw / q_raw.norm();
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

// Real spherical harmonics basis up to degree 3, typed in from the standard
// table rather than shared with the library.
void sh_basis_ref(const Vec3& d, int degree, double* out) {
  const double x = d[0], y = d[1], z = d[2];
  out[0] = 0.28209479177387814;
  if (degree < 1) return;
  out[1] = -0.4886025119029199 * y;
  out[2] = 0.4886025119029199 * z;
  out[3] = -0.4886025119029199 * x;
  if (degree < 2) return;
  out[4] = 1.0925484305920792 * x * y;
  out[5] = -1.0925484305920792 * y * z;
  out[6] = 0.31539156525252005 * (3.0 * z * z - 1.0);
  out[7] = -1.0925484305920792 * x * z;
  out[8] = 0.5462742152960396 * (x * x - y * y);
  if (degree < 3) return;
  out[9] = -0.5900435899266435 * y * (3.0 * x * x - y * y);
  out[10] = 2.890611442640554 * x * y * z;
  out[11] = -0.4570457994644658 * y * (5.0 * z * z - 1.0);
  out[12] = 0.3731763325901154 * z * (5.0 * z * z - 3.0);
  out[13] = -0.4570457994644658 * x * (5.0 * z * z - 1.0);
  out[14] = 1.445305721320277 * z * (x * x - y * y);
  out[15] = -0.5900435899266435 * x * (x * x - 3.0 * y * y);
}

struct Splat {
  double depth = 0.0;
  std::uint32_t index = 0;
  double mx = 0.0, my = 0.0;  // pixel-space mean
  double ia = 0.0, ib = 0.0, ic = 0.0;  // inverse 2d covariance
  double opacity = 0.0;
  Vec3 color = Vec3::Zero();
};

}  // namespace

OracleResult oracle_render(const GaussianCloud& cloud, const SE3Pose& pose,
                           const CameraModel& camera, const Vec3& background,
                           int sh_degree) {
  const int degree = sh_degree < 0 ? cloud.sh_degree
                                   : std::min(sh_degree, cloud.sh_degree);
  const int basis = (degree + 1) * (degree + 1);
  const Mat3 w_rot = pose.rotation;
  const Vec3 cam_center = -(w_rot.transpose() * pose.translation);

  std::vector<Splat> splats;
  splats.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3 t = w_rot * cloud.means[i] + pose.translation;
    if (!(t.z() > camera.z_near) || !(t.z() <= camera.z_far)) continue;

    const Mat3 rot = quat_to_rot(cloud.rotations[i]);
    const Vec3 s = cloud.log_scales[i].array().exp();
    const Mat3 cov_world =
        rot * s.cwiseProduct(s).asDiagonal() * rot.transpose();

    const double inv_z = 1.0 / t.z();
    Eigen::Matrix<double, 2, 3> jac;
    jac << camera.fx() * inv_z, 0.0, -camera.fx() * t.x() * inv_z * inv_z,
        0.0, camera.fy() * inv_z, -camera.fy() * t.y() * inv_z * inv_z;
    const Eigen::Matrix<double, 2, 3> jw = jac * w_rot;
    Eigen::Matrix2d cov2d = jw * cov_world * jw.transpose();
    cov2d(0, 0) += kFloor2d;
    cov2d(1, 1) += kFloor2d;

    const double det = cov2d(0, 0) * cov2d(1, 1) - cov2d(0, 1) * cov2d(1, 0);
    if (!(det > 0.0)) continue;

    Splat sp;
    sp.depth = t.z();
    sp.index = static_cast<std::uint32_t>(i);
    sp.mx = camera.fx() * t.x() * inv_z + camera.cx();
    sp.my = camera.fy() * t.y() * inv_z + camera.cy();
    sp.ia = cov2d(1, 1) / det;
    sp.ib = -cov2d(0, 1) / det;
    sp.ic = cov2d(0, 0) / det;
    sp.opacity = 1.0 / (1.0 + std::exp(-cloud.opacity_logits[i]));

    double sh[16];
    const Vec3 dir = (cloud.means[i] - cam_center).normalized();
    sh_basis_ref(dir, degree, sh);
    const double* block = cloud.sh_block(i);
    for (int c = 0; c < 3; ++c) {
      double v = 0.0;
      for (int b = 0; b < basis; ++b) v += sh[b] * block[b * 3 + c];
      sp.color[c] = std::max(0.0, v + 0.5);
    }
    splats.push_back(sp);
  }

  std::sort(splats.begin(), splats.end(), [](const Splat& a, const Splat& b) {
    return a.depth != b.depth ? a.depth < b.depth : a.index < b.index;
  });

  OracleResult out;
  out.linear = Image::zeros(camera.width, camera.height, 3);
  out.alpha = Image::zeros(camera.width, camera.height, 1);
  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) {
      const double px = x + 0.5;
      const double py = y + 0.5;
      double trans = 1.0;
      Vec3 color = Vec3::Zero();
      for (const Splat& sp : splats) {
        const double dx = px - sp.mx;
        const double dy = py - sp.my;
        const double q = sp.ia * dx * dx + 2.0 * sp.ib * dx * dy +
                         sp.ic * dy * dy;
        if (q > kCutQ) continue;
        const double alpha =
            std::min(kAlphaMax, sp.opacity * std::exp(-0.5 * q));
        if (alpha < kAlphaMin) continue;
        color += trans * alpha * sp.color;
        out.contributors.insert(sp.index);
        trans *= 1.0 - alpha;
      }
      color += trans * background;
      for (int c = 0; c < 3; ++c) out.linear.at(x, y, c) = color[c];
      out.alpha.at(x, y, 0) = 1.0 - trans;
    }
  }
  return out;
}

}  // namespace evsplat::testing
