#include "evsplat/projection.hpp"

namespace evsplat {

Mat23 projection_jacobian(const CameraModel& camera, const Vec3& t) {
  const double inv_z = 1.0 / t.z();
  const double inv_z2 = inv_z * inv_z;
  Mat23 j;
  j << camera.fx() * inv_z, 0.0, -camera.fx() * t.x() * inv_z2,
       0.0, camera.fy() * inv_z, -camera.fy() * t.y() * inv_z2;
  return j;
}

std::optional<Mat2> project_covariance(const Mat3& cov_world, const SE3Pose& pose,
                                       const CameraModel& camera, const Vec3& mean_world) {
  const Vec3 t = pose.apply(mean_world);
  if (!(t.z() > camera.z_near)) return std::nullopt;
  const Mat23 m = projection_jacobian(camera, t) * pose.rotation;
  Mat2 cov = m * cov_world * m.transpose();
  // the product is symmetric analytically but not bitwise; make it so
  cov(0, 1) = cov(1, 0) = 0.5 * (cov(0, 1) + cov(1, 0));
  cov(0, 0) += kCov2dFloor;
  cov(1, 1) += kCov2dFloor;
  return cov;
}

std::optional<Projected> project_gaussian(const Mat3& cov_world, const SE3Pose& pose,
                                          const CameraModel& camera, const Vec3& mean_world) {
  const Vec3 t = pose.apply(mean_world);
  if (!(t.z() > camera.z_near) || t.z() > camera.z_far) return std::nullopt;
  Projected out;
  out.depth = t.z();
  const double inv_z = 1.0 / t.z();
  out.mean2d = Vec2(camera.fx() * t.x() * inv_z + camera.cx(),
                    camera.fy() * t.y() * inv_z + camera.cy());
  const Mat23 m = projection_jacobian(camera, t) * pose.rotation;
  out.cov2d = m * cov_world * m.transpose();
  out.cov2d(0, 1) = out.cov2d(1, 0) = 0.5 * (out.cov2d(0, 1) + out.cov2d(1, 0));
  out.cov2d(0, 0) += kCov2dFloor;
  out.cov2d(1, 1) += kCov2dFloor;
  return out;
}

}  // namespace evsplat
