#pragma once

#include "evsplat/camera.hpp"

#include <optional>

namespace evsplat {

// isotropic low-pass floor added to every projected covariance (pixel^2)
inline constexpr double kCov2dFloor = 0.3;

// how far (in standard deviations) a Gaussian's footprint reaches; alpha is
// exactly zero outside this ellipse, which is also the binning footprint
inline constexpr double kSupportSigma = 3.0;

struct Projected {
  Vec2 mean2d;   // pixel coordinates
  Mat2 cov2d;    // includes the low-pass floor
  double depth;  // camera-space z
};

// Jacobian of the pinhole projection at camera-space point t (local affine
// approximation used to push the covariance through the projection)
Mat23 projection_jacobian(const CameraModel& camera, const Vec3& t_cam);

// Perspective projection of a world covariance into pixel^2 units. Returns
// nullopt as a cull signal when the mean is not safely in front of the
// camera (camera z <= z_near). Result is symmetric positive definite thanks
// to the additive floor.
std::optional<Mat2> project_covariance(const Mat3& cov_world, const SE3Pose& pose,
                                       const CameraModel& camera, const Vec3& mean_world);

// Mean + covariance + depth in one go; nullopt culls (z outside
// (z_near, z_far]).
std::optional<Projected> project_gaussian(const Mat3& cov_world, const SE3Pose& pose,
                                          const CameraModel& camera, const Vec3& mean_world);

}  // namespace evsplat
