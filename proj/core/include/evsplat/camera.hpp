#pragma once

#include "evsplat/types.hpp"

namespace evsplat {

// Pinhole intrinsics plus the depth range used for culling and for seeding
// new Gaussians inside the viewing volume.
struct CameraModel {
  Mat3 intrinsics = Mat3::Identity();  // K in pixel units
  int width = 0;
  int height = 0;
  double z_near = 0.0;
  double z_far = 0.0;

  double fx() const { return intrinsics(0, 0); }
  double fy() const { return intrinsics(1, 1); }
  double cx() const { return intrinsics(0, 2); }
  double cy() const { return intrinsics(1, 2); }

  static CameraModel make(int width, int height, double fx, double fy,
                          double cx, double cy, double z_near, double z_far);

  // throws ContractViolation on non-positive size/focals or bad depth range
  void validate() const;
};

// Rigid world-to-camera transform: x_cam = R * x_world + t.
struct SE3Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& world) const { return rotation * world + translation; }
  Vec3 camera_center() const { return -(rotation.transpose() * translation); }

  SE3Pose inverse() const;
  SE3Pose compose_after(const SE3Pose& rhs) const;  // applies rhs first, then this

  static SE3Pose from_quaternion(const Quat& q, const Vec3& t);
  Quat quaternion() const { return Quat(rotation); }

  // throws NumericError if rotation is not orthonormal within tol
  void validate(double tol = 1e-6) const;
};

// exp of the so(3) hat of w (Rodrigues)
Mat3 so3_exp(const Vec3& w);

// rotation angle of R in radians
double rotation_angle(const Mat3& r);

}  // namespace evsplat
