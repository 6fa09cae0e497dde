#pragma once

#include "evsplat/camera.hpp"

namespace evsplat {

// Continuous rotation encoding: two 3-vectors orthonormalized into a
// rotation matrix, plus a translation. Used for the per-pose error
// transforms refined during training. Default-constructed it encodes the
// identity exactly.
struct ErrorTransform {
  Vec3 r1 = Vec3(1, 0, 0);
  Vec3 r2 = Vec3(0, 1, 0);
  Vec3 t = Vec3::Zero();

  bool is_identity_encoding() const {
    return r1 == Vec3(1, 0, 0) && r2 == Vec3(0, 1, 0) && t == Vec3::Zero();
  }

  SE3Pose to_pose() const;
  Mat34 matrix() const;  // [R | t]

  // ||[R|t] - [I|0]||_F, the pose-regularizer operand
  double deviation_from_identity() const;
};

// First column is r1 normalized, second is r2 minus its r1 component
// normalized, third is their cross product. Throws NumericError when r1 is
// near zero or r2 is near parallel to r1 (no well-defined frame).
Mat3 gram_schmidt(const Vec3& r1, const Vec3& r2);

struct GramSchmidtGrads {
  Vec3 d_r1 = Vec3::Zero();
  Vec3 d_r2 = Vec3::Zero();
};

// pullback of dL/dR through gram_schmidt at (r1, r2)
GramSchmidtGrads gram_schmidt_backward(const Vec3& r1, const Vec3& r2, const Mat3& d_r);

// error transform applied on top of a base pose: R' = Re * Rb, t' = Re * tb + te.
// An exact identity encoding returns the base pose bit-for-bit.
SE3Pose refined_pose(const ErrorTransform& err, const SE3Pose& base);

struct RefinedPoseGrads {
  Mat3 d_err_rotation = Mat3::Zero();
  Vec3 d_err_translation = Vec3::Zero();
};

// pullback of (dL/dR', dL/dt') onto the error transform's rotation matrix
// and translation; chain through gram_schmidt_backward for (r1, r2) grads
RefinedPoseGrads refined_pose_backward(const SE3Pose& base, const Mat3& d_rotation,
                                       const Vec3& d_translation);

}  // namespace evsplat
