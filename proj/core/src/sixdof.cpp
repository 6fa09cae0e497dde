#include "evsplat/sixdof.hpp"

namespace evsplat {

namespace {
constexpr double kDegenerate = 1e-12;
}

Mat3 gram_schmidt(const Vec3& r1, const Vec3& r2) {
  const double n1 = r1.norm();
  if (!(n1 > kDegenerate)) throw NumericError("gram_schmidt: first vector has near-zero norm");
  const Vec3 c1 = r1 / n1;
  const Vec3 u = r2 - c1.dot(r2) * c1;
  const double nu = u.norm();
  if (!(nu > kDegenerate))
    throw NumericError("gram_schmidt: second vector is near-parallel to the first");
  const Vec3 c2 = u / nu;
  Mat3 r;
  r.col(0) = c1;
  r.col(1) = c2;
  r.col(2) = c1.cross(c2);
  return r;
}

GramSchmidtGrads gram_schmidt_backward(const Vec3& r1, const Vec3& r2, const Mat3& d_r) {
  const double n1 = r1.norm();
  if (!(n1 > kDegenerate)) throw NumericError("gram_schmidt_backward: degenerate first vector");
  const Vec3 c1 = r1 / n1;
  const double dot = c1.dot(r2);
  const Vec3 u = r2 - dot * c1;
  const double nu = u.norm();
  if (!(nu > kDegenerate)) throw NumericError("gram_schmidt_backward: degenerate second vector");
  const Vec3 c2 = u / nu;

  const Vec3 g1 = d_r.col(0);
  const Vec3 g2 = d_r.col(1);
  const Vec3 g3 = d_r.col(2);

  // third column is a cross product of the first two
  Vec3 g_c1 = g1 + c2.cross(g3);
  const Vec3 g_c2 = g2 + g3.cross(c1);

  // normalization of u, then u's dependence on c1 and r2
  const Vec3 g_u = (g_c2 - c2 * c2.dot(g_c2)) / nu;
  const Vec3 g_r2 = g_u - c1 * c1.dot(g_u);
  g_c1 += -dot * g_u - r2 * c1.dot(g_u);

  GramSchmidtGrads out;
  out.d_r1 = (g_c1 - c1 * c1.dot(g_c1)) / n1;
  out.d_r2 = g_r2;
  return out;
}

SE3Pose ErrorTransform::to_pose() const {
  SE3Pose p;
  p.rotation = gram_schmidt(r1, r2);
  p.translation = t;
  return p;
}

Mat34 ErrorTransform::matrix() const {
  Mat34 m;
  m.leftCols<3>() = gram_schmidt(r1, r2);
  m.col(3) = t;
  return m;
}

double ErrorTransform::deviation_from_identity() const {
  Mat34 m = matrix();
  m.leftCols<3>() -= Mat3::Identity();
  return m.norm();
}

SE3Pose refined_pose(const ErrorTransform& err, const SE3Pose& base) {
  if (err.is_identity_encoding()) return base;
  return err.to_pose().compose_after(base);
}

RefinedPoseGrads refined_pose_backward(const SE3Pose& base, const Mat3& d_rotation,
                                       const Vec3& d_translation) {
  RefinedPoseGrads out;
  out.d_err_rotation = d_rotation * base.rotation.transpose() +
                       d_translation * base.translation.transpose();
  out.d_err_translation = d_translation;
  return out;
}

}  // namespace evsplat
