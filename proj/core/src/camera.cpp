#include "evsplat/camera.hpp"

#include <sstream>

namespace evsplat {

CameraModel CameraModel::make(int width, int height, double fx, double fy,
                              double cx, double cy, double z_near, double z_far) {
  CameraModel cam;
  cam.width = width;
  cam.height = height;
  cam.intrinsics = Mat3::Identity();
  cam.intrinsics(0, 0) = fx;
  cam.intrinsics(1, 1) = fy;
  cam.intrinsics(0, 2) = cx;
  cam.intrinsics(1, 2) = cy;
  cam.z_near = z_near;
  cam.z_far = z_far;
  cam.validate();
  return cam;
}

void CameraModel::validate() const {
  std::ostringstream err;
  if (width <= 0 || height <= 0)
    err << "camera size must be positive, got " << width << "x" << height;
  else if (!(fx() > 0.0) || !(fy() > 0.0))
    err << "focal lengths must be positive, got fx=" << fx() << " fy=" << fy();
  else if (!(z_near > 0.0) || !(z_far > z_near))
    err << "need 0 < z_near < z_far, got z_near=" << z_near << " z_far=" << z_far;
  else if (intrinsics(2, 2) != 1.0 || intrinsics(1, 0) != 0.0 || intrinsics(0, 1) != 0.0 ||
           intrinsics(2, 0) != 0.0 || intrinsics(2, 1) != 0.0)
    err << "intrinsics must be an upper-triangular pinhole K with K(2,2)=1";
  if (!err.str().empty()) throw ContractViolation("camera: " + err.str());
}

SE3Pose SE3Pose::inverse() const {
  SE3Pose out;
  out.rotation = rotation.transpose();
  out.translation = -(rotation.transpose() * translation);
  return out;
}

SE3Pose SE3Pose::compose_after(const SE3Pose& rhs) const {
  SE3Pose out;
  out.rotation = rotation * rhs.rotation;
  out.translation = rotation * rhs.translation + translation;
  return out;
}

SE3Pose SE3Pose::from_quaternion(const Quat& q, const Vec3& t) {
  if (!(q.norm() > 0.0) || !std::isfinite(q.norm()))
    throw NumericError("pose: quaternion has zero or non-finite norm");
  SE3Pose out;
  out.rotation = q.normalized().toRotationMatrix();
  out.translation = t;
  return out;
}

void SE3Pose::validate(double tol) const {
  const double ortho = (rotation * rotation.transpose() - Mat3::Identity()).norm();
  const double det = rotation.determinant();
  if (!(ortho <= tol) || !(std::abs(det - 1.0) <= tol)) {
    std::ostringstream err;
    err << "pose rotation not orthonormal: |RR^T - I| = " << ortho << ", det = " << det;
    throw NumericError(err.str());
  }
  if (!translation.allFinite()) throw NumericError("pose translation not finite");
}

Mat3 so3_exp(const Vec3& w) {
  const double angle = w.norm();
  if (angle < 1e-12) {
    // second-order series keeps exp accurate near zero
    Mat3 hat;
    hat << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
    return Mat3::Identity() + hat + 0.5 * hat * hat;
  }
  return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

double rotation_angle(const Mat3& r) {
  const double c = std::clamp((r.trace() - 1.0) * 0.5, -1.0, 1.0);
  return std::acos(c);
}

}  // namespace evsplat
