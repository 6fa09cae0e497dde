#include "evsplat/gradcheck.hpp"

#include "evsplat/rasterizer.hpp"
#include "support/scenes.hpp"

#include <doctest.h>

#include <cstring>
#include <random>

using namespace evsplat;
using namespace evsplat::testing;

TEST_CASE("relative error metric is symmetric and floored") {
  CHECK(gradcheck_rel_error(1.0, 1.0) == 0.0);
  CHECK(gradcheck_rel_error(2.0, 1.0) == doctest::Approx(0.5));
  CHECK(gradcheck_rel_error(1.0, 2.0) == doctest::Approx(0.5));
  CHECK(gradcheck_rel_error(0.0, 5e-5) == doctest::Approx(0.5));  // floor kicks in
  CHECK(gradcheck_rel_error(0.0, 0.0) == 0.0);
}

TEST_CASE("analytic gradients agree with central differences on a small scene") {
  GradCheckOptions opt;
  opt.n_scenes = 1;
  opt.width = 16;
  opt.height = 12;
  opt.n_gaussians = 6;
  opt.sh_degree = 2;
  const GradCheckReport report = run_gradient_check(opt);
  INFO("worst parameter: ", report.worst_parameter, " rel ", report.max_rel_error);
  CHECK(report.passed());
  CHECK(report.n_checked > 100);
  CHECK(report.max_rel_error < opt.tolerance);
}

TEST_CASE("zero upstream gradient yields zero parameter gradients") {
  const CameraModel cam = small_camera();
  const GaussianCloud cloud = random_cloud(15, 1, 3);
  const SE3Pose pose = jittered_pose(4);
  const Image zero = Image::zeros(cam.width, cam.height, 3);
  const GradientBundle g = render_backward(cloud, pose, cam, zero, {});
  for (const Vec3& v : g.d_means) CHECK(v.norm() == 0.0);
  for (const Vec3& v : g.d_log_scales) CHECK(v.norm() == 0.0);
  for (const Vec4& v : g.d_rotations) CHECK(v.norm() == 0.0);
  for (double v : g.d_opacity_logits) CHECK(v == 0.0);
  for (double v : g.d_sh) CHECK(v == 0.0);
  CHECK(g.d_pose.norm() == 0.0);
  CHECK(g.d_pose_rotation.norm() == 0.0);
  CHECK(g.d_pose_translation.norm() == 0.0);
}

TEST_CASE("backward visibility flags match the forward visible list") {
  const CameraModel cam = small_camera();
  const GaussianCloud cloud = random_cloud(40, 1, 5);
  const SE3Pose pose = jittered_pose(6);
  const RenderOutput out = render(cloud, pose, cam, {});
  const Image ones = Image::constant(cam.width, cam.height, 3, 1.0);
  const GradientBundle g = render_backward(cloud, pose, cam, ones, {});
  REQUIRE(g.visible.size() == cloud.size());
  std::vector<std::uint8_t> expect(cloud.size(), 0);
  for (std::uint32_t id : out.visible) expect[id] = 1;
  CHECK(g.visible == expect);
}

TEST_CASE("backward gradients are bit-identical across thread counts") {
  const CameraModel cam = small_camera(64, 48);
  const GaussianCloud cloud = random_cloud(80, 2, 8);
  const SE3Pose pose = jittered_pose(9);
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Image d_log = Image::zeros(cam.width, cam.height, 3);
  for (double& v : d_log.data) v = u(rng);

  RenderSettings s1, s3;
  s1.threads = 1;
  s3.threads = 3;
  const GradientBundle a = render_backward(cloud, pose, cam, d_log, s1);
  const GradientBundle b = render_backward(cloud, pose, cam, d_log, s3);
  CHECK(std::memcmp(a.d_means.data(), b.d_means.data(), a.d_means.size() * sizeof(Vec3)) == 0);
  CHECK(std::memcmp(a.d_sh.data(), b.d_sh.data(), a.d_sh.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(a.d_rotations.data(), b.d_rotations.data(),
                    a.d_rotations.size() * sizeof(Vec4)) == 0);
  CHECK(a.d_opacity_logits == b.d_opacity_logits);
  CHECK(a.d_pose == b.d_pose);
  CHECK(a.d_pose_rotation == b.d_pose_rotation);
  CHECK(a.d_pose_translation == b.d_pose_translation);
}

TEST_CASE("screen gradient norms accumulate only on visible gaussians") {
  const CameraModel cam = small_camera();
  GaussianCloud cloud = random_cloud(10, 0, 11);
  cloud.means[0] = Vec3(0, 0, -5.0);  // behind the camera
  const Image ones = Image::constant(cam.width, cam.height, 3, 0.5);
  const GradientBundle g = render_backward(cloud, SE3Pose{}, cam, ones, {});
  REQUIRE(g.d_screen_norm.size() == cloud.size());
  CHECK(g.d_screen_norm[0] == 0.0);
  CHECK(g.radius_px[0] == 0.0);
  CHECK(g.visible[0] == 0);
  bool any = false;
  for (std::size_t i = 1; i < cloud.size(); ++i)
    if (g.visible[i]) {
      any = true;
      CHECK(g.d_screen_norm[i] >= 0.0);
      CHECK(g.radius_px[i] > 0.0);
    }
  CHECK(any);
}

TEST_CASE("the left pose tangent matches the raw rotation gradient") {
  // d_pose rows 0..2 hold dL/dw for R <- exp(hat(w)) R; the chain rule gives
  // dL/dw_k = sum_ij dL/dR_ij (G_k R)_ij with G_k the so(3) generators
  const CameraModel cam = small_camera();
  const GaussianCloud cloud = random_cloud(12, 1, 12);
  const SE3Pose pose = jittered_pose(13);
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Image d_log = Image::zeros(cam.width, cam.height, 3);
  for (double& v : d_log.data) v = u(rng);
  const GradientBundle g = render_backward(cloud, pose, cam, d_log, {});

  Mat3 gen[3];
  gen[0] << 0, 0, 0, 0, 0, -1, 0, 1, 0;
  gen[1] << 0, 0, 1, 0, 0, 0, -1, 0, 0;
  gen[2] << 0, -1, 0, 1, 0, 0, 0, 0, 0;
  for (int k = 0; k < 3; ++k) {
    const double expect = (g.d_pose_rotation.cwiseProduct(gen[k] * pose.rotation)).sum();
    CHECK(g.d_pose[k] == doctest::Approx(expect).epsilon(1e-10));
  }
  for (int k = 0; k < 3; ++k) CHECK(g.d_pose[3 + k] == g.d_pose_translation[k]);
}
