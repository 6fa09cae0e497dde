#include "evsplat/toy_scene.hpp"

#include "evsplat/sh.hpp"

#include <cmath>
#include <random>

namespace evsplat {

GaussianCloud toy_scene(const ToySceneOptions& options) {
  if (options.n_gaussians == 0) throw ContractViolation("toy scene: n_gaussians must be positive");
  if (options.sh_degree < 0 || options.sh_degree > 3)
    throw ContractViolation("toy scene: sh_degree must lie in [0, 3]");
  if (!(options.scale_min > 0.0) || options.scale_max < options.scale_min)
    throw ContractViolation("toy scene: bad scale range");

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  GaussianCloud cloud = GaussianCloud::sized(options.n_gaussians, options.sh_degree);
  const int basis = cloud.basis_count();
  for (std::size_t i = 0; i < options.n_gaussians; ++i) {
    // uniform in the ball: gaussian direction times cbrt-distributed radius
    Vec3 dir(normal(rng), normal(rng), normal(rng));
    if (dir.norm() < 1e-12) dir = Vec3(1, 0, 0);
    dir.normalize();
    const double r = options.radius * std::cbrt(unit(rng));
    cloud.means[i] = dir * r;

    const double log_lo = std::log(options.scale_min);
    const double log_hi = std::log(options.scale_max);
    for (int j = 0; j < 3; ++j)
      cloud.log_scales[i][j] = log_lo + (log_hi - log_lo) * unit(rng);

    Vec4 q(normal(rng), normal(rng), normal(rng), normal(rng));
    if (q.norm() < 1e-12) q = Vec4(1, 0, 0, 0);
    cloud.rotations[i] = q / q.norm();

    cloud.opacity_logits[i] = logit(0.6 + 0.35 * unit(rng));

    // dc coefficients span most of the evaluable color range; higher bands
    // stay small so colors remain valid from every direction
    double* sh = cloud.sh_block(i);
    for (int c = 0; c < 3; ++c) sh[c] = (unit(rng) * 2.0 - 1.0) * 0.4 / kShC0;
    for (int b = 1; b < basis; ++b)
      for (int c = 0; c < 3; ++c) sh[b * 3 + c] = (unit(rng) * 2.0 - 1.0) * 0.1;
  }
  cloud.validate();
  return cloud;
}

SE3Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
  Vec3 forward = target - eye;
  if (forward.norm() < 1e-12) throw ContractViolation("look_at: eye coincides with target");
  forward.normalize();
  Vec3 world_up = up;
  if (world_up.norm() < 1e-12 || forward.cross(world_up).norm() < 1e-9) world_up = Vec3(0, 1, 0);
  if (forward.cross(world_up).norm() < 1e-9) world_up = Vec3(1, 0, 0);
  const Vec3 right = forward.cross(world_up).normalized();  // screen right
  const Vec3 down = forward.cross(right).normalized();      // screen down (+y)
  SE3Pose pose;
  pose.rotation.row(0) = right.transpose();
  pose.rotation.row(1) = down.transpose();
  pose.rotation.row(2) = forward.transpose();
  pose.translation = -(pose.rotation * eye);
  return pose;
}

double orbit_angle(const OrbitOptions& options, double s) {
  // integral of 1 + A*sin(2*pi*k*u) over [0, s], normalized so a full pass
  // covers `revolutions` turns for integer k
  const double ratio = std::max(1.0, options.speed_ratio);
  const double a = (ratio - 1.0) / (ratio + 1.0);
  const int k = std::max(1, options.speed_cycles);
  const double two_pi_k = 2.0 * M_PI * k;
  const double progress = s + a * (1.0 - std::cos(two_pi_k * s)) / two_pi_k;
  return 2.0 * M_PI * options.revolutions * progress;
}

SE3Pose orbit_pose(const OrbitOptions& options, std::uint64_t t_us) {
  if (options.duration_us == 0) throw ContractViolation("orbit: duration must be positive");
  const double s = std::min(1.0, static_cast<double>(t_us) / options.duration_us);
  const double theta = orbit_angle(options, s);
  const Vec3 eye(options.radius * std::cos(theta), options.radius * std::sin(theta),
                 options.height);
  return look_at(eye, Vec3::Zero());
}

PoseTrack orbit_track(const OrbitOptions& options) {
  if (options.duration_us == 0) throw ContractViolation("orbit: duration must be positive");
  if (!(options.pose_rate_hz > 0.0)) throw ContractViolation("orbit: pose rate must be positive");
  const double step_us = 1e6 / options.pose_rate_hz;
  PoseTrack track;
  for (std::uint64_t t = 0;; ) {
    track.timestamps_us.push_back(t);
    track.poses.push_back(orbit_pose(options, t));
    const std::uint64_t next =
        static_cast<std::uint64_t>(std::llround(step_us * static_cast<double>(track.size())));
    if (next > options.duration_us) break;
    if (next <= t) throw ContractViolation("orbit: pose rate too high for integer timestamps");
    t = next;
  }
  track.validate();
  return track;
}

}  // namespace evsplat
