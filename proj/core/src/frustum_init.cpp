#include "evsplat/frustum_init.hpp"

#include "evsplat/kdtree.hpp"

#include <cmath>

namespace evsplat {

GaussianCloud frustum_init(const PoseTrack& track, const CameraModel& camera,
                           const FrustumInitOptions& options, std::mt19937_64& rng) {
  camera.validate();
  track.validate();
  if (track.empty()) throw ContractViolation("frustum_init: need at least one pose");
  if (options.n_gaussians == 0) throw ContractViolation("frustum_init: need a positive budget");

  // even subsample across the track, always keeping the first pose
  const std::size_t n_track = track.size();
  const std::size_t n_used = std::min(options.max_poses, n_track);
  std::vector<std::size_t> pose_ids(n_used);
  if (n_used == 1) {
    pose_ids[0] = 0;
  } else {
    for (std::size_t k = 0; k < n_used; ++k)
      pose_ids[k] = (k * (n_track - 1)) / (n_used - 1);
  }

  const std::size_t per_pose = options.n_gaussians / n_used;
  const std::size_t remainder = options.n_gaussians % n_used;

  GaussianCloud cloud = GaussianCloud::sized(options.n_gaussians, options.sh_degree);
  std::uniform_real_distribution<double> ux(0.0, camera.width);
  std::uniform_real_distribution<double> uy(0.0, camera.height);
  std::uniform_real_distribution<double> uz(camera.z_near, camera.z_far);

  std::size_t write = 0;
  for (std::size_t k = 0; k < n_used; ++k) {
    const SE3Pose& pose = track.poses[pose_ids[k]];
    const Mat3 r_inv = pose.rotation.transpose();
    const std::size_t count = per_pose + (k < remainder ? 1 : 0);
    for (std::size_t i = 0; i < count; ++i, ++write) {
      const double px = ux(rng);
      const double py = uy(rng);
      const double z = uz(rng);
      const Vec3 cam_pt((px - camera.cx()) * z / camera.fx(),
                        (py - camera.cy()) * z / camera.fy(), z);
      cloud.means[write] = r_inv * (cam_pt - pose.translation);
    }
  }

  const double opacity_logit = logit(options.init_opacity);
  for (std::size_t i = 0; i < cloud.size(); ++i) cloud.opacity_logits[i] = opacity_logit;
  // sh coefficients stay zero: the rendered color offset makes that mid-gray

  // isotropic scales from local point spacing
  const KdTree3 tree(cloud.means);
  const int k_nn = std::min<int>(options.scale_neighbors,
                                 static_cast<int>(cloud.size()) - 1);
  const double fallback = (camera.z_far - camera.z_near) / 10.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    double mean_dist = fallback;
    if (k_nn > 0) {
      const auto nn = tree.knn(cloud.means[i], k_nn, i);
      double sum = 0.0;
      for (const auto& [dist, idx] : nn) sum += dist;
      mean_dist = sum / static_cast<double>(nn.size());
      if (!(mean_dist > 0.0)) mean_dist = fallback;  // coincident points
    }
    cloud.log_scales[i] = Vec3::Constant(std::log(mean_dist));
  }
  return cloud;
}

}  // namespace evsplat
