#include "evsplat/ou_noise.hpp"

#include <cmath>

namespace evsplat {

std::vector<double> ou_path(const std::vector<std::uint64_t>& times_us, double theta,
                            double sigma, std::mt19937_64& rng) {
  if (!(theta > 0.0)) throw ContractViolation("ou_path: theta must be positive");
  if (sigma < 0.0) throw ContractViolation("ou_path: sigma must be non-negative");
  for (std::size_t i = 1; i < times_us.size(); ++i)
    if (times_us[i] <= times_us[i - 1])
      throw ContractViolation("ou_path: times must strictly increase");

  std::vector<double> path(times_us.size(), 0.0);
  if (times_us.empty()) return path;
  std::normal_distribution<double> unit(0.0, 1.0);
  if (sigma == 0.0) return path;

  path[0] = sigma / std::sqrt(2.0 * theta) * unit(rng);
  for (std::size_t i = 1; i < times_us.size(); ++i) {
    const double dt = static_cast<double>(times_us[i] - times_us[i - 1]) * 1e-6;
    path[i] = path[i - 1] - theta * path[i - 1] * dt + sigma * std::sqrt(dt) * unit(rng);
  }
  return path;
}

PoseTrack perturb_poses(const PoseTrack& track, double sigma_rot, double sigma_trans,
                        double theta, std::mt19937_64& rng) {
  track.validate();
  PoseTrack out = track;
  if (track.empty()) return out;

  std::vector<std::vector<double>> channels(6);
  for (int c = 0; c < 3; ++c) channels[c] = ou_path(track.timestamps_us, theta, sigma_rot, rng);
  for (int c = 3; c < 6; ++c) channels[c] = ou_path(track.timestamps_us, theta, sigma_trans, rng);

  for (std::size_t i = 0; i < track.size(); ++i) {
    const Vec3 w(channels[0][i], channels[1][i], channels[2][i]);
    const Vec3 v(channels[3][i], channels[4][i], channels[5][i]);
    if (w.isZero(0) && v.isZero(0)) continue;  // keep the pose bit-exact
    out.poses[i].rotation = so3_exp(w) * track.poses[i].rotation;
    out.poses[i].translation = track.poses[i].translation + v;
  }
  return out;
}

}  // namespace evsplat
