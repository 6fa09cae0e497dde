#pragma once

#include "evsplat/camera.hpp"
#include "evsplat/gaussian_cloud.hpp"
#include "evsplat/pose_track.hpp"

#include <random>

namespace evsplat {

struct FrustumInitOptions {
  std::size_t n_gaussians = 50000;
  int sh_degree = 3;
  double init_opacity = 0.1;       // before the logit
  std::size_t max_poses = 200;     // evenly subsampled from the track
  int scale_neighbors = 3;         // scales from mean distance to this many neighbors
};

// Seeds Gaussians uniformly inside the camera frusta along the trajectory:
// the pose budget is split evenly across (subsampled) poses, each point draws
// a pixel uniformly on the sensor and a depth uniformly in [z_near, z_far],
// and is unprojected to world space. Scales are isotropic at the log of the
// mean distance to the nearest neighbors, rotations identity, colors
// mid-gray, opacity a small constant.
GaussianCloud frustum_init(const PoseTrack& track, const CameraModel& camera,
                           const FrustumInitOptions& options, std::mt19937_64& rng);

}  // namespace evsplat
