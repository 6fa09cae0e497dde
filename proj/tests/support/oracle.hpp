#pragma once

#include "evsplat/camera.hpp"
#include "evsplat/gaussian_cloud.hpp"
#include "evsplat/image.hpp"

#include <set>

namespace evsplat::testing {

struct OracleResult {
  Image linear;
  Image alpha;
  std::set<std::uint32_t> contributors;
};

// Exhaustive per-pixel reference renderer, written straight from the
// documented forward model with none of the production shortcuts: no tiles,
// no footprint prefilter, every gaussian evaluated at every pixel in global
// depth order. Quadratic and only fit for small scenes.
OracleResult oracle_render(const GaussianCloud& cloud, const SE3Pose& pose,
                           const CameraModel& camera, const Vec3& background,
                           int sh_degree = -1);

}  // namespace evsplat::testing
