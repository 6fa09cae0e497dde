#pragma once

#include "evsplat/rasterizer.hpp"

namespace evsplat {

struct ViewAlignOptions {
  int iterations = 200;
  double lr = 5e-3;
};

// Refines a single view's pose against a ground-truth image with the model
// frozen: gradient descent on an error transform minimizing the per-channel
// exposure-corrected log-space L1. Used to factor pose gauge drift out of
// image metrics.
SE3Pose align_view_pose(const GaussianCloud& cloud, const CameraModel& camera,
                        const SE3Pose& base, const Image& gt_log, const RenderSettings& settings,
                        const ViewAlignOptions& options = {});

}  // namespace evsplat
