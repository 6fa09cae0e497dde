#pragma once

#include "evsplat/camera.hpp"
#include "evsplat/gaussian_cloud.hpp"
#include "evsplat/image.hpp"
#include "evsplat/projection.hpp"

#include <cstdint>
#include <vector>

namespace evsplat {

inline constexpr int kTileSize = 16;
inline constexpr double kMinAlpha = 1.0 / 255.0;
inline constexpr double kMaxAlpha = 0.99;

struct RenderSettings {
  Vec3 background = Vec3::Zero();  // linear radiance
  int threads = 0;                 // 0 = hardware concurrency
  int sh_degree = -1;              // -1 = the cloud's degree, else clamped to it
};

struct RenderOutput {
  Image linear;  // H x W x 3 radiance
  Image log;     // ln(max(linear, kLogFloor)) per channel
  Image alpha;   // H x W x 1, equals 1 - final transmittance
  std::vector<std::uint32_t> visible;  // ascending ids of Gaussians that contributed
};

// Per-tile front-to-back work lists. A Gaussian appears in a tile's list iff
// it survives depth culling and its 3-sigma footprint ellipse overlaps the
// tile rectangle. Lists share one global depth order (ties break by index).
struct TileBins {
  int tiles_x = 0;
  int tiles_y = 0;
  std::vector<std::vector<std::uint32_t>> tiles;
  std::vector<double> radius_px;          // 3-sigma screen radius, 0 when culled
  std::vector<std::uint8_t> in_frustum;   // passed the depth cull
};

TileBins cull_and_bin(const GaussianCloud& cloud, const SE3Pose& pose,
                      const CameraModel& camera);

RenderOutput render(const GaussianCloud& cloud, const SE3Pose& pose, const CameraModel& camera,
                    const RenderSettings& settings = {});

// Gradients of a scalar loss L wrt every input, given dL/d(log image).
// d_pose is the left-trivialized tangent: rotation rows hold dL/dw for the
// perturbation R <- exp(hat(w)) R at w = 0, translation rows are dL/dt.
struct GradientBundle {
  std::vector<Vec3> d_means;
  std::vector<Vec3> d_log_scales;
  std::vector<Vec4> d_rotations;
  std::vector<double> d_opacity_logits;
  std::vector<double> d_sh;
  Mat3 d_pose_rotation = Mat3::Zero();   // raw dL/dR entries
  Vec3 d_pose_translation = Vec3::Zero();
  Vec6 d_pose = Vec6::Zero();
  std::vector<double> d_screen_norm;     // |screen gradient| per Gaussian, NDC-scaled
  std::vector<double> radius_px;         // this render's 3-sigma screen radii
  std::vector<std::uint8_t> visible;     // contributed to at least one pixel
};

GradientBundle render_backward(const GaussianCloud& cloud, const SE3Pose& pose,
                               const CameraModel& camera, const Image& d_log_image,
                               const RenderSettings& settings = {});

}  // namespace evsplat
