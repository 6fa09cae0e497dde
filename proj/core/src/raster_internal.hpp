#pragma once

// shared between the forward and backward rasterizer translation units

#include "evsplat/rasterizer.hpp"
#include "evsplat/sh.hpp"

#include <vector>

namespace evsplat::detail {

// 3-sigma support: alpha is defined to be zero where d^T conic d exceeds this
inline constexpr double kSupportQ = kSupportSigma * kSupportSigma;

struct Preprocessed {
  int used_degree = 0;
  std::vector<std::uint8_t> active;
  std::vector<Vec3> t_cam;      // camera-space mean
  std::vector<Vec2> mean2d;     // pixel coords
  std::vector<double> depth;
  std::vector<Mat2> cov2d;      // floored
  std::vector<Mat2> conic;      // inverse of cov2d
  std::vector<double> opacity;  // sigmoid(logit)
  std::vector<Vec3> color;      // SH evaluated, offset, clamped
  std::vector<std::uint8_t> clamped;  // bit c: color channel c clamped at 0
  std::vector<Vec3> view_dir;   // unit, camera center to mean
  std::vector<double> dir_len;  // pre-normalization length (0 marks fallback)
  std::vector<double> radius;   // 3-sigma screen radius in pixels
  std::vector<std::uint32_t> order;  // active ids, near to far, ties by id
};

Preprocessed preprocess(const GaussianCloud& cloud, const SE3Pose& pose,
                        const CameraModel& camera, const RenderSettings& settings);

// smallest value of (p-mean)^T conic (p-mean) over the rectangle
// [x0,x1]x[y0,y1]; exact (center inside, else clamped minimum on each edge)
double min_mahalanobis_sq_on_rect(const Vec2& mean, const Mat2& conic, double x0, double y0,
                                  double x1, double y1);

struct Bins {
  int tiles_x = 0;
  int tiles_y = 0;
  std::vector<std::vector<std::uint32_t>> tiles;
};

Bins bin_tiles(const Preprocessed& pre, const CameraModel& camera);

int resolve_threads(int threads);

}  // namespace evsplat::detail
