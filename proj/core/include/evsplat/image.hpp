#pragma once

#include "evsplat/types.hpp"

#include <vector>

namespace evsplat {

// Row-major interleaved raster of doubles. Rendering runs in linear radiance;
// PNG I/O applies the display transfer curve at the boundary.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> data;

  static Image zeros(int width, int height, int channels);
  static Image constant(int width, int height, int channels, double value);

  bool same_shape(const Image& other) const {
    return width == other.width && height == other.height && channels == other.channels;
  }
  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }

  double& at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  bool all_finite() const;
  double max_abs_diff(const Image& other) const;  // shapes must match

  // elementwise ln(max(v, floor))
  Image log(double floor) const;
};

inline constexpr double kLogFloor = 1e-5;

// gamma 2.2 display curve, clamped to [0, 1]
double linear_to_display(double v);
double display_to_linear(double v);
Image linear_to_display(const Image& img);
Image display_to_linear(const Image& img);

}  // namespace evsplat
