#include "evsplat/image.hpp"

#include <algorithm>
#include <cmath>

namespace evsplat {

Image Image::zeros(int width, int height, int channels) {
  return constant(width, height, channels, 0.0);
}

Image Image::constant(int width, int height, int channels, double value) {
  if (width <= 0 || height <= 0 || channels <= 0)
    throw ContractViolation("image: dimensions must be positive");
  Image img;
  img.width = width;
  img.height = height;
  img.channels = channels;
  img.data.assign(static_cast<std::size_t>(width) * height * channels, value);
  return img;
}

bool Image::all_finite() const {
  return std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); });
}

double Image::max_abs_diff(const Image& other) const {
  if (!same_shape(other)) throw ContractViolation("image: shape mismatch in max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i)
    m = std::max(m, std::abs(data[i] - other.data[i]));
  return m;
}

Image Image::log(double floor) const {
  Image out = *this;
  for (double& v : out.data) v = std::log(std::max(v, floor));
  return out;
}

double linear_to_display(double v) {
  return std::pow(std::clamp(v, 0.0, 1.0), 1.0 / 2.2);
}

double display_to_linear(double v) {
  return std::pow(std::clamp(v, 0.0, 1.0), 2.2);
}

Image linear_to_display(const Image& img) {
  Image out = img;
  for (double& v : out.data) v = linear_to_display(v);
  return out;
}

Image display_to_linear(const Image& img) {
  Image out = img;
  for (double& v : out.data) v = display_to_linear(v);
  return out;
}

}  // namespace evsplat
