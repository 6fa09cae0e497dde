#include "evsplat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace evsplat {

double psnr(const Image& a, const Image& b, double peak) {
  if (!a.same_shape(b)) throw ContractViolation("psnr: image shapes must match");
  if (a.empty()) throw ContractViolation("psnr: empty images");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) mse += sqr(a.data[i] - b.data[i]);
  mse /= static_cast<double>(a.data.size());
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

namespace {

constexpr int kWin = 11;
constexpr double kSigma = 1.5;

std::vector<double> gaussian_kernel() {
  std::vector<double> k(kWin);
  double sum = 0.0;
  for (int i = 0; i < kWin; ++i) {
    const double d = i - (kWin - 1) / 2.0;
    k[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// separable valid-region filter of one channel
std::vector<double> filter_valid(const std::vector<double>& img, int w, int h,
                                 const std::vector<double>& kernel, int& out_w, int& out_h) {
  const int r = kWin / 2;
  out_w = w - 2 * r;
  out_h = h - 2 * r;
  std::vector<double> tmp(static_cast<std::size_t>(out_w) * h, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kWin; ++i) acc += kernel[i] * img[static_cast<std::size_t>(y) * w + x + i];
      tmp[static_cast<std::size_t>(y) * out_w + x] = acc;
    }
  std::vector<double> out(static_cast<std::size_t>(out_w) * out_h, 0.0);
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kWin; ++i)
        acc += kernel[i] * tmp[static_cast<std::size_t>(y + i) * out_w + x];
      out[static_cast<std::size_t>(y) * out_w + x] = acc;
    }
  return out;
}

}  // namespace

double ssim(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw ContractViolation("ssim: image shapes must match");
  if (a.width < kWin || a.height < kWin)
    throw ContractViolation("ssim: images must be at least 11x11");
  const std::vector<double> kernel = gaussian_kernel();
  constexpr double kC1 = (0.01 * 1.0) * (0.01 * 1.0);
  constexpr double kC2 = (0.03 * 1.0) * (0.03 * 1.0);

  const std::size_t n_px = static_cast<std::size_t>(a.width) * a.height;
  std::vector<double> xa(n_px), xb(n_px), xaa(n_px), xbb(n_px), xab(n_px);
  double total = 0.0;
  for (int c = 0; c < a.channels; ++c) {
    for (std::size_t i = 0; i < n_px; ++i) {
      const double va = a.data[i * a.channels + c];
      const double vb = b.data[i * b.channels + c];
      xa[i] = va;
      xb[i] = vb;
      xaa[i] = va * va;
      xbb[i] = vb * vb;
      xab[i] = va * vb;
    }
    int ow = 0, oh = 0;
    const auto mu_a = filter_valid(xa, a.width, a.height, kernel, ow, oh);
    const auto mu_b = filter_valid(xb, a.width, a.height, kernel, ow, oh);
    const auto raw_aa = filter_valid(xaa, a.width, a.height, kernel, ow, oh);
    const auto raw_bb = filter_valid(xbb, a.width, a.height, kernel, ow, oh);
    const auto raw_ab = filter_valid(xab, a.width, a.height, kernel, ow, oh);
    double acc = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
      const double va = raw_aa[i] - mu_a[i] * mu_a[i];
      const double vb = raw_bb[i] - mu_b[i] * mu_b[i];
      const double cov = raw_ab[i] - mu_a[i] * mu_b[i];
      const double num = (2.0 * mu_a[i] * mu_b[i] + kC1) * (2.0 * cov + kC2);
      const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + kC1) * (va + vb + kC2);
      acc += num / den;
    }
    total += acc / static_cast<double>(mu_a.size());
  }
  return total / a.channels;
}

}  // namespace evsplat
