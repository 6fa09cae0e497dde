#pragma once

#include "evsplat/events.hpp"
#include "evsplat/gaussian_cloud.hpp"
#include "evsplat/sixdof.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace evsplat {

// Per-pixel absolute difference between the rendered log-brightness change
// and the event-integrated change, each pixel compared on its mosaic color
// channel: | (log_t2 - log_t1)[bayer(x,y)] - delta * sum(x,y) |.
Image event_loss_pixelwise(const Image& log_t1, const Image& log_t2, const EventFrame& frame);

// Weighted average of a loss map that balances event and no-event pixels:
// (1 - alpha) * mean(loss | count > 0) + alpha * mean(loss | count == 0).
// An empty set contributes nothing.
double recon_loss(const Image& loss_map, std::span<const std::uint32_t> counts,
                  double alpha_no_event);

// Per-pixel weight the reconstruction loss puts on each pixel, i.e.
// d recon / d loss_map. Zero for pixels of an empty set.
Image recon_loss_pixel_weights(const Image& loss_map, std::span<const std::uint32_t> counts,
                               double alpha_no_event);

// Mean over the visible set of || s - mean3(s) ||_1 with s = exp(log_scale):
// pulls each visible Gaussian toward isotropy.
double iso_loss(const GaussianCloud& cloud, std::span<const std::uint32_t> visible);

// accumulates weight * d(iso)/d(log_scales) into grads (sized like
// cloud.log_scales)
void iso_loss_backward(const GaussianCloud& cloud, std::span<const std::uint32_t> visible,
                       double weight, std::vector<Vec3>& grads);

// sum of ||[R|t] - [I|0]||_F over the given error transforms
double pose_reg(std::span<const ErrorTransform> errors);

struct PoseRegGrad {
  Mat3 d_rotation = Mat3::Zero();
  Vec3 d_translation = Vec3::Zero();
};

// gradient of one transform's Frobenius deviation (zero at exact identity)
PoseRegGrad pose_reg_backward(const ErrorTransform& error);

struct LossWeights {
  double lambda_long = 0.65;   // weight of the long-window term
  double lambda_short = 0.65;  // weight of the short-window term
  double iso_before = 10.0;
  double iso_after = 1.0;
  std::int64_t iso_switch_iteration = 10000;
  double lambda_pose = 1.0;
};

// iso weight schedule: iso_before through the switch iteration, iso_after past it
double lambda_iso(std::int64_t iteration, const LossWeights& weights);

double total_loss(double recon_long, double recon_short, double iso, double pose_term,
                  std::int64_t iteration, const LossWeights& weights);

// Per-channel exposure alignment in log space: shifts each predicted channel
// so its mean matches the reference channel's mean.
Image color_correct(const Image& pred_log, const Image& ref_log);

}  // namespace evsplat
