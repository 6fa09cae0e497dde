#include "evsplat/losses.hpp"

#include <cmath>

namespace evsplat {

Image event_loss_pixelwise(const Image& log_t1, const Image& log_t2, const EventFrame& frame) {
  if (!log_t1.same_shape(log_t2) || log_t1.channels != 3)
    throw ContractViolation("event_loss_pixelwise: renders must be matching 3-channel images");
  if (log_t1.width != frame.width || log_t1.height != frame.height)
    throw ContractViolation("event_loss_pixelwise: frame geometry mismatch");
  Image loss = Image::zeros(frame.width, frame.height, 1);
  for (int y = 0; y < frame.height; ++y)
    for (int x = 0; x < frame.width; ++x) {
      const int c = BayerMask::channel_at(x, y);
      const double rendered = log_t2.at(x, y, c) - log_t1.at(x, y, c);
      loss.at(x, y, 0) = std::abs(rendered - frame.value_at(x, y));
    }
  return loss;
}

namespace {

struct SplitCounts {
  std::size_t events = 0;
  std::size_t quiet = 0;
};

SplitCounts split_counts(std::span<const std::uint32_t> counts) {
  SplitCounts s;
  for (const std::uint32_t c : counts)
    if (c > 0) ++s.events; else ++s.quiet;
  return s;
}

}  // namespace

double recon_loss(const Image& loss_map, std::span<const std::uint32_t> counts,
                  double alpha_no_event) {
  if (loss_map.channels != 1) throw ContractViolation("recon_loss: loss map must be 1-channel");
  if (counts.size() != loss_map.size())
    throw ContractViolation("recon_loss: counts length mismatch");
  const SplitCounts s = split_counts(counts);
  double sum_ev = 0.0, sum_quiet = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    (counts[i] > 0 ? sum_ev : sum_quiet) += loss_map.data[i];
  double loss = 0.0;
  if (s.events > 0) loss += (1.0 - alpha_no_event) * sum_ev / static_cast<double>(s.events);
  if (s.quiet > 0) loss += alpha_no_event * sum_quiet / static_cast<double>(s.quiet);
  return loss;
}

Image recon_loss_pixel_weights(const Image& loss_map, std::span<const std::uint32_t> counts,
                               double alpha_no_event) {
  if (loss_map.channels != 1) throw ContractViolation("recon_loss: loss map must be 1-channel");
  if (counts.size() != loss_map.size())
    throw ContractViolation("recon_loss: counts length mismatch");
  const SplitCounts s = split_counts(counts);
  const double w_ev = s.events > 0 ? (1.0 - alpha_no_event) / static_cast<double>(s.events) : 0.0;
  const double w_quiet = s.quiet > 0 ? alpha_no_event / static_cast<double>(s.quiet) : 0.0;
  Image w = Image::zeros(loss_map.width, loss_map.height, 1);
  for (std::size_t i = 0; i < counts.size(); ++i) w.data[i] = counts[i] > 0 ? w_ev : w_quiet;
  return w;
}

double iso_loss(const GaussianCloud& cloud, std::span<const std::uint32_t> visible) {
  if (visible.empty()) return 0.0;
  double total = 0.0;
  for (const std::uint32_t i : visible) {
    const Vec3 s = cloud.log_scales[i].array().exp();
    const double mean = (s[0] + s[1] + s[2]) / 3.0;
    total += std::abs(s[0] - mean) + std::abs(s[1] - mean) + std::abs(s[2] - mean);
  }
  return total / static_cast<double>(visible.size());
}

void iso_loss_backward(const GaussianCloud& cloud, std::span<const std::uint32_t> visible,
                       double weight, std::vector<Vec3>& grads) {
  if (visible.empty()) return;
  if (grads.size() != cloud.size())
    throw ContractViolation("iso_loss_backward: gradient array size mismatch");
  const double inv_n = weight / static_cast<double>(visible.size());
  for (const std::uint32_t i : visible) {
    const Vec3 s = cloud.log_scales[i].array().exp();
    const double mean = (s[0] + s[1] + s[2]) / 3.0;
    Vec3 sign;
    double sign_sum = 0.0;
    for (int j = 0; j < 3; ++j) {
      const double d = s[j] - mean;
      sign[j] = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
      sign_sum += sign[j];
    }
    for (int j = 0; j < 3; ++j) {
      const double d_sj = inv_n * (sign[j] - sign_sum / 3.0);
      grads[i][j] += d_sj * s[j];  // through s = exp(log_scale)
    }
  }
}

double pose_reg(std::span<const ErrorTransform> errors) {
  if (errors.empty()) throw ContractViolation("pose_reg: need at least one transform");
  double total = 0.0;
  for (const ErrorTransform& e : errors) total += e.deviation_from_identity();
  return total;
}

PoseRegGrad pose_reg_backward(const ErrorTransform& error) {
  PoseRegGrad out;
  Mat34 dev = error.matrix();
  dev.leftCols<3>() -= Mat3::Identity();
  const double norm = dev.norm();
  if (norm <= 0.0) return out;  // subgradient at the exact identity
  out.d_rotation = dev.leftCols<3>() / norm;
  out.d_translation = dev.col(3) / norm;
  return out;
}

double lambda_iso(std::int64_t iteration, const LossWeights& weights) {
  return iteration <= weights.iso_switch_iteration ? weights.iso_before : weights.iso_after;
}

double total_loss(double recon_long, double recon_short, double iso, double pose_term,
                  std::int64_t iteration, const LossWeights& weights) {
  return weights.lambda_long * recon_long + weights.lambda_short * recon_short +
         lambda_iso(iteration, weights) * iso + weights.lambda_pose * pose_term;
}

Image color_correct(const Image& pred_log, const Image& ref_log) {
  if (!pred_log.same_shape(ref_log))
    throw ContractViolation("color_correct: image shapes must match");
  Image out = pred_log;
  const std::size_t n_px = static_cast<std::size_t>(pred_log.width) * pred_log.height;
  for (int c = 0; c < pred_log.channels; ++c) {
    double mean_pred = 0.0, mean_ref = 0.0;
    for (std::size_t i = 0; i < n_px; ++i) {
      mean_pred += pred_log.data[i * pred_log.channels + c];
      mean_ref += ref_log.data[i * pred_log.channels + c];
    }
    const double shift = (mean_ref - mean_pred) / static_cast<double>(n_px);
    for (std::size_t i = 0; i < n_px; ++i) out.data[i * pred_log.channels + c] += shift;
  }
  return out;
}

}  // namespace evsplat
