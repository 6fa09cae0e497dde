#include "evsplat/trainer.hpp"

#include "binio.hpp"
#include "evsplat/frustum_init.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

namespace evsplat {

Vec3 default_background() { return Vec3::Constant(display_to_linear(159.0 / 255.0)); }

double TrainConfig::densify_threshold(std::int64_t iteration) const {
  const std::int64_t span = densify_grad_decay_iterations > 0 ? densify_grad_decay_iterations : 1;
  const double s =
      std::min(1.0, static_cast<double>(std::max<std::int64_t>(iteration, 0)) / span);
  return densify_grad_start + (densify_grad_end - densify_grad_start) * s;
}

void TrainConfig::validate() const {
  if (total_iterations <= 0) throw ContractViolation("train config: total_iterations must be positive");
  if (adaptive_windows && n_max_events < 300)
    throw ContractViolation("train config: n_max_events must be at least 300");
  if (alpha_no_event < 0.0 || alpha_no_event > 1.0)
    throw ContractViolation("train config: alpha_no_event must lie in [0, 1]");
  if (split_scale_divisor <= 1.0)
    throw ContractViolation("train config: split_scale_divisor must exceed 1");
  if (opacity_reset_value <= 0.0 || opacity_reset_value >= 1.0)
    throw ContractViolation("train config: opacity_reset_value must lie in (0, 1)");
  if (init_opacity <= 0.0 || init_opacity >= 1.0)
    throw ContractViolation("train config: init_opacity must lie in (0, 1)");
  if (max_gaussians == 0) throw ContractViolation("train config: max_gaussians must be positive");
  if (sh_degree_cap_refined < 0 || sh_degree_cap_refined > 3 || sh_degree_cap_static < 0 ||
      sh_degree_cap_static > 3)
    throw ContractViolation("train config: sh degree caps must lie in [0, 3]");
  if (lr_sh_rest_divisor <= 0.0)
    throw ContractViolation("train config: lr_sh_rest_divisor must be positive");
  for (double lr : {lr_means_start, lr_means_end, lr_sh, lr_opacity, lr_scales, lr_rotations,
                    lr_pose, lr_pose_end})
    if (!(lr >= 0.0) || !std::isfinite(lr))
      throw ContractViolation("train config: learning rates must be finite and non-negative");
  if (!background.allFinite() || background.minCoeff() < 0.0)
    throw ContractViolation("train config: background radiance must be finite and non-negative");
}

Trainer::Trainer(GaussianCloud cloud, PoseTrack track, const EventStore* events,
                 CameraModel camera, TrainConfig config)
    : cloud_(std::move(cloud)),
      track_(std::move(track)),
      events_(events),
      camera_(camera),
      config_(config),
      rng_(config.seed) {
  config_.validate();
  camera_.validate();
  if (track_.empty()) throw ContractViolation("trainer: pose track is empty");
  track_.validate();
  cloud_.validate();
  if (events_ == nullptr || events_->empty())
    throw ContractViolation("trainer: an event stream is required");
  if (events_->width() != camera_.width || events_->height() != camera_.height)
    throw ContractViolation("trainer: event stream geometry does not match the camera");

  pose_errors_.assign(track_.size(), ErrorTransform{});
  compute_scene_extent();
  derive_t_max();

  const std::size_t n = cloud_.size();
  adam_means_ = AdamState(3 * n);
  adam_scales_ = AdamState(3 * n);
  adam_rotations_ = AdamState(4 * n);
  adam_opacity_ = AdamState(n);
  adam_sh_ = AdamState(cloud_.sh.size());
  adam_pose_ = AdamState(9 * track_.size());
  reset_densify_accumulators();
}

Trainer Trainer::initialize(const PoseTrack& track, const EventStore* events,
                            const CameraModel& camera, const TrainConfig& config) {
  FrustumInitOptions opts;
  opts.n_gaussians = config.init_gaussians;
  opts.sh_degree = config.sh_degree_cap();
  opts.init_opacity = config.init_opacity;
  std::mt19937_64 init_rng(config.seed ^ 0x9e3779b97f4a7c15ull);
  GaussianCloud cloud = frustum_init(track, camera, opts, init_rng);
  return Trainer(std::move(cloud), track, events, camera, config);
}

void Trainer::compute_scene_extent() {
  Vec3 centroid = Vec3::Zero();
  for (const SE3Pose& p : track_.poses) centroid += p.camera_center();
  centroid /= static_cast<double>(track_.size());
  double max_dist = 0.0;
  for (const SE3Pose& p : track_.poses)
    max_dist = std::max(max_dist, (p.camera_center() - centroid).norm());
  scene_extent_ = 1.1 * max_dist;
  if (scene_extent_ < 1e-9) scene_extent_ = camera_.z_far > 0.0 ? camera_.z_far : 1.0;
}

void Trainer::derive_t_max() {
  derived_t_max_us_ = config_.fixed_t_max_us;
  if (config_.adaptive_windows || derived_t_max_us_ != 0) return;
  // duration that holds n_max events at the stream's average rate
  const std::uint64_t span = events_->last_time_us() - events_->first_time_us();
  if (span == 0 || events_->size() == 0) {
    derived_t_max_us_ = 1000000;
    return;
  }
  const double d = static_cast<double>(config_.n_max_events) * static_cast<double>(span) /
                   static_cast<double>(events_->size());
  derived_t_max_us_ = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(d));
}

int Trainer::active_sh_degree() const {
  int unlocked = config_.sh_degree_cap();
  if (config_.sh_unlock_interval > 0)
    unlocked = static_cast<int>(std::min<std::int64_t>(unlocked, iteration_ / config_.sh_unlock_interval));
  return std::min(unlocked, cloud_.sh_degree);
}

double Trainer::lr_means(std::int64_t iteration) const {
  const std::int64_t span = config_.lr_means_decay_iterations > 0
                                ? config_.lr_means_decay_iterations
                                : config_.total_iterations;
  const double s = std::min(1.0, static_cast<double>(std::max<std::int64_t>(iteration, 0)) /
                                     static_cast<double>(span));
  const double start = config_.lr_means_start;
  const double end = config_.lr_means_end;
  if (start <= 0.0) return 0.0;
  // exponential interpolation from start to end
  return scene_extent_ * start * std::pow(end / start, s);
}

double Trainer::pose_lr(std::int64_t iteration) const {
  const double start = config_.lr_pose;
  const double end = config_.lr_pose_end;
  if (end <= 0.0 || start <= 0.0) return start;
  const double s = std::min(1.0, static_cast<double>(std::max<std::int64_t>(iteration, 0)) /
                                     static_cast<double>(config_.total_iterations));
  return start * std::pow(end / start, s);
}

std::pair<WindowResult, WindowResult> Trainer::sample_windows(std::uint64_t t_end_us) {
  if (config_.adaptive_windows) {
    const DualWindows dw = sample_dual_windows(*events_, t_end_us, config_.n_max_events, rng_);
    return {dw.long_window, dw.short_window};
  }
  // fixed-duration fallback: durations drawn over the same relative ranges
  const std::uint64_t t_max = derived_t_max_us_;
  auto draw = [&](std::uint64_t lo, std::uint64_t hi) {
    lo = std::max<std::uint64_t>(lo, 1);
    hi = std::max<std::uint64_t>(hi, lo);
    std::uniform_int_distribution<std::uint64_t> dist(lo, hi);
    return dist(rng_);
  };
  const std::uint64_t d_long = draw(t_max / 10, t_max);
  const std::uint64_t d_short = draw(t_max / 300, t_max / 30);
  auto resolve = [&](std::uint64_t d) {
    WindowResult w;
    w.t_start_us = t_end_us > d ? t_end_us - d : 0;
    if (w.t_start_us >= t_end_us) w.t_start_us = t_end_us > 0 ? t_end_us - 1 : 0;
    w.count = events_->count_in_window(w.t_start_us, t_end_us);
    return w;
  };
  return {resolve(d_long), resolve(d_short)};
}

Trainer::BoundPose Trainer::bind_pose(std::uint64_t t_us) const {
  BoundPose b;
  b.base = interpolate_pose(track_, t_us);
  b.bracket = track_.bracket(t_us);
  const ErrorTransform& lo = pose_errors_[b.bracket.lo];
  const ErrorTransform& hi = pose_errors_[b.bracket.hi];
  const double u = b.bracket.u;
  b.error.r1 = (1.0 - u) * lo.r1 + u * hi.r1;
  b.error.r2 = (1.0 - u) * lo.r2 + u * hi.r2;
  b.error.t = (1.0 - u) * lo.t + u * hi.t;
  b.refined = config_.refine_poses ? refined_pose(b.error, b.base) : b.base;
  return b;
}

SE3Pose Trainer::refined_pose_at(std::size_t track_index) const {
  if (track_index >= track_.size()) throw ContractViolation("trainer: pose index out of range");
  if (!config_.refine_poses) return track_.poses[track_index];
  return refined_pose(pose_errors_[track_index], track_.poses[track_index]);
}

void Trainer::reset_densify_accumulators() {
  accum_screen_grad_.assign(cloud_.size(), 0.0);
  accum_visible_count_.assign(cloud_.size(), 0);
  max_radius_px_.assign(cloud_.size(), 0.0);
}

namespace {

std::vector<std::uint32_t> union_of_visible(const std::vector<std::uint32_t>& a,
                                            const std::vector<std::uint32_t>& b,
                                            const std::vector<std::uint32_t>& c) {
  std::vector<std::uint32_t> out;
  out.reserve(a.size() + b.size() + c.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  out.insert(out.end(), c.begin(), c.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

StepMetrics Trainer::train_step() {
  ++iteration_;
  const std::size_t n = cloud_.size();
  StepMetrics metrics;
  metrics.iteration = iteration_;

  // supervision time drawn uniformly over track nodes
  std::uniform_int_distribution<std::size_t> pick(0, track_.size() - 1);
  const std::size_t t_index = pick(rng_);
  const std::uint64_t t_us = track_.timestamps_us[t_index];
  metrics.t_sample_us = t_us;

  const auto [win_long, win_short] = sample_windows(t_us);
  metrics.window_long_events = win_long.count;
  metrics.window_short_events = win_short.count;

  const BoundPose bp_t = bind_pose(t_us);
  const BoundPose bp_long = bind_pose(win_long.t_start_us);
  const BoundPose bp_short = bind_pose(win_short.t_start_us);

  RenderSettings rs;
  rs.background = config_.background;
  rs.threads = config_.threads;
  rs.sh_degree = active_sh_degree();

  const RenderOutput out_t = render(cloud_, bp_t.refined, camera_, rs);
  const RenderOutput out_long = render(cloud_, bp_long.refined, camera_, rs);
  const RenderOutput out_short = render(cloud_, bp_short.refined, camera_, rs);

  const EventFrame frame_long = events_->accumulate(win_long.t_start_us, t_us);
  const EventFrame frame_short = events_->accumulate(win_short.t_start_us, t_us);

  const Image map_long = event_loss_pixelwise(out_long.log, out_t.log, frame_long);
  const Image map_short = event_loss_pixelwise(out_short.log, out_t.log, frame_short);
  metrics.recon_long = recon_loss(map_long, frame_long.counts, config_.alpha_no_event);
  metrics.recon_short = recon_loss(map_short, frame_short.counts, config_.alpha_no_event);

  const std::vector<std::uint32_t> visible =
      union_of_visible(out_t.visible, out_long.visible, out_short.visible);
  metrics.iso = iso_loss(cloud_, visible);

  if (config_.refine_poses) {
    double term = 0.0;
    for (const BoundPose* bp : {&bp_t, &bp_long, &bp_short}) {
      const ErrorTransform node_lo[1] = {pose_errors_[bp->bracket.lo]};
      const ErrorTransform node_hi[1] = {pose_errors_[bp->bracket.hi]};
      term += (1.0 - bp->bracket.u) * pose_reg(node_lo) + bp->bracket.u * pose_reg(node_hi);
    }
    metrics.pose_term = term;
  }

  metrics.lambda_iso_value = lambda_iso(iteration_, config_.weights);
  metrics.loss = total_loss(metrics.recon_long, metrics.recon_short, metrics.iso,
                            metrics.pose_term, iteration_, config_.weights);
  metrics.n_gaussians = n;
  if (!std::isfinite(metrics.loss)) {
    std::ostringstream oss;
    oss << "train step " << iteration_ << ": non-finite loss (recon_long=" << metrics.recon_long
        << " recon_short=" << metrics.recon_short << " iso=" << metrics.iso
        << " pose=" << metrics.pose_term << " t=" << t_us << "us windows=["
        << win_long.t_start_us << ", " << win_short.t_start_us << "])";
    throw NumericError(oss.str());
  }

  // route the reconstruction gradient onto the three renders' log images,
  // each pixel on its mosaic channel
  const Image w_long =
      recon_loss_pixel_weights(map_long, frame_long.counts, config_.alpha_no_event);
  const Image w_short =
      recon_loss_pixel_weights(map_short, frame_short.counts, config_.alpha_no_event);
  Image d_t = Image::zeros(camera_.width, camera_.height, 3);
  Image d_long = Image::zeros(camera_.width, camera_.height, 3);
  Image d_short = Image::zeros(camera_.width, camera_.height, 3);
  for (int py = 0; py < camera_.height; ++py)
    for (int px = 0; px < camera_.width; ++px) {
      const int ch = BayerMask::channel_at(px, py);
      {
        const double diff = out_t.log.at(px, py, ch) - out_long.log.at(px, py, ch) -
                            frame_long.value_at(px, py);
        const double g = config_.weights.lambda_long * w_long.at(px, py, 0) * sign_of(diff);
        d_t.at(px, py, ch) += g;
        d_long.at(px, py, ch) -= g;
      }
      {
        const double diff = out_t.log.at(px, py, ch) - out_short.log.at(px, py, ch) -
                            frame_short.value_at(px, py);
        const double g = config_.weights.lambda_short * w_short.at(px, py, 0) * sign_of(diff);
        d_t.at(px, py, ch) += g;
        d_short.at(px, py, ch) -= g;
      }
    }

  const GradientBundle b_t = render_backward(cloud_, bp_t.refined, camera_, d_t, rs);
  const GradientBundle b_long = render_backward(cloud_, bp_long.refined, camera_, d_long, rs);
  const GradientBundle b_short = render_backward(cloud_, bp_short.refined, camera_, d_short, rs);

  // densification statistics from every render of the step
  for (const GradientBundle* b : {&b_t, &b_long, &b_short})
    for (std::size_t i = 0; i < n; ++i) {
      if (b->visible[i]) {
        accum_screen_grad_[i] += b->d_screen_norm[i];
        accum_visible_count_[i] += 1;
      }
      max_radius_px_[i] = std::max(max_radius_px_[i], b->radius_px[i]);
    }

  if (!config_.freeze_gaussians) {
    GradientBundle sum = b_t;
    for (const GradientBundle* b : {&b_long, &b_short}) {
      for (std::size_t i = 0; i < n; ++i) {
        sum.d_means[i] += b->d_means[i];
        sum.d_log_scales[i] += b->d_log_scales[i];
        sum.d_rotations[i] += b->d_rotations[i];
        sum.d_opacity_logits[i] += b->d_opacity_logits[i];
      }
      for (std::size_t i = 0; i < sum.d_sh.size(); ++i) sum.d_sh[i] += b->d_sh[i];
    }
    iso_loss_backward(cloud_, visible, metrics.lambda_iso_value, sum.d_log_scales);
    apply_gaussian_updates(sum, n);
  }

  if (config_.refine_poses && !config_.freeze_poses) {
    const std::size_t n_poses = track_.size();
    std::vector<double> grads(9 * n_poses, 0.0);
    auto add_block = [&](std::size_t index, const Vec3& g1, const Vec3& g2, const Vec3& gt) {
      double* blk = grads.data() + 9 * index;
      for (int j = 0; j < 3; ++j) {
        blk[j] += g1[j];
        blk[3 + j] += g2[j];
        blk[6 + j] += gt[j];
      }
    };
    const BoundPose* bound[3] = {&bp_t, &bp_long, &bp_short};
    const GradientBundle* bundles[3] = {&b_t, &b_long, &b_short};
    for (int k = 0; k < 3; ++k) {
      const BoundPose& bp = *bound[k];
      const std::size_t nodes[2] = {bp.bracket.lo, bp.bracket.hi};
      const double weights[2] = {1.0 - bp.bracket.u, bp.bracket.u};
      // reconstruction term through the render's pose gradient; the render
      // used the blended encoding, so both bracketing nodes get a share
      const RefinedPoseGrads rp =
          refined_pose_backward(bp.base, bundles[k]->d_pose_rotation,
                                bundles[k]->d_pose_translation);
      const GramSchmidtGrads gs =
          gram_schmidt_backward(bp.error.r1, bp.error.r2, rp.d_err_rotation);
      for (int side = 0; side < 2; ++side) {
        const double w = weights[side];
        if (w == 0.0) continue;
        add_block(nodes[side], w * gs.d_r1, w * gs.d_r2, w * rp.d_err_translation);
        // regularizer on the node's own encoding, once per occurrence
        const ErrorTransform& e = pose_errors_[nodes[side]];
        const PoseRegGrad pr = pose_reg_backward(e);
        const GramSchmidtGrads gsr = gram_schmidt_backward(e.r1, e.r2, pr.d_rotation);
        const double wl = w * config_.weights.lambda_pose;
        add_block(nodes[side], wl * gsr.d_r1, wl * gsr.d_r2, wl * pr.d_translation);
      }
    }

    std::vector<double> params(9 * n_poses);
    for (std::size_t i = 0; i < n_poses; ++i) {
      double* blk = params.data() + 9 * i;
      for (int j = 0; j < 3; ++j) {
        blk[j] = pose_errors_[i].r1[j];
        blk[3 + j] = pose_errors_[i].r2[j];
        blk[6 + j] = pose_errors_[i].t[j];
      }
    }
    // lazy update: a pose the step never rendered has a zero gradient and
    // must not coast on stale momentum, so only the bound blocks move
    std::uint32_t touched[6];
    std::size_t n_touched = 0;
    for (const BoundPose* bp : {&bp_t, &bp_long, &bp_short}) {
      touched[n_touched++] = static_cast<std::uint32_t>(bp->bracket.lo);
      if (bp->bracket.hi != bp->bracket.lo)
        touched[n_touched++] = static_cast<std::uint32_t>(bp->bracket.hi);
    }
    std::sort(touched, touched + n_touched);
    n_touched = std::unique(touched, touched + n_touched) - touched;
    adam_pose_.step_blocks(params, grads, 9,
                           std::span<const std::uint32_t>(touched, n_touched),
                           pose_lr(iteration_));
    for (std::size_t i = 0; i < n_poses; ++i) {
      const double* blk = params.data() + 9 * i;
      ErrorTransform e;
      e.r1 = Vec3(blk[0], blk[1], blk[2]);
      e.r2 = Vec3(blk[3], blk[4], blk[5]);
      e.t = Vec3(blk[6], blk[7], blk[8]);
      try {
        (void)gram_schmidt(e.r1, e.r2);
      } catch (const NumericError&) {
        // degenerate encoding: keep the previous value for this pose
        ++degenerate_pose_rollbacks_;
        continue;
      }
      pose_errors_[i] = e;
    }
  }

  if (!config_.freeze_gaussians) {
    const bool densify_due = config_.densify_interval > 0 && iteration_ >= config_.densify_from &&
                             iteration_ <= config_.densify_until &&
                             iteration_ % config_.densify_interval == 0;
    if (densify_due) densify_and_prune();
    const bool reset_due = config_.opacity_reset_interval > 0 &&
                           iteration_ <= config_.opacity_reset_until &&
                           iteration_ % config_.opacity_reset_interval == 0;
    if (reset_due) opacity_reset();
  }

  metrics.n_gaussians = cloud_.size();
  double dev = 0.0;
  for (const ErrorTransform& e : pose_errors_) dev += e.deviation_from_identity();
  metrics.pose_deviation_mean = dev / static_cast<double>(pose_errors_.size());
  metrics.degenerate_pose_rollbacks = degenerate_pose_rollbacks_;
  return metrics;
}

void Trainer::apply_gaussian_updates(const GradientBundle& sum, std::size_t n) {
  adam_means_.step({reinterpret_cast<double*>(cloud_.means.data()), 3 * n},
                   {reinterpret_cast<const double*>(sum.d_means.data()), 3 * n},
                   lr_means(iteration_));
  adam_scales_.step({reinterpret_cast<double*>(cloud_.log_scales.data()), 3 * n},
                    {reinterpret_cast<const double*>(sum.d_log_scales.data()), 3 * n},
                    config_.lr_scales);
  adam_rotations_.step({reinterpret_cast<double*>(cloud_.rotations.data()), 4 * n},
                       {reinterpret_cast<const double*>(sum.d_rotations.data()), 4 * n},
                       config_.lr_rotations);
  adam_opacity_.step(cloud_.opacity_logits, sum.d_opacity_logits, config_.lr_opacity);
  const std::size_t stride = static_cast<std::size_t>(cloud_.sh_stride());
  AdamState::SliceRate slices[2] = {
      {0, 3, config_.lr_sh},
      {3, stride - 3, config_.lr_sh / config_.lr_sh_rest_divisor},
  };
  adam_sh_.step_slices(cloud_.sh, sum.d_sh, stride,
                       std::span<const AdamState::SliceRate>(slices, stride > 3 ? 2 : 1));
  cloud_.renormalize_rotations();
}

void Trainer::densify_and_prune() {
  const std::size_t n = cloud_.size();
  const double threshold = config_.densify_threshold(iteration_);
  const double clone_below = config_.clone_scale_fraction * scene_extent_;
  const double radius_cap =
      config_.prune_radius_fraction * static_cast<double>(std::max(camera_.width, camera_.height));
  std::vector<std::uint8_t> keep(n, 1);
  GaussianCloud appended = GaussianCloud::sized(0, cloud_.sh_degree);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t budget = config_.max_gaussians > n ? config_.max_gaussians - n : 0;
  std::size_t n_appended = 0;

  for (std::size_t i = 0; i < n; ++i) {
    if (sigmoid(cloud_.opacity_logits[i]) < config_.prune_opacity ||
        max_radius_px_[i] > radius_cap) {
      keep[i] = 0;
      continue;
    }
    if (accum_visible_count_[i] == 0) continue;
    const double mean_grad = accum_screen_grad_[i] / accum_visible_count_[i];
    if (mean_grad <= threshold) continue;
    const Vec3 scales = cloud_.log_scales[i].array().exp();
    if (scales.maxCoeff() <= clone_below) {
      if (n_appended + 1 > budget) continue;
      appended.push_back(cloud_.means[i], cloud_.log_scales[i], cloud_.rotations[i],
                         cloud_.opacity_logits[i], cloud_.sh_block(i));
      ++n_appended;
    } else {
      if (n_appended + 2 > budget) continue;
      const Mat3 m0 = rotation_from_quat(cloud_.rotations[i]) * scales.asDiagonal();
      const Vec3 child_ls =
          cloud_.log_scales[i] - Vec3::Constant(std::log(config_.split_scale_divisor));
      for (int k = 0; k < 2; ++k) {
        const Vec3 z(normal(rng_), normal(rng_), normal(rng_));
        appended.push_back(cloud_.means[i] + m0 * z, child_ls, cloud_.rotations[i],
                           cloud_.opacity_logits[i], cloud_.sh_block(i));
      }
      n_appended += 2;
      keep[i] = 0;  // replaced by its two children
    }
  }

  cloud_.apply_keep_mask(keep);
  adam_means_.resize_blocks(keep, 3, n_appended);
  adam_scales_.resize_blocks(keep, 3, n_appended);
  adam_rotations_.resize_blocks(keep, 4, n_appended);
  adam_opacity_.resize_blocks(keep, 1, n_appended);
  adam_sh_.resize_blocks(keep, static_cast<std::size_t>(cloud_.sh_stride()), n_appended);
  for (std::size_t i = 0; i < n_appended; ++i)
    cloud_.push_back(appended.means[i], appended.log_scales[i], appended.rotations[i],
                     appended.opacity_logits[i], appended.sh_block(i));
  reset_densify_accumulators();
}

void Trainer::opacity_reset() {
  const double lg = logit(config_.opacity_reset_value);
  std::fill(cloud_.opacity_logits.begin(), cloud_.opacity_logits.end(), lg);
  adam_opacity_.zero_moments();
}

void Trainer::run(std::int64_t n_steps, const std::function<void(const StepMetrics&)>& on_step) {
  for (std::int64_t k = 0; k < n_steps; ++k) {
    const StepMetrics sm = train_step();
    if (on_step) on_step(sm);
  }
}

Checkpoint Trainer::checkpoint() const { return Checkpoint{cloud_, iteration_}; }

void Trainer::restore(const Checkpoint& ckpt) {
  ckpt.cloud.validate();
  cloud_ = ckpt.cloud;
  iteration_ = ckpt.iteration;
  // without a matching train state the optimizer restarts cold
  const std::size_t n = cloud_.size();
  adam_means_ = AdamState(3 * n);
  adam_scales_ = AdamState(3 * n);
  adam_rotations_ = AdamState(4 * n);
  adam_opacity_ = AdamState(n);
  adam_sh_ = AdamState(cloud_.sh.size());
  adam_pose_ = AdamState(9 * track_.size());
  reset_densify_accumulators();
}

namespace {
constexpr char kTrainStateMagic[] = "EVSTRN02";
}

void Trainer::save_train_state(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  std::ofstream os(tmp, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os.write(kTrainStateMagic, 8);
  binio::write_le<std::int64_t>(os, iteration_);
  binio::write_le<std::uint64_t>(os, degenerate_pose_rollbacks_);
  {
    std::ostringstream rng_text;
    rng_text << rng_;
    const std::string s = rng_text.str();
    binio::write_le<std::uint64_t>(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  adam_means_.save(os);
  adam_scales_.save(os);
  adam_rotations_.save(os);
  adam_opacity_.save(os);
  adam_sh_.save(os);
  adam_pose_.save(os);
  binio::write_le<std::uint64_t>(os, pose_errors_.size());
  for (const ErrorTransform& e : pose_errors_)
    for (const Vec3* v : {&e.r1, &e.r2, &e.t})
      for (int j = 0; j < 3; ++j) binio::write_le<double>(os, (*v)[j]);
  binio::write_le<std::uint64_t>(os, accum_screen_grad_.size());
  for (double v : accum_screen_grad_) binio::write_le<double>(os, v);
  for (std::uint32_t v : accum_visible_count_) binio::write_le<std::uint32_t>(os, v);
  for (double v : max_radius_px_) binio::write_le<double>(os, v);
  if (!os) throw IoError("write failed for " + path);
  os.close();
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename " + tmp + ": " + ec.message());
}

void Trainer::load_train_state(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  binio::expect_magic(is, kTrainStateMagic, path);
  iteration_ = binio::read_le<std::int64_t>(is, "iteration");
  degenerate_pose_rollbacks_ = binio::read_le<std::uint64_t>(is, "rollback count");
  {
    const auto len = binio::read_le<std::uint64_t>(is, "rng state length");
    if (len > (1 << 20)) throw IoError(path + ": implausible rng state length");
    std::string s(len, '\0');
    is.read(s.data(), static_cast<std::streamsize>(len));
    if (!is) throw IoError("truncated file while reading rng state");
    std::istringstream rng_text(s);
    rng_text >> rng_;
    if (!rng_text) throw IoError(path + ": malformed rng state");
  }
  adam_means_ = AdamState::load(is);
  adam_scales_ = AdamState::load(is);
  adam_rotations_ = AdamState::load(is);
  adam_opacity_ = AdamState::load(is);
  adam_sh_ = AdamState::load(is);
  adam_pose_ = AdamState::load(is);
  const auto n_poses = binio::read_le<std::uint64_t>(is, "pose error count");
  if (n_poses != track_.size())
    throw ContractViolation("train state: pose error count does not match the track");
  pose_errors_.assign(n_poses, ErrorTransform{});
  for (ErrorTransform& e : pose_errors_)
    for (Vec3* v : {&e.r1, &e.r2, &e.t})
      for (int j = 0; j < 3; ++j) (*v)[j] = binio::read_le<double>(is, "pose error parameter");
  const auto n_accum = binio::read_le<std::uint64_t>(is, "accumulator size");
  if (n_accum != cloud_.size())
    throw ContractViolation("train state: accumulator size does not match the model");
  accum_screen_grad_.resize(n_accum);
  accum_visible_count_.resize(n_accum);
  max_radius_px_.resize(n_accum);
  for (double& v : accum_screen_grad_) v = binio::read_le<double>(is, "screen gradient sum");
  for (std::uint32_t& v : accum_visible_count_)
    v = binio::read_le<std::uint32_t>(is, "visible count");
  for (double& v : max_radius_px_) v = binio::read_le<double>(is, "max radius");
  if (adam_means_.size() != 3 * cloud_.size() || adam_sh_.size() != cloud_.sh.size() ||
      adam_pose_.size() != 9 * track_.size())
    throw ContractViolation("train state: optimizer sizes do not match the model");
}

}  // namespace evsplat
