#pragma once

#include "evsplat/adam.hpp"
#include "evsplat/checkpoint.hpp"
#include "evsplat/events.hpp"
#include "evsplat/losses.hpp"
#include "evsplat/pose_track.hpp"
#include "evsplat/rasterizer.hpp"
#include "evsplat/sixdof.hpp"

#include <functional>
#include <random>
#include <utility>

namespace evsplat {

// linear background radiance of the mid-gray 159/255 display value
Vec3 default_background();

struct TrainConfig {
  std::int64_t total_iterations = 60000;

  // densification and pruning
  std::int64_t densify_from = 500;
  std::int64_t densify_interval = 100;
  std::int64_t densify_until = 50000;
  double densify_grad_start = 2e-4;   // screen-gradient threshold, NDC scale
  double densify_grad_end = 4e-5;
  std::int64_t densify_grad_decay_iterations = 40000;
  double clone_scale_fraction = 0.01;  // of scene extent: clone below, split above
  double split_scale_divisor = 1.6;
  double prune_opacity = 0.005;
  double prune_radius_fraction = 0.5;  // of max(width, height), pixels
  std::size_t max_gaussians = 500000;

  // periodic opacity resets
  std::int64_t opacity_reset_interval = 3000;
  std::int64_t opacity_reset_until = 30000;
  double opacity_reset_value = 0.01;

  // supervision windows
  std::uint64_t n_max_events = 1000000;
  bool adaptive_windows = true;
  std::uint64_t fixed_t_max_us = 0;  // fixed-duration fallback; 0 derives it from the stream

  // loss
  LossWeights weights;
  double alpha_no_event = 0.3;

  // pose refinement
  bool refine_poses = true;
  bool freeze_poses = false;      // keep error transforms fixed (the stiff-regularizer limit)
  bool freeze_gaussians = false;  // pose-only optimization
  double lr_pose = 1e-4;
  double lr_pose_end = 0.0;  // 0 keeps lr_pose constant for the whole run

  // spherical harmonics schedule
  int sh_degree_cap_refined = 1;    // cap while pose refinement is active
  int sh_degree_cap_static = 3;
  std::int64_t sh_unlock_interval = 1000;

  // learning rates (means scale with the scene extent)
  double lr_means_start = 1.6e-4;
  double lr_means_end = 1.6e-6;
  std::int64_t lr_means_decay_iterations = 0;  // 0 = total_iterations
  double lr_sh = 2.5e-3;
  double lr_sh_rest_divisor = 20.0;
  double lr_opacity = 0.05;
  double lr_scales = 5e-3;
  double lr_rotations = 1e-3;

  // initialization
  std::size_t init_gaussians = 50000;
  double init_opacity = 0.1;

  std::uint64_t seed = 0;
  int threads = 0;
  Vec3 background = default_background();

  int sh_degree_cap() const { return refine_poses ? sh_degree_cap_refined : sh_degree_cap_static; }
  double densify_threshold(std::int64_t iteration) const;
  void validate() const;
};

struct StepMetrics {
  std::int64_t iteration = 0;
  double loss = 0.0;
  double recon_long = 0.0;
  double recon_short = 0.0;
  double iso = 0.0;
  double pose_term = 0.0;
  double lambda_iso_value = 0.0;
  std::size_t n_gaussians = 0;
  std::uint64_t t_sample_us = 0;
  std::uint64_t window_long_events = 0;
  std::uint64_t window_short_events = 0;
  double pose_deviation_mean = 0.0;  // mean ||error - identity||_F over the track
  std::size_t degenerate_pose_rollbacks = 0;  // cumulative since training started
};

class Trainer {
 public:
  Trainer(GaussianCloud cloud, PoseTrack track, const EventStore* events, CameraModel camera,
          TrainConfig config);

  // frustum-inits the cloud from the track before construction
  static Trainer initialize(const PoseTrack& track, const EventStore* events,
                            const CameraModel& camera, const TrainConfig& config);

  StepMetrics train_step();
  void run(std::int64_t n_steps, const std::function<void(const StepMetrics&)>& on_step = {});

  // exposed for scheduling tests; normally driven by train_step
  void densify_and_prune();
  void opacity_reset();

  const GaussianCloud& cloud() const { return cloud_; }
  const PoseTrack& base_track() const { return track_; }
  const CameraModel& camera() const { return camera_; }
  const TrainConfig& config() const { return config_; }
  const std::vector<ErrorTransform>& pose_errors() const { return pose_errors_; }
  std::vector<ErrorTransform>& mutable_pose_errors() { return pose_errors_; }
  std::int64_t iteration() const { return iteration_; }
  double scene_extent() const { return scene_extent_; }
  int active_sh_degree() const;

  SE3Pose refined_pose_at(std::size_t track_index) const;

  Checkpoint checkpoint() const;
  void restore(const Checkpoint& ckpt);

  // optimizer / rng / pose-error sidecar for exact resume
  void save_train_state(const std::string& path) const;
  void load_train_state(const std::string& path);

 private:
  GaussianCloud cloud_;
  PoseTrack track_;
  const EventStore* events_;
  CameraModel camera_;
  TrainConfig config_;
  std::mt19937_64 rng_;
  std::int64_t iteration_ = 0;
  double scene_extent_ = 1.0;
  std::uint64_t derived_t_max_us_ = 0;

  std::vector<ErrorTransform> pose_errors_;

  AdamState adam_means_;
  AdamState adam_scales_;
  AdamState adam_rotations_;
  AdamState adam_opacity_;
  AdamState adam_sh_;
  AdamState adam_pose_;

  // densification bookkeeping since the last densify pass
  std::vector<double> accum_screen_grad_;
  std::vector<std::uint32_t> accum_visible_count_;
  std::vector<double> max_radius_px_;
  std::size_t degenerate_pose_rollbacks_ = 0;

  // long and short supervision windows ending at t, adaptive or fixed-duration
  std::pair<WindowResult, WindowResult> sample_windows(std::uint64_t t_end_us);

  struct BoundPose {
    SE3Pose base;  // interpolated base pose
    PoseTrack::Bracket bracket;
    ErrorTransform error;  // node encodings blended with the bracket weights
    SE3Pose refined;
  };
  BoundPose bind_pose(std::uint64_t t_us) const;

  double lr_means(std::int64_t iteration) const;
  double pose_lr(std::int64_t iteration) const;
  void compute_scene_extent();
  void derive_t_max();
  void apply_gaussian_updates(const GradientBundle& sum, std::size_t n);
  void reset_densify_accumulators();
};

}  // namespace evsplat
