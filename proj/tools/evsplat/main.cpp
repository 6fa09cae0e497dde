// evsplat command line: simulate / train / render / eval / perturb-poses /
// gradcheck. Exit codes: 0 success, 2 usage or contract violation, 3 numeric
// failure.

#include <CLI11.hpp>

#include "evsplat/checkpoint.hpp"
#include "evsplat/config.hpp"
#include "evsplat/event_sim.hpp"
#include "evsplat/gradcheck.hpp"
#include "evsplat/image_io.hpp"
#include "evsplat/losses.hpp"
#include "evsplat/metrics.hpp"
#include "evsplat/ou_noise.hpp"
#include "evsplat/toy_scene.hpp"
#include "evsplat/trainer.hpp"
#include "evsplat/view_align.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

namespace fs = std::filesystem;
using namespace evsplat;

namespace {

struct ConfigArgs {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_config_options(CLI::App* cmd, ConfigArgs* args) {
  cmd->add_option("--config", args->config_path, "INI config file");
  cmd->add_option("--set", args->overrides, "override config keys, e.g. --set train.seed=3");
}

Config load_config(const ConfigArgs& args) {
  Config config;
  if (!args.config_path.empty()) config = Config::parse_file(args.config_path);
  for (const std::string& kv : args.overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw ContractViolation("--set expects key=value, got \"" + kv + "\"");
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return config;
}

// Typos are rejected for the sections this command reads; sections belonging
// to other commands may share the file and pass untouched.
void reject_unknown_keys(const Config& config, std::initializer_list<const char*> read_sections) {
  static const std::set<std::string> known = {"camera", "train", "simulate", "eval", "render"};
  std::string bad;
  for (const std::string& key : config.unconsumed()) {
    const std::size_t dot = key.find('.');
    const std::string section = dot == std::string::npos ? "" : key.substr(0, dot);
    bool read = false;
    for (const char* s : read_sections) read = read || section == s;
    if (section.empty() || known.count(section) == 0 || read) {
      if (!bad.empty()) bad += ", ";
      bad += key;
    }
  }
  if (!bad.empty())
    throw ContractViolation(config.origin() + ": unknown config keys: " + bad);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_effective_config(const std::string& path, const CameraModel& cam,
                            const TrainConfig& c) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << "[camera]\n"
     << "width = " << cam.width << "\n"
     << "height = " << cam.height << "\n"
     << "fx = " << fmt(cam.fx()) << "\n"
     << "fy = " << fmt(cam.fy()) << "\n"
     << "cx = " << fmt(cam.cx()) << "\n"
     << "cy = " << fmt(cam.cy()) << "\n"
     << "z_near = " << fmt(cam.z_near) << "\n"
     << "z_far = " << fmt(cam.z_far) << "\n\n";
  os << "[train]\n"
     << "total_iterations = " << c.total_iterations << "\n"
     << "densify_from = " << c.densify_from << "\n"
     << "densify_interval = " << c.densify_interval << "\n"
     << "densify_until = " << c.densify_until << "\n"
     << "densify_grad_start = " << fmt(c.densify_grad_start) << "\n"
     << "densify_grad_end = " << fmt(c.densify_grad_end) << "\n"
     << "densify_grad_decay_iterations = " << c.densify_grad_decay_iterations << "\n"
     << "clone_scale_fraction = " << fmt(c.clone_scale_fraction) << "\n"
     << "split_scale_divisor = " << fmt(c.split_scale_divisor) << "\n"
     << "prune_opacity = " << fmt(c.prune_opacity) << "\n"
     << "prune_radius_fraction = " << fmt(c.prune_radius_fraction) << "\n"
     << "max_gaussians = " << c.max_gaussians << "\n"
     << "opacity_reset_interval = " << c.opacity_reset_interval << "\n"
     << "opacity_reset_until = " << c.opacity_reset_until << "\n"
     << "opacity_reset_value = " << fmt(c.opacity_reset_value) << "\n"
     << "n_max_events = " << c.n_max_events << "\n"
     << "adaptive_windows = " << (c.adaptive_windows ? "true" : "false") << "\n"
     << "fixed_t_max_us = " << c.fixed_t_max_us << "\n"
     << "lambda_long = " << fmt(c.weights.lambda_long) << "\n"
     << "lambda_short = " << fmt(c.weights.lambda_short) << "\n"
     << "iso_before = " << fmt(c.weights.iso_before) << "\n"
     << "iso_after = " << fmt(c.weights.iso_after) << "\n"
     << "iso_switch_iteration = " << c.weights.iso_switch_iteration << "\n"
     << "lambda_pose = " << fmt(c.weights.lambda_pose) << "\n"
     << "alpha_no_event = " << fmt(c.alpha_no_event) << "\n"
     << "refine_poses = " << (c.refine_poses ? "true" : "false") << "\n"
     << "freeze_poses = " << (c.freeze_poses ? "true" : "false") << "\n"
     << "freeze_gaussians = " << (c.freeze_gaussians ? "true" : "false") << "\n"
     << "lr_pose = " << fmt(c.lr_pose) << "\n"
     << "sh_degree_cap_refined = " << c.sh_degree_cap_refined << "\n"
     << "sh_degree_cap_static = " << c.sh_degree_cap_static << "\n"
     << "sh_unlock_interval = " << c.sh_unlock_interval << "\n"
     << "lr_means_start = " << fmt(c.lr_means_start) << "\n"
     << "lr_means_end = " << fmt(c.lr_means_end) << "\n"
     << "lr_means_decay_iterations = " << c.lr_means_decay_iterations << "\n"
     << "lr_sh = " << fmt(c.lr_sh) << "\n"
     << "lr_sh_rest_divisor = " << fmt(c.lr_sh_rest_divisor) << "\n"
     << "lr_opacity = " << fmt(c.lr_opacity) << "\n"
     << "lr_scales = " << fmt(c.lr_scales) << "\n"
     << "lr_rotations = " << fmt(c.lr_rotations) << "\n"
     << "init_gaussians = " << c.init_gaussians << "\n"
     << "init_opacity = " << fmt(c.init_opacity) << "\n"
     << "seed = " << c.seed << "\n"
     << "threads = " << c.threads << "\n"
     << "background_display = " << fmt(linear_to_display(c.background[0])) << "\n";
  if (!os) throw IoError("write failed for " + path);
}

std::string view_name(std::size_t k, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "view_%03zu.%s", k, ext);
  return buf;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  ConfigArgs config;
  std::string out_dir;
};

int run_simulate(const SimulateArgs& args) {
  const Config config = load_config(args.config);
  const CameraModel camera = camera_from_config(config);

  ToySceneOptions scene_opts;
  scene_opts.n_gaussians =
      static_cast<std::size_t>(config.get_u64("simulate.scene_gaussians", scene_opts.n_gaussians));
  scene_opts.radius = config.get_double("simulate.scene_radius", scene_opts.radius);
  scene_opts.sh_degree =
      static_cast<int>(config.get_int("simulate.scene_sh_degree", scene_opts.sh_degree));
  scene_opts.seed = config.get_u64("simulate.scene_seed", scene_opts.seed);

  OrbitOptions orbit;
  orbit.radius = config.get_double("simulate.orbit_radius", orbit.radius);
  orbit.height = config.get_double("simulate.orbit_height", orbit.height);
  orbit.duration_us = config.get_u64("simulate.duration_us", orbit.duration_us);
  orbit.pose_rate_hz = config.get_double("simulate.pose_rate_hz", orbit.pose_rate_hz);
  orbit.revolutions = config.get_double("simulate.revolutions", orbit.revolutions);
  orbit.speed_ratio = config.get_double("simulate.speed_ratio", orbit.speed_ratio);
  orbit.speed_cycles = static_cast<int>(config.get_int("simulate.speed_cycles", orbit.speed_cycles));

  const double fps = config.get_double("simulate.fps", 1000.0);
  const double delta = config.get_double("simulate.delta", 0.1);
  const std::size_t n_heldout =
      static_cast<std::size_t>(config.get_u64("simulate.heldout", 8));
  const double bg_display =
      config.get_double("simulate.background_display", 159.0 / 255.0);
  const int threads = static_cast<int>(config.get_int("simulate.threads", 0));
  reject_unknown_keys(config, {"camera", "simulate"});
  if (!(fps > 0.0)) throw ContractViolation("simulate: fps must be positive");
  if (!(delta > 0.0)) throw ContractViolation("simulate: delta must be positive");

  fs::create_directories(args.out_dir);
  fs::create_directories(args.out_dir + "/heldout");

  const GaussianCloud scene = toy_scene(scene_opts);
  const PoseTrack track = orbit_track(orbit);

  RenderSettings settings;
  settings.background = Vec3::Constant(display_to_linear(bg_display));
  settings.threads = threads;

  EventSimulator simulator(camera.width, camera.height, delta);
  const double step_us = 1e6 / fps;
  std::uint64_t t = 0;
  std::size_t n_frames = 0;
  for (std::size_t k = 0;; ++k) {
    const RenderOutput out = render(scene, orbit_pose(orbit, t), camera, settings);
    simulator.feed(t, BayerMask::mosaic(out.linear).log(kLogFloor));
    ++n_frames;
    const std::uint64_t next = static_cast<std::uint64_t>(std::llround(step_us * (k + 1)));
    if (next > orbit.duration_us) break;
    if (next <= t) throw ContractViolation("simulate: fps too high for integer timestamps");
    t = next;
  }
  EventStore store(simulator.take_events(), camera.width, camera.height, delta);
  write_events(args.out_dir + "/events.bin", store);
  write_pose_track(args.out_dir + "/poses.txt", track);
  save_checkpoint(args.out_dir + "/gt_model.ckpt", Checkpoint{scene, 0});

  PoseTrack heldout;
  for (std::size_t k = 0; k < n_heldout; ++k) {
    const std::uint64_t tk = static_cast<std::uint64_t>(
        (static_cast<double>(k) + 0.5) / n_heldout * orbit.duration_us);
    const SE3Pose pose = orbit_pose(orbit, tk);
    const RenderOutput out = render(scene, pose, camera, settings);
    write_png(args.out_dir + "/heldout/" + view_name(k, "png"), out.linear);
    write_raw(args.out_dir + "/heldout/" + view_name(k, "raw"), out.linear);
    heldout.timestamps_us.push_back(tk);
    heldout.poses.push_back(pose);
  }
  if (!heldout.empty()) write_pose_track(args.out_dir + "/heldout/poses.txt", heldout);

  std::printf("simulated %zu frames over %.3f s: %zu events (%.0f ev/s), %zu poses, %zu held-out views\n",
              n_frames, orbit.duration_us * 1e-6, store.size(),
              store.size() / (orbit.duration_us * 1e-6), track.size(), n_heldout);
  return 0;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  ConfigArgs config;
  std::string events_path;
  std::string poses_path;
  std::string out_dir;
  bool resume = false;
};

int run_train(const TrainArgs& args) {
  const Config config = load_config(args.config);
  const CameraModel camera = camera_from_config(config);
  const TrainConfig tc = train_config_from_config(config);
  const std::int64_t checkpoint_interval = config.get_int("train.checkpoint_interval", 5000);
  const std::int64_t metrics_interval = config.get_int("train.metrics_interval", 100);
  const bool keep_checkpoints = config.get_bool("train.keep_checkpoints", false);
  reject_unknown_keys(config, {"camera", "train"});
  if (metrics_interval <= 0) throw ContractViolation("train: metrics_interval must be positive");

  const EventStore store = read_events(args.events_path);
  const PoseTrack track = read_pose_track(args.poses_path);
  fs::create_directories(args.out_dir);

  Trainer trainer = Trainer::initialize(track, &store, camera, tc);
  const std::string latest_model = args.out_dir + "/model_latest.ckpt";
  const std::string latest_state = args.out_dir + "/state_latest.bin";
  bool resumed = false;
  if (args.resume && fs::exists(latest_model) && fs::exists(latest_state)) {
    trainer.restore(load_checkpoint(latest_model));
    trainer.load_train_state(latest_state);
    resumed = true;
  } else if (args.resume) {
    throw ContractViolation("--resume: no checkpoint pair under " + args.out_dir);
  }

  write_effective_config(args.out_dir + "/config_used.ini", camera, tc);

  std::ofstream metrics_csv(args.out_dir + "/metrics.csv",
                            resumed ? std::ios::app : std::ios::trunc);
  if (!metrics_csv) throw IoError("cannot open metrics.csv under " + args.out_dir);
  if (!resumed)
    metrics_csv << "iteration,loss,recon_long,recon_short,iso,pose,lambda_iso,n_gaussians,"
                   "window_long,window_short,pose_dev_mean,rollbacks\n";

  const auto save_all = [&](const std::string& tag) {
    save_checkpoint(args.out_dir + "/model_" + tag + ".ckpt", trainer.checkpoint());
    trainer.save_train_state(args.out_dir + "/state_" + tag + ".bin");
  };

  std::printf("training %zu gaussians, %zu poses, %zu events, %" PRId64 " iterations%s\n",
              trainer.cloud().size(), track.size(), store.size(), tc.total_iterations,
              resumed ? " (resumed)" : "");
  const std::int64_t remaining = tc.total_iterations - trainer.iteration();
  if (remaining < 0) throw ContractViolation("train: checkpoint is past total_iterations");

  trainer.run(remaining, [&](const StepMetrics& m) {
    if (m.iteration % metrics_interval == 0 || m.iteration == 1 ||
        m.iteration == tc.total_iterations) {
      metrics_csv << m.iteration << ',' << fmt(m.loss) << ',' << fmt(m.recon_long) << ','
                  << fmt(m.recon_short) << ',' << fmt(m.iso) << ',' << fmt(m.pose_term) << ','
                  << fmt(m.lambda_iso_value) << ',' << m.n_gaussians << ','
                  << m.window_long_events << ',' << m.window_short_events << ','
                  << fmt(m.pose_deviation_mean) << ',' << m.degenerate_pose_rollbacks << '\n';
      metrics_csv.flush();
      std::printf("iter %8" PRId64 "  loss %.6f  recon %.6f/%.6f  iso %.5f  pose %.5f  n %zu\n",
                  m.iteration, m.loss, m.recon_long, m.recon_short, m.iso, m.pose_term,
                  m.n_gaussians);
      std::fflush(stdout);
    }
    if (checkpoint_interval > 0 && m.iteration % checkpoint_interval == 0) {
      save_all("latest");
      if (keep_checkpoints) save_all(std::to_string(m.iteration));
    }
  });

  save_all("latest");
  save_all("final");
  PoseTrack refined;
  refined.timestamps_us = track.timestamps_us;
  for (std::size_t i = 0; i < track.size(); ++i)
    refined.poses.push_back(trainer.refined_pose_at(i));
  write_pose_track(args.out_dir + "/refined_poses.txt", refined);
  std::printf("done: %zu gaussians after %" PRId64 " iterations\n", trainer.cloud().size(),
              trainer.iteration());
  return 0;
}

// ------------------------------------------------------------------ render

struct RenderArgs {
  ConfigArgs config;
  std::string model_path;
  std::string poses_path;
  std::string out_png;
  std::string out_raw;
  std::uint64_t time_us = 0;
  bool has_time = false;
  std::int64_t index = -1;
  int sh_degree = -1;
  int threads = 0;
  double background_display = 159.0 / 255.0;
};

int run_render(const RenderArgs& args) {
  const Config config = load_config(args.config);
  const CameraModel camera = camera_from_config(config);
  reject_unknown_keys(config, {"camera"});

  const Checkpoint ckpt = load_checkpoint(args.model_path);
  const PoseTrack track = read_pose_track(args.poses_path);
  SE3Pose pose;
  if (args.has_time == (args.index >= 0))
    throw ContractViolation("render: pass exactly one of --time or --index");
  if (args.has_time) {
    pose = interpolate_pose(track, args.time_us);
  } else {
    if (static_cast<std::size_t>(args.index) >= track.size())
      throw ContractViolation("render: --index out of range");
    pose = track.poses[static_cast<std::size_t>(args.index)];
  }

  RenderSettings settings;
  settings.background = Vec3::Constant(display_to_linear(args.background_display));
  settings.threads = args.threads;
  settings.sh_degree = args.sh_degree;
  const RenderOutput out = render(ckpt.cloud, pose, camera, settings);
  if (!args.out_png.empty()) write_png(args.out_png, out.linear);
  if (!args.out_raw.empty()) write_raw(args.out_raw, out.linear);
  std::printf("rendered %zu gaussians (%zu visible) at iteration %" PRId64 "\n",
              ckpt.cloud.size(), out.visible.size(), ckpt.iteration);
  return 0;
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
  ConfigArgs config;
  std::string model_path;
  std::string gt_dir;
  std::string report_path;
  bool align_poses = false;
};

Image load_gt_view(const std::string& dir, std::size_t k) {
  const std::string raw = dir + "/" + view_name(k, "raw");
  if (fs::exists(raw)) return read_raw(raw);
  const std::string png = dir + "/" + view_name(k, "png");
  if (fs::exists(png)) return read_png(png);
  throw IoError("eval: missing ground-truth view " + raw + " (or .png)");
}

int run_eval(const EvalArgs& args) {
  const Config config = load_config(args.config);
  const CameraModel camera = camera_from_config(config);
  const int align_iterations = static_cast<int>(config.get_int("eval.align_iterations", 200));
  const double align_lr = config.get_double("eval.align_lr", 5e-3);
  const double bg_display = config.get_double("eval.background_display", 159.0 / 255.0);
  const int threads = static_cast<int>(config.get_int("eval.threads", 0));
  reject_unknown_keys(config, {"camera", "eval"});

  const Checkpoint ckpt = load_checkpoint(args.model_path);
  const PoseTrack track = read_pose_track(args.gt_dir + "/poses.txt");

  RenderSettings settings;
  settings.background = Vec3::Constant(display_to_linear(bg_display));
  settings.threads = threads;

  std::ostringstream report;
  report << "view            psnr      ssim\n";
  double psnr_sum = 0.0;
  double ssim_sum = 0.0;
  for (std::size_t k = 0; k < track.size(); ++k) {
    const Image gt_linear = load_gt_view(args.gt_dir, k);
    if (gt_linear.width != camera.width || gt_linear.height != camera.height ||
        gt_linear.channels != 3)
      throw ContractViolation("eval: ground-truth view " + std::to_string(k) +
                              " does not match the camera geometry");
    const Image gt_log = gt_linear.log(kLogFloor);
    SE3Pose pose = track.poses[k];
    if (args.align_poses) {
      ViewAlignOptions align;
      align.iterations = align_iterations;
      align.lr = align_lr;
      pose = align_view_pose(ckpt.cloud, camera, pose, gt_log, settings, align);
    }
    const RenderOutput out = render(ckpt.cloud, pose, camera, settings);
    // exposure alignment in log space == per-channel gain in linear space
    Image pred = out.linear;
    for (int c = 0; c < 3; ++c) {
      double mean_pred = 0.0;
      double mean_gt = 0.0;
      for (int py = 0; py < camera.height; ++py)
        for (int px = 0; px < camera.width; ++px) {
          mean_pred += out.log.at(px, py, c);
          mean_gt += gt_log.at(px, py, c);
        }
      const double gain =
          std::exp((mean_gt - mean_pred) / (static_cast<double>(camera.width) * camera.height));
      for (int py = 0; py < camera.height; ++py)
        for (int px = 0; px < camera.width; ++px) pred.at(px, py, c) *= gain;
    }
    const Image pred_display = linear_to_display(pred);
    const Image gt_display = linear_to_display(gt_linear);
    const double view_psnr = psnr(pred_display, gt_display);
    const double view_ssim = ssim(pred_display, gt_display);
    psnr_sum += view_psnr;
    ssim_sum += view_ssim;
    char line[128];
    std::snprintf(line, sizeof(line), "view_%03zu  %8.3f  %8.4f\n", k, view_psnr, view_ssim);
    report << line;
  }
  char line[128];
  std::snprintf(line, sizeof(line), "mean      %8.3f  %8.4f  (%zu views%s)\n",
                psnr_sum / track.size(), ssim_sum / track.size(), track.size(),
                args.align_poses ? ", pose-aligned" : "");
  report << line;

  std::fputs(report.str().c_str(), stdout);
  if (!args.report_path.empty()) {
    std::ofstream os(args.report_path);
    if (!os) throw IoError("cannot open " + args.report_path + " for writing");
    os << report.str();
  }
  return 0;
}

// --------------------------------------------------------------- perturb

struct PerturbArgs {
  std::string poses_path;
  std::string out_path;
  double sigma_rot = 0.05;
  double sigma_trans = 0.02;
  double theta = 1.0;
  std::uint64_t seed = 0;
};

int run_perturb(const PerturbArgs& args) {
  const PoseTrack track = read_pose_track(args.poses_path);
  std::mt19937_64 rng(args.seed);
  const PoseTrack noisy =
      perturb_poses(track, args.sigma_rot, args.sigma_trans, args.theta, rng);
  write_pose_track(args.out_path, noisy);
  double rot_err = 0.0;
  double trans_err = 0.0;
  for (std::size_t i = 0; i < track.size(); ++i) {
    rot_err += rotation_angle(noisy.poses[i].rotation * track.poses[i].rotation.transpose());
    trans_err += (noisy.poses[i].translation - track.poses[i].translation).norm();
  }
  std::printf("perturbed %zu poses: mean rotation error %.5f rad, mean translation error %.5f\n",
              track.size(), rot_err / track.size(), trans_err / track.size());
  return 0;
}

// -------------------------------------------------------------- gradcheck

int run_gradcheck(const GradCheckOptions& options) {
  const GradCheckReport report = run_gradient_check(options);
  std::printf("checked %zu derivatives over %d scenes: max rel error %.3e at %s\n",
              report.n_checked, options.n_scenes, report.max_rel_error,
              report.worst_parameter.c_str());
  for (const GradCheckFailure& f : report.failures)
    std::printf("FAIL %s: analytic %.9g vs numeric %.9g (rel %.3e)\n", f.parameter.c_str(),
                f.analytic, f.numeric, f.rel_error);
  if (!report.passed()) {
    std::printf("%zu derivative(s) above tolerance %.1e\n", report.failures.size(),
                options.tolerance);
    return 3;
  }
  std::printf("all derivatives within tolerance %.1e\n", options.tolerance);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"event-camera gaussian splatting toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate",
                                         "synthesize an event stream, poses and held-out views");
  sim_cmd->add_option("--out", sim.out_dir, "output directory")->required();
  add_config_options(sim_cmd, &sim.config);

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "optimize a model from events and poses");
  train_cmd->add_option("--events", train.events_path, "event stream file")->required();
  train_cmd->add_option("--poses", train.poses_path, "pose track file")->required();
  train_cmd->add_option("--out", train.out_dir, "output directory")->required();
  train_cmd->add_flag("--resume", train.resume, "continue from the latest checkpoint pair");
  add_config_options(train_cmd, &train.config);

  RenderArgs render_args;
  CLI::App* render_cmd = app.add_subcommand("render", "render a model checkpoint");
  render_cmd->add_option("--model", render_args.model_path, "model checkpoint")->required();
  render_cmd->add_option("--poses", render_args.poses_path, "pose track file")->required();
  CLI::Option* time_opt =
      render_cmd->add_option("--time", render_args.time_us, "interpolate the pose at this time (us)");
  render_cmd->add_option("--index", render_args.index, "use the pose at this track index");
  render_cmd->add_option("--out", render_args.out_png, "output PNG path");
  render_cmd->add_option("--raw", render_args.out_raw, "also write a lossless raw dump here");
  render_cmd->add_option("--sh-degree", render_args.sh_degree, "evaluation degree cap, -1 = full");
  render_cmd->add_option("--threads", render_args.threads, "render threads, 0 = all cores");
  render_cmd->add_option("--background-display", render_args.background_display,
                         "background level in display units");
  add_config_options(render_cmd, &render_args.config);

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "score a model against held-out views");
  eval_cmd->add_option("--model", eval_args.model_path, "model checkpoint")->required();
  eval_cmd->add_option("--gt", eval_args.gt_dir, "directory with poses.txt and view_*.raw/png")
      ->required();
  eval_cmd->add_option("--report", eval_args.report_path, "also write the table to this file");
  eval_cmd->add_flag("--align-poses", eval_args.align_poses,
                     "refine each view pose against the ground truth before scoring");
  add_config_options(eval_cmd, &eval_args.config);

  PerturbArgs perturb;
  CLI::App* perturb_cmd =
      app.add_subcommand("perturb-poses", "add time-correlated noise to a pose track");
  perturb_cmd->add_option("--poses", perturb.poses_path, "input pose track")->required();
  perturb_cmd->add_option("--out", perturb.out_path, "output pose track")->required();
  perturb_cmd->add_option("--sigma-rot", perturb.sigma_rot, "rotation diffusion (rad)");
  perturb_cmd->add_option("--sigma-trans", perturb.sigma_trans, "translation diffusion");
  perturb_cmd->add_option("--theta", perturb.theta, "mean reversion rate (1/s)");
  perturb_cmd->add_option("--seed", perturb.seed, "noise seed");

  GradCheckOptions gopts;
  CLI::App* grad_cmd =
      app.add_subcommand("gradcheck", "finite-difference audit of the renderer gradients");
  grad_cmd->add_option("--scenes", gopts.n_scenes, "number of random scenes");
  grad_cmd->add_option("--seed", gopts.seed, "scene seed");
  grad_cmd->add_option("--step", gopts.step, "difference half-step");
  grad_cmd->add_option("--tolerance", gopts.tolerance, "max relative error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim_cmd->parsed()) return run_simulate(sim);
    if (train_cmd->parsed()) return run_train(train);
    if (render_cmd->parsed()) {
      render_args.has_time = time_opt->count() > 0;
      return run_render(render_args);
    }
    if (eval_cmd->parsed()) return run_eval(eval_args);
    if (perturb_cmd->parsed()) return run_perturb(perturb);
    if (grad_cmd->parsed()) return run_gradcheck(gopts);
  } catch (const ContractViolation& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
  return 2;
}
