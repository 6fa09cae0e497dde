#include "evsplat/gradcheck.hpp"

#include "evsplat/gaussian_cloud.hpp"
#include "evsplat/sh.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace evsplat {

double gradcheck_rel_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({floor, std::abs(analytic), std::abs(numeric)});
}

namespace {

struct Scene {
  GaussianCloud cloud;
  SE3Pose pose;
  CameraModel camera;
  RenderSettings settings;
  Image d_log;
};

// Pixels where some splat sits close to the footprint cutoff, the alpha
// clamps, or where a channel is near the log floor get zero objective
// weight: a probe step could move those terms across the threshold and the
// difference quotient would measure the jump, not the derivative.
Image smooth_pixel_mask(const Scene& scene) {
  const double q_margin = 0.35;
  const double alpha_lo = kMinAlpha * 0.5;
  const double alpha_hi = kMinAlpha * 1.7;
  const double sat_margin = 8e-3;
  Image mask = Image::constant(scene.camera.width, scene.camera.height, 1, 1.0);
  const std::size_t n = scene.cloud.size();

  std::vector<Vec2> mean2d(n);
  std::vector<Mat2> conic(n);
  std::vector<double> opacity(n);
  std::vector<std::uint8_t> active(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Mat3 cov =
        covariance_from_params(scene.cloud.log_scales[i], scene.cloud.rotations[i]);
    const auto proj = project_gaussian(cov, scene.pose, scene.camera, scene.cloud.means[i]);
    if (!proj) continue;
    active[i] = 1;
    mean2d[i] = proj->mean2d;
    conic[i] = proj->cov2d.inverse();
    opacity[i] = sigmoid(scene.cloud.opacity_logits[i]);
  }

  const double support_q = kSupportSigma * kSupportSigma;
  for (int py = 0; py < scene.camera.height; ++py)
    for (int px = 0; px < scene.camera.width; ++px) {
      // The log floor needs no check here: every splat color and the
      // background are far above kLogFloor by construction, and compositing
      // is a convex combination of them.
      bool ok = true;
      for (std::size_t i = 0; i < n && ok; ++i) {
        if (!active[i]) continue;
        const Vec2 d(px + 0.5 - mean2d[i][0], py + 0.5 - mean2d[i][1]);
        const double q = d.dot(conic[i] * d);
        if (std::abs(q - support_q) < q_margin) ok = false;
        if (q > support_q) continue;
        const double raw = opacity[i] * std::exp(-0.5 * q);
        if (raw > alpha_lo && raw < alpha_hi) ok = false;
        if (std::abs(raw - kMaxAlpha) < sat_margin) ok = false;
      }
      if (!ok) mask.at(px, py, 0) = 0.0;
    }
  return mask;
}

Scene make_scene(const GradCheckOptions& options, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  Scene scene;
  const int w = options.width;
  const int h = options.height;
  scene.camera = CameraModel::make(w, h, 0.9 * w, 0.9 * w, 0.5 * w, 0.5 * h, 0.1, 50.0);

  scene.cloud = GaussianCloud::sized(options.n_gaussians, options.sh_degree);
  const int basis = scene.cloud.basis_count();
  const double half_w = 0.5 / 0.9;            // camera-space half extent per unit depth
  const double half_h = 0.5 * h / (0.9 * w);
  for (std::size_t i = 0; i < options.n_gaussians; ++i) {
    const double z = uni(2.5, 4.0);
    scene.cloud.means[i] =
        Vec3(uni(-0.8, 0.8) * half_w * z, uni(-0.8, 0.8) * half_h * z, z);
    for (int j = 0; j < 3; ++j) scene.cloud.log_scales[i][j] = std::log(uni(0.1, 0.35));
    Vec4 q(normal(rng), normal(rng), normal(rng), normal(rng));
    if (q.norm() < 1e-9) q = Vec4(1, 0, 0, 0);
    scene.cloud.rotations[i] = q / q.norm();
    scene.cloud.opacity_logits[i] = logit(uni(0.45, 0.9));
    double* sh = scene.cloud.sh_block(i);
    for (int c = 0; c < 3; ++c) sh[c] = uni(-0.25, 0.25) / kShC0;
    for (int b = 1; b < basis; ++b)
      for (int c = 0; c < 3; ++c) sh[b * 3 + c] = uni(-0.01, 0.01);
  }

  // small pose offset so rotation and translation gradients are exercised
  // away from the identity
  const Vec3 wvec(uni(-0.05, 0.05), uni(-0.05, 0.05), uni(-0.05, 0.05));
  scene.pose.rotation = so3_exp(wvec);
  scene.pose.translation = Vec3(uni(-0.1, 0.1), uni(-0.1, 0.1), uni(-0.1, 0.1));

  scene.settings.background = Vec3(0.2, 0.25, 0.3);
  scene.settings.threads = 1;
  scene.settings.sh_degree = -1;

  scene.d_log = Image::zeros(w, h, 3);
  for (double& v : scene.d_log.data) v = uni(-1.0, 1.0);
  const Image mask = smooth_pixel_mask(scene);
  for (int py = 0; py < h; ++py)
    for (int px = 0; px < w; ++px)
      if (mask.at(px, py, 0) == 0.0)
        for (int c = 0; c < 3; ++c) scene.d_log.at(px, py, c) = 0.0;
  return scene;
}

double objective(const Scene& scene) {
  const RenderOutput out =
      render(scene.cloud, scene.pose, scene.camera, scene.settings);
  double sum = 0.0;
  for (std::size_t k = 0; k < out.log.data.size(); ++k) sum += scene.d_log.data[k] * out.log.data[k];
  return sum;
}

struct Recorder {
  const GradCheckOptions& options;
  GradCheckReport& report;
  int scene_index;

  void record(const std::string& name, double analytic, double numeric) {
    const double rel = gradcheck_rel_error(analytic, numeric);
    ++report.n_checked;
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_parameter = name;
    }
    if (rel > options.tolerance)
      report.failures.push_back({name, analytic, numeric, rel});
  }

  std::string tag(const std::string& block, std::size_t i, int j) const {
    std::ostringstream oss;
    oss << "scene " << scene_index << ": " << block << "[" << i << "][" << j << "]";
    return oss.str();
  }
};

void check_scene(const GradCheckOptions& options, int scene_index, GradCheckReport& report) {
  Scene scene = make_scene(options, options.seed + 1000003ull * scene_index);
  const GradientBundle analytic =
      render_backward(scene.cloud, scene.pose, scene.camera, scene.d_log, scene.settings);
  Recorder rec{options, report, scene_index};
  const double h = options.step;
  auto fd = [&](double* param) {
    const double saved = *param;
    *param = saved + h;
    const double hi = objective(scene);
    *param = saved - h;
    const double lo = objective(scene);
    *param = saved;
    return (hi - lo) / (2.0 * h);
  };

  const std::size_t n = scene.cloud.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j)
      rec.record(rec.tag("means", i, j), analytic.d_means[i][j], fd(&scene.cloud.means[i][j]));
    for (int j = 0; j < 3; ++j)
      rec.record(rec.tag("log_scales", i, j), analytic.d_log_scales[i][j],
                 fd(&scene.cloud.log_scales[i][j]));
    for (int j = 0; j < 4; ++j)
      rec.record(rec.tag("rotations", i, j), analytic.d_rotations[i][j],
                 fd(&scene.cloud.rotations[i][j]));
    rec.record(rec.tag("opacity_logits", i, 0), analytic.d_opacity_logits[i],
               fd(&scene.cloud.opacity_logits[i]));
    const int stride = scene.cloud.sh_stride();
    for (int j = 0; j < stride; ++j)
      rec.record(rec.tag("sh", i, j), analytic.d_sh[i * stride + j],
                 fd(&scene.cloud.sh[i * stride + j]));
  }

  // pose tangent: rotation rows are the left perturbation R <- exp(hat(w)) R
  const SE3Pose base = scene.pose;
  for (int j = 0; j < 3; ++j) {
    Vec3 wvec = Vec3::Zero();
    wvec[j] = h;
    scene.pose.rotation = so3_exp(wvec) * base.rotation;
    const double hi = objective(scene);
    wvec[j] = -h;
    scene.pose.rotation = so3_exp(wvec) * base.rotation;
    const double lo = objective(scene);
    scene.pose = base;
    rec.record(rec.tag("pose_rotation", 0, j), analytic.d_pose[j], (hi - lo) / (2.0 * h));
  }
  for (int j = 0; j < 3; ++j)
    rec.record(rec.tag("pose_translation", 0, j), analytic.d_pose[3 + j],
               fd(&scene.pose.translation[j]));
}

}  // namespace

GradCheckReport run_gradient_check(const GradCheckOptions& options) {
  if (options.n_scenes <= 0) throw ContractViolation("gradient check: n_scenes must be positive");
  if (!(options.step > 0.0)) throw ContractViolation("gradient check: step must be positive");
  GradCheckReport report;
  for (int s = 0; s < options.n_scenes; ++s) check_scene(options, s, report);
  return report;
}

}  // namespace evsplat
