#include "evsplat/rasterizer.hpp"

#include "evsplat/thread_pool.hpp"
#include "raster_internal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace evsplat {

namespace detail {

int resolve_threads(int threads) { return threads <= 0 ? hardware_threads() : threads; }

Preprocessed preprocess(const GaussianCloud& cloud, const SE3Pose& pose,
                        const CameraModel& camera, const RenderSettings& settings) {
  camera.validate();
  const std::size_t n = cloud.size();
  Preprocessed pre;
  pre.used_degree = settings.sh_degree < 0 ? cloud.sh_degree
                                           : std::min(settings.sh_degree, cloud.sh_degree);
  pre.active.assign(n, 0);
  pre.t_cam.assign(n, Vec3::Zero());
  pre.mean2d.assign(n, Vec2::Zero());
  pre.depth.assign(n, 0.0);
  pre.cov2d.assign(n, Mat2::Zero());
  pre.conic.assign(n, Mat2::Zero());
  pre.opacity.assign(n, 0.0);
  pre.color.assign(n, Vec3::Zero());
  pre.clamped.assign(n, 0);
  pre.view_dir.assign(n, Vec3::Zero());
  pre.dir_len.assign(n, 0.0);
  pre.radius.assign(n, 0.0);

  const Vec3 cam_center = pose.camera_center();
  const int used_basis = sh_basis_count(pre.used_degree);

  parallel_chunks(n, 4096, settings.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    double basis[kMaxShBasis];
    for (std::size_t i = begin; i < end; ++i) {
      const bool finite = cloud.means[i].allFinite() && cloud.log_scales[i].allFinite() &&
                          cloud.rotations[i].allFinite() &&
                          std::isfinite(cloud.opacity_logits[i]);
      if (!finite) {
        std::ostringstream err;
        err << "gaussian " << i << ": non-finite parameters in render";
        throw NumericError(err.str());
      }

      const Vec3 t = pose.apply(cloud.means[i]);
      if (!(t.z() > camera.z_near) || t.z() > camera.z_far) continue;
      pre.t_cam[i] = t;
      pre.depth[i] = t.z();

      const double inv_z = 1.0 / t.z();
      pre.mean2d[i] = Vec2(camera.fx() * t.x() * inv_z + camera.cx(),
                           camera.fy() * t.y() * inv_z + camera.cy());

      const Mat3 cov_world = covariance_from_params(cloud.log_scales[i], cloud.rotations[i]);
      const Mat23 m = projection_jacobian(camera, t) * pose.rotation;
      Mat2 cov = m * cov_world * m.transpose();
      cov(0, 0) += kCov2dFloor;
      cov(1, 1) += kCov2dFloor;
      pre.cov2d[i] = cov;

      const double det = cov(0, 0) * cov(1, 1) - cov(0, 1) * cov(1, 0);
      Mat2 conic;
      conic << cov(1, 1), -cov(0, 1), -cov(0, 1), cov(0, 0);
      conic /= det;
      pre.conic[i] = conic;

      const double mid = 0.5 * (cov(0, 0) + cov(1, 1));
      const double lmax = mid + std::sqrt(std::max(0.0, mid * mid - det));
      pre.radius[i] = kSupportSigma * std::sqrt(lmax);

      pre.opacity[i] = sigmoid(cloud.opacity_logits[i]);

      const Vec3 raw_dir = cloud.means[i] - cam_center;
      const double len = raw_dir.norm();
      const Vec3 dir = len > 1e-12 ? Vec3(raw_dir / len) : Vec3(0, 0, 1);
      pre.view_dir[i] = dir;
      pre.dir_len[i] = len > 1e-12 ? len : 0.0;

      sh_basis(pre.used_degree, dir, basis);
      const double* block = cloud.sh_block(i);
      Vec3 rgb = Vec3::Constant(0.5);
      for (int b = 0; b < used_basis; ++b) {
        const double w = basis[b];
        rgb[0] += w * block[b * 3 + 0];
        rgb[1] += w * block[b * 3 + 1];
        rgb[2] += w * block[b * 3 + 2];
      }
      std::uint8_t clamp_bits = 0;
      for (int c = 0; c < 3; ++c)
        if (rgb[c] < 0.0) {
          rgb[c] = 0.0;
          clamp_bits |= static_cast<std::uint8_t>(1u << c);
        }
      pre.color[i] = rgb;
      pre.clamped[i] = clamp_bits;
      pre.active[i] = 1;
    }
  });

  pre.order.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i)
    if (pre.active[i]) pre.order.push_back(i);
  std::sort(pre.order.begin(), pre.order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (pre.depth[a] != pre.depth[b]) return pre.depth[a] < pre.depth[b];
    return a < b;
  });
  return pre;
}

namespace {

// min over s in [0,1] of the quadratic (d0 + s e)^T A (d0 + s e)
double min_q_on_segment(const Vec2& d0, const Vec2& e, const Mat2& a) {
  const double qa = e.dot(a * e);
  const double qb = 2.0 * d0.dot(a * e);
  const double qc = d0.dot(a * d0);
  if (qa <= 0.0) return qc;  // degenerate edge
  const double s = std::clamp(-qb / (2.0 * qa), 0.0, 1.0);
  return (qa * s + qb) * s + qc;
}

}  // namespace

double min_mahalanobis_sq_on_rect(const Vec2& mean, const Mat2& conic, double x0, double y0,
                                  double x1, double y1) {
  if (mean.x() >= x0 && mean.x() <= x1 && mean.y() >= y0 && mean.y() <= y1) return 0.0;
  const Vec2 c00(x0 - mean.x(), y0 - mean.y());
  const Vec2 c10(x1 - mean.x(), y0 - mean.y());
  const Vec2 c01(x0 - mean.x(), y1 - mean.y());
  const Vec2 c11(x1 - mean.x(), y1 - mean.y());
  const Vec2 ex(x1 - x0, 0.0);
  const Vec2 ey(0.0, y1 - y0);
  double m = min_q_on_segment(c00, ex, conic);
  m = std::min(m, min_q_on_segment(c01, ex, conic));
  m = std::min(m, min_q_on_segment(c00, ey, conic));
  m = std::min(m, min_q_on_segment(c10, ey, conic));
  return m;
}

Bins bin_tiles(const Preprocessed& pre, const CameraModel& camera) {
  Bins bins;
  bins.tiles_x = (camera.width + kTileSize - 1) / kTileSize;
  bins.tiles_y = (camera.height + kTileSize - 1) / kTileSize;
  bins.tiles.assign(static_cast<std::size_t>(bins.tiles_x) * bins.tiles_y, {});

  for (const std::uint32_t id : pre.order) {
    const Vec2& mu = pre.mean2d[id];
    const double r = pre.radius[id];
    // candidate tile range from the bounding box, then the exact ellipse test
    const int tx0 = std::max(0, static_cast<int>(std::floor((mu.x() - r) / kTileSize)));
    const int tx1 = std::min(bins.tiles_x - 1, static_cast<int>(std::floor((mu.x() + r) / kTileSize)));
    const int ty0 = std::max(0, static_cast<int>(std::floor((mu.y() - r) / kTileSize)));
    const int ty1 = std::min(bins.tiles_y - 1, static_cast<int>(std::floor((mu.y() + r) / kTileSize)));
    for (int ty = ty0; ty <= ty1; ++ty)
      for (int tx = tx0; tx <= tx1; ++tx) {
        const double x0 = tx * kTileSize;
        const double y0 = ty * kTileSize;
        const double x1 = std::min<double>(camera.width, x0 + kTileSize);
        const double y1 = std::min<double>(camera.height, y0 + kTileSize);
        if (min_mahalanobis_sq_on_rect(mu, pre.conic[id], x0, y0, x1, y1) <= kSupportQ)
          bins.tiles[static_cast<std::size_t>(ty) * bins.tiles_x + tx].push_back(id);
      }
  }
  return bins;
}

}  // namespace detail

TileBins cull_and_bin(const GaussianCloud& cloud, const SE3Pose& pose, const CameraModel& camera) {
  RenderSettings settings;
  settings.threads = 1;
  const detail::Preprocessed pre = detail::preprocess(cloud, pose, camera, settings);
  detail::Bins bins = detail::bin_tiles(pre, camera);
  TileBins out;
  out.tiles_x = bins.tiles_x;
  out.tiles_y = bins.tiles_y;
  out.tiles = std::move(bins.tiles);
  out.radius_px = pre.radius;
  out.in_frustum = pre.active;
  return out;
}

RenderOutput render(const GaussianCloud& cloud, const SE3Pose& pose, const CameraModel& camera,
                    const RenderSettings& settings) {
  const detail::Preprocessed pre = detail::preprocess(cloud, pose, camera, settings);
  const detail::Bins bins = detail::bin_tiles(pre, camera);

  RenderOutput out;
  out.linear = Image::zeros(camera.width, camera.height, 3);
  out.alpha = Image::zeros(camera.width, camera.height, 1);

  const std::size_t n_tiles = bins.tiles.size();
  const int threads = detail::resolve_threads(settings.threads);
  std::vector<std::vector<std::uint8_t>> tile_visible(n_tiles);

  parallel_jobs(n_tiles, threads, [&](std::size_t tile) {
    const auto& list = bins.tiles[tile];
    const int tx = static_cast<int>(tile) % bins.tiles_x;
    const int ty = static_cast<int>(tile) / bins.tiles_x;
    const int px0 = tx * kTileSize;
    const int py0 = ty * kTileSize;
    const int px1 = std::min(camera.width, px0 + kTileSize);
    const int py1 = std::min(camera.height, py0 + kTileSize);

    std::vector<std::uint8_t> seen(list.size(), 0);  // by list position
    for (int py = py0; py < py1; ++py)
      for (int px = px0; px < px1; ++px) {
        const Vec2 p(px + 0.5, py + 0.5);
        double transmittance = 1.0;
        Vec3 rgb = Vec3::Zero();
        for (std::size_t k = 0; k < list.size(); ++k) {
          const std::uint32_t id = list[k];
          const Vec2 d = p - pre.mean2d[id];
          const Mat2& a = pre.conic[id];
          const double q = a(0, 0) * d.x() * d.x() + 2.0 * a(0, 1) * d.x() * d.y() +
                           a(1, 1) * d.y() * d.y();
          if (q > detail::kSupportQ) continue;
          const double alpha = std::min(kMaxAlpha, pre.opacity[id] * std::exp(-0.5 * q));
          if (alpha < kMinAlpha) continue;
          rgb += transmittance * alpha * pre.color[id];
          if (transmittance > 0.0) seen[k] = 1;
          transmittance *= 1.0 - alpha;
        }
        rgb += transmittance * settings.background;
        out.linear.at(px, py, 0) = rgb[0];
        out.linear.at(px, py, 1) = rgb[1];
        out.linear.at(px, py, 2) = rgb[2];
        out.alpha.at(px, py, 0) = 1.0 - transmittance;
      }
    tile_visible[tile] = std::move(seen);
  });

  std::vector<std::uint8_t> visible(cloud.size(), 0);
  for (std::size_t tile = 0; tile < n_tiles; ++tile) {
    const auto& seen = tile_visible[tile];
    const auto& list = bins.tiles[tile];
    for (std::size_t k = 0; k < seen.size(); ++k)
      if (seen[k]) visible[list[k]] = 1;
  }
  for (std::uint32_t i = 0; i < visible.size(); ++i)
    if (visible[i]) out.visible.push_back(i);

  out.log = out.linear.log(kLogFloor);
  return out;
}

}  // namespace evsplat
