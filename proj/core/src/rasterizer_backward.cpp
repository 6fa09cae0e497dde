#include "evsplat/rasterizer.hpp"

#include "evsplat/thread_pool.hpp"
#include "raster_internal.hpp"

#include <algorithm>
#include <cmath>

namespace evsplat {

namespace {

using detail::kSupportQ;

// per-tile accumulators addressed by position in the tile's work list
struct TileGrads {
  std::vector<Vec3> color;
  std::vector<Vec2> mean2d;
  std::vector<Vec3> conic;  // (d/dA00, d/dA01 = d/dA10, d/dA11)
  std::vector<double> opacity;
  std::vector<std::uint8_t> seen;
};

struct PixelHit {
  std::uint32_t k;  // position in tile list
  double alpha;
  double gauss;  // exp(-q/2)
  double transmittance;  // before this hit
  Vec2 d;
};

// screen-space gradients accumulated over all pixels, per gaussian
struct ScreenGrads {
  std::vector<Vec3> color;
  std::vector<Vec2> mean2d;
  std::vector<Vec3> conic;
  std::vector<double> opacity;
  std::vector<std::uint8_t> visible;
};

struct PosePartial {
  Mat3 rot = Mat3::Zero();
  Vec3 trans = Vec3::Zero();
};

}  // namespace

GradientBundle render_backward(const GaussianCloud& cloud, const SE3Pose& pose,
                               const CameraModel& camera, const Image& d_log_image,
                               const RenderSettings& settings) {
  if (d_log_image.width != camera.width || d_log_image.height != camera.height ||
      d_log_image.channels != 3)
    throw ContractViolation("render_backward: d_log_image shape must match the camera");

  const detail::Preprocessed pre = detail::preprocess(cloud, pose, camera, settings);
  const detail::Bins bins = detail::bin_tiles(pre, camera);
  const std::size_t n = cloud.size();
  const int threads = detail::resolve_threads(settings.threads);

  const std::size_t n_tiles = bins.tiles.size();
  std::vector<TileGrads> tile_grads(n_tiles);

  parallel_jobs(n_tiles, threads, [&](std::size_t tile) {
    const auto& list = bins.tiles[tile];
    if (list.empty()) return;
    TileGrads& tg = tile_grads[tile];
    tg.color.assign(list.size(), Vec3::Zero());
    tg.mean2d.assign(list.size(), Vec2::Zero());
    tg.conic.assign(list.size(), Vec3::Zero());
    tg.opacity.assign(list.size(), 0.0);
    tg.seen.assign(list.size(), 0);

    const int tx = static_cast<int>(tile) % bins.tiles_x;
    const int ty = static_cast<int>(tile) / bins.tiles_x;
    const int px0 = tx * kTileSize;
    const int py0 = ty * kTileSize;
    const int px1 = std::min(camera.width, px0 + kTileSize);
    const int py1 = std::min(camera.height, py0 + kTileSize);

    std::vector<PixelHit> hits;
    hits.reserve(list.size());

    for (int py = py0; py < py1; ++py)
      for (int px = px0; px < px1; ++px) {
        const Vec2 p(px + 0.5, py + 0.5);
        hits.clear();
        double transmittance = 1.0;
        Vec3 lin = Vec3::Zero();
        for (std::uint32_t k = 0; k < list.size(); ++k) {
          const std::uint32_t id = list[k];
          const Vec2 d = p - pre.mean2d[id];
          const Mat2& a = pre.conic[id];
          const double q = a(0, 0) * d.x() * d.x() + 2.0 * a(0, 1) * d.x() * d.y() +
                           a(1, 1) * d.y() * d.y();
          if (q > kSupportQ) continue;
          const double gauss = std::exp(-0.5 * q);
          const double alpha = std::min(kMaxAlpha, pre.opacity[id] * gauss);
          if (alpha < kMinAlpha) continue;
          hits.push_back({k, alpha, gauss, transmittance, d});
          lin += transmittance * alpha * pre.color[id];
          transmittance *= 1.0 - alpha;
        }
        lin += transmittance * settings.background;

        Vec3 d_lin = Vec3::Zero();
        bool any = false;
        for (int c = 0; c < 3; ++c) {
          // log clamps at kLogFloor; gradient is zero in the clamped region
          if (lin[c] >= kLogFloor) {
            d_lin[c] = d_log_image.at(px, py, c) / lin[c];
            if (d_lin[c] != 0.0) any = true;
          }
        }

        // mark contributors even when this pixel's gradient happens to be zero
        for (const PixelHit& h : hits)
          if (h.transmittance > 0.0) tg.seen[h.k] = 1;
        if (!any) continue;

        // suffix color: everything composited behind the current hit
        Vec3 suffix = transmittance * settings.background;
        for (auto it = hits.rbegin(); it != hits.rend(); ++it) {
          const PixelHit& h = *it;
          const std::uint32_t id = list[h.k];
          const Vec3& col = pre.color[id];
          const double weight = h.transmittance * h.alpha;

          tg.color[h.k] += weight * d_lin;

          const double d_alpha =
              d_lin.dot(h.transmittance * col - suffix / (1.0 - h.alpha));
          suffix += weight * col;

          const double o = pre.opacity[id];
          if (o * h.gauss >= kMaxAlpha) continue;  // alpha clamp active
          tg.opacity[h.k] += d_alpha * h.gauss;
          const double d_q = -0.5 * h.gauss * o * d_alpha;
          const Mat2& a = pre.conic[id];
          const Vec2 ad = a * h.d;
          tg.mean2d[h.k] += -2.0 * d_q * ad;
          tg.conic[h.k] +=
              d_q * Vec3(h.d.x() * h.d.x(), h.d.x() * h.d.y(), h.d.y() * h.d.y());
        }
      }
  });

  // deterministic reduction in tile order
  ScreenGrads sg;
  sg.color.assign(n, Vec3::Zero());
  sg.mean2d.assign(n, Vec2::Zero());
  sg.conic.assign(n, Vec3::Zero());
  sg.opacity.assign(n, 0.0);
  sg.visible.assign(n, 0);
  for (std::size_t tile = 0; tile < n_tiles; ++tile) {
    const auto& list = bins.tiles[tile];
    const TileGrads& tg = tile_grads[tile];
    for (std::size_t k = 0; k < tg.color.size(); ++k) {
      const std::uint32_t id = list[k];
      sg.color[id] += tg.color[k];
      sg.mean2d[id] += tg.mean2d[k];
      sg.conic[id] += tg.conic[k];
      sg.opacity[id] += tg.opacity[k];
      if (tg.seen[k]) sg.visible[id] = 1;
    }
  }
  tile_grads.clear();

  GradientBundle out;
  out.d_means.assign(n, Vec3::Zero());
  out.d_log_scales.assign(n, Vec3::Zero());
  out.d_rotations.assign(n, Vec4::Zero());
  out.d_opacity_logits.assign(n, 0.0);
  out.d_sh.assign(cloud.sh.size(), 0.0);
  out.d_screen_norm.assign(n, 0.0);
  out.radius_px = pre.radius;
  out.visible = sg.visible;

  const Mat3& w_mat = pose.rotation;
  const Vec3& tau = pose.translation;
  const int used_basis = sh_basis_count(pre.used_degree);
  const std::size_t chunk = 4096;
  std::vector<PosePartial> pose_partials(chunk_count(n, chunk));

  parallel_chunks(n, chunk, settings.threads,
                  [&](std::size_t ci, std::size_t begin, std::size_t end) {
    PosePartial& pp = pose_partials[ci];
    double basis[kMaxShBasis];
    Vec3 basis_grad[kMaxShBasis];
    for (std::size_t i = begin; i < end; ++i) {
      if (!pre.active[i]) continue;
      const bool untouched = sg.color[i].isZero(0) && sg.mean2d[i].isZero(0) &&
                             sg.conic[i].isZero(0) && sg.opacity[i] == 0.0;
      if (untouched) continue;

      const Vec3& t = pre.t_cam[i];
      const double tz = t.z();
      const double inv_z = 1.0 / tz;
      const double inv_z2 = inv_z * inv_z;
      const double fx = camera.fx(), fy = camera.fy();

      Vec3 g_t = Vec3::Zero();       // dL/d(camera-space mean)
      Vec3 g_mean = Vec3::Zero();    // dL/d(world mean)
      Vec3 g_cc = Vec3::Zero();      // dL/d(camera center)

      // opacity
      const double o = pre.opacity[i];
      out.d_opacity_logits[i] = sg.opacity[i] * o * (1.0 - o);

      // color -> sh coefficients and view direction
      {
        Vec3 d_pre = sg.color[i];
        for (int c = 0; c < 3; ++c)
          if (pre.clamped[i] & (1u << c)) d_pre[c] = 0.0;
        if (!d_pre.isZero(0)) {
          sh_basis(pre.used_degree, pre.view_dir[i], basis);
          sh_basis_grad(pre.used_degree, pre.view_dir[i], basis_grad);
          const double* block = cloud.sh_block(i);
          double* d_block = out.d_sh.data() + i * cloud.sh_stride();
          Vec3 d_unit = Vec3::Zero();
          for (int b = 0; b < used_basis; ++b) {
            double along = 0.0;
            for (int c = 0; c < 3; ++c) {
              d_block[b * 3 + c] = basis[b] * d_pre[c];
              along += d_pre[c] * block[b * 3 + c];
            }
            d_unit += along * basis_grad[b];
          }
          if (pre.dir_len[i] > 0.0) {
            const Vec3& u = pre.view_dir[i];
            const Vec3 d_raw = (d_unit - u * u.dot(d_unit)) / pre.dir_len[i];
            g_mean += d_raw;
            g_cc -= d_raw;
          }
        }
      }

      // screen mean -> camera-space mean
      const Vec2& gm2 = sg.mean2d[i];
      g_t.x() += gm2.x() * fx * inv_z;
      g_t.y() += gm2.y() * fy * inv_z;
      g_t.z() += -gm2.x() * fx * t.x() * inv_z2 - gm2.y() * fy * t.y() * inv_z2;
      out.d_screen_norm[i] =
          std::hypot(gm2.x() * 0.5 * camera.width, gm2.y() * 0.5 * camera.height);

      // conic -> 2d covariance -> world covariance -> scales/rotation/pose
      {
        const Mat2& a = pre.conic[i];
        Mat2 ga;
        ga << sg.conic[i][0], sg.conic[i][1], sg.conic[i][1], sg.conic[i][2];
        const Mat2 h = -(a * ga * a);  // dL/d(cov2d)

        const Mat23 j = projection_jacobian(camera, t);
        const Mat23 m = j * w_mat;
        const Mat3 cov_w = covariance_from_params(cloud.log_scales[i], cloud.rotations[i]);

        const Mat3 g_cov_w = m.transpose() * h * m;
        const Mat23 g_m = 2.0 * h * m * cov_w;
        const Mat23 g_j = g_m * w_mat.transpose();
        pp.rot += j.transpose() * g_m;

        // J's own dependence on the camera-space mean
        g_t.x() += g_j(0, 2) * (-fx * inv_z2);
        g_t.y() += g_j(1, 2) * (-fy * inv_z2);
        g_t.z() += g_j(0, 0) * (-fx * inv_z2) + g_j(1, 1) * (-fy * inv_z2) +
                   g_j(0, 2) * (2.0 * fx * t.x() * inv_z2 * inv_z) +
                   g_j(1, 2) * (2.0 * fy * t.y() * inv_z2 * inv_z);

        // world covariance = (R S)(R S)^T
        const Vec3 s = cloud.log_scales[i].array().exp();
        const Vec4& quat = cloud.rotations[i];
        const double qn = quat.norm();
        const Vec4 q = quat / qn;
        const Mat3 r = rotation_from_quat(cloud.rotations[i]);
        Mat3 m0 = r;
        m0.col(0) *= s[0];
        m0.col(1) *= s[1];
        m0.col(2) *= s[2];
        const Mat3 g_m0 = 2.0 * g_cov_w * m0;
        for (int col = 0; col < 3; ++col)
          out.d_log_scales[i][col] = r.col(col).dot(g_m0.col(col)) * s[col];
        const Mat3 g_r = g_m0 * s.asDiagonal();

        const double qw = q[0], qx = q[1], qy = q[2], qz = q[3];
        Vec4 g_qn;
        g_qn[0] = 2.0 * (g_r(0, 1) * -qz + g_r(0, 2) * qy + g_r(1, 0) * qz +
                         g_r(1, 2) * -qx + g_r(2, 0) * -qy + g_r(2, 1) * qx);
        g_qn[1] = 2.0 * (g_r(0, 1) * qy + g_r(0, 2) * qz + g_r(1, 0) * qy +
                         g_r(1, 1) * -2.0 * qx + g_r(1, 2) * -qw + g_r(2, 0) * qz +
                         g_r(2, 1) * qw + g_r(2, 2) * -2.0 * qx);
        g_qn[2] = 2.0 * (g_r(0, 0) * -2.0 * qy + g_r(0, 1) * qx + g_r(0, 2) * qw +
                         g_r(1, 0) * qx + g_r(1, 2) * qz + g_r(2, 0) * -qw +
                         g_r(2, 1) * qz + g_r(2, 2) * -2.0 * qy);
        g_qn[3] = 2.0 * (g_r(0, 0) * -2.0 * qz + g_r(0, 1) * -qw + g_r(0, 2) * qx +
                         g_r(1, 0) * qw + g_r(1, 1) * -2.0 * qz + g_r(1, 2) * qy +
                         g_r(2, 0) * qx + g_r(2, 1) * qy);
        out.d_rotations[i] = (g_qn - q * q.dot(g_qn)) / qn;
      }

      // camera-space mean = W * mean + tau
      g_mean += w_mat.transpose() * g_t;
      pp.rot += g_t * cloud.means[i].transpose();
      pp.trans += g_t;

      // camera center = -W^T * tau (view-direction path)
      if (!g_cc.isZero(0)) {
        pp.rot += -tau * g_cc.transpose();
        pp.trans += -(w_mat * g_cc);
      }

      out.d_means[i] = g_mean;
    }
  });

  Mat3 g_w = Mat3::Zero();
  Vec3 g_tau = Vec3::Zero();
  for (const PosePartial& pp : pose_partials) {
    g_w += pp.rot;
    g_tau += pp.trans;
  }
  out.d_pose_rotation = g_w;
  out.d_pose_translation = g_tau;
  const Mat3 a = g_w * w_mat.transpose();
  out.d_pose[0] = a(2, 1) - a(1, 2);
  out.d_pose[1] = a(0, 2) - a(2, 0);
  out.d_pose[2] = a(1, 0) - a(0, 1);
  out.d_pose.tail<3>() = g_tau;
  return out;
}

}  // namespace evsplat
