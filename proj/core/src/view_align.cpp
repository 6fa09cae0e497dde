#include "evsplat/view_align.hpp"

#include "evsplat/adam.hpp"
#include "evsplat/losses.hpp"
#include "evsplat/sixdof.hpp"

#include <span>

namespace evsplat {

SE3Pose align_view_pose(const GaussianCloud& cloud, const CameraModel& camera,
                        const SE3Pose& base, const Image& gt_log, const RenderSettings& settings,
                        const ViewAlignOptions& options) {
  if (gt_log.width != camera.width || gt_log.height != camera.height || gt_log.channels != 3)
    throw ContractViolation("view alignment: reference image does not match the camera");
  ErrorTransform err;
  AdamState adam(9);
  for (int it = 0; it < options.iterations; ++it) {
    const SE3Pose pose = refined_pose(err, base);
    const RenderOutput out = render(cloud, pose, camera, settings);
    const Image pred_cc = color_correct(out.log, gt_log);
    // d mean|cc - gt| / d log: the per-channel exposure shift folds in as
    // the channel-mean of the sign map
    const double n_px = static_cast<double>(camera.width) * camera.height;
    Image d_log = Image::zeros(camera.width, camera.height, 3);
    double channel_sign_sum[3] = {0.0, 0.0, 0.0};
    for (int py = 0; py < camera.height; ++py)
      for (int px = 0; px < camera.width; ++px)
        for (int c = 0; c < 3; ++c) {
          const double diff = pred_cc.at(px, py, c) - gt_log.at(px, py, c);
          const double s = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
          d_log.at(px, py, c) = s;
          channel_sign_sum[c] += s;
        }
    for (int py = 0; py < camera.height; ++py)
      for (int px = 0; px < camera.width; ++px)
        for (int c = 0; c < 3; ++c)
          d_log.at(px, py, c) =
              (d_log.at(px, py, c) - channel_sign_sum[c] / n_px) / (3.0 * n_px);
    const GradientBundle bundle = render_backward(cloud, pose, camera, d_log, settings);
    const RefinedPoseGrads rp =
        refined_pose_backward(base, bundle.d_pose_rotation, bundle.d_pose_translation);
    const GramSchmidtGrads gs = gram_schmidt_backward(err.r1, err.r2, rp.d_err_rotation);
    double params[9];
    double grads[9];
    for (int j = 0; j < 3; ++j) {
      params[j] = err.r1[j];
      params[3 + j] = err.r2[j];
      params[6 + j] = err.t[j];
      grads[j] = gs.d_r1[j];
      grads[3 + j] = gs.d_r2[j];
      grads[6 + j] = rp.d_err_translation[j];
    }
    adam.step(std::span<double>(params, 9), std::span<const double>(grads, 9), options.lr);
    ErrorTransform next;
    next.r1 = Vec3(params[0], params[1], params[2]);
    next.r2 = Vec3(params[3], params[4], params[5]);
    next.t = Vec3(params[6], params[7], params[8]);
    try {
      (void)gram_schmidt(next.r1, next.r2);
    } catch (const NumericError&) {
      break;  // degenerate step: keep the last good alignment
    }
    err = next;
  }
  return refined_pose(err, base);
}

}  // namespace evsplat
