#include "evsplat/pose_track.hpp"

#include <algorithm>

namespace evsplat {

void PoseTrack::validate() const {
  if (timestamps_us.size() != poses.size())
    throw ContractViolation("pose track: timestamp and pose counts disagree");
  for (std::size_t i = 1; i < timestamps_us.size(); ++i)
    if (timestamps_us[i] <= timestamps_us[i - 1])
      throw ContractViolation("pose track: timestamps must strictly increase");
  for (const SE3Pose& p : poses) p.validate();
}

std::size_t PoseTrack::nearest_index(std::uint64_t t_us) const {
  if (empty()) throw ContractViolation("pose track: empty");
  const auto it = std::lower_bound(timestamps_us.begin(), timestamps_us.end(), t_us);
  if (it == timestamps_us.begin()) return 0;
  if (it == timestamps_us.end()) return timestamps_us.size() - 1;
  const std::size_t hi = static_cast<std::size_t>(it - timestamps_us.begin());
  const std::size_t lo = hi - 1;
  const std::uint64_t d_lo = t_us - timestamps_us[lo];
  const std::uint64_t d_hi = timestamps_us[hi] - t_us;
  return d_lo <= d_hi ? lo : hi;
}

PoseTrack::Bracket PoseTrack::bracket(std::uint64_t t_us) const {
  if (empty()) throw ContractViolation("pose track: empty");
  Bracket b;
  if (t_us <= timestamps_us.front()) return b;
  if (t_us >= timestamps_us.back()) {
    b.lo = b.hi = timestamps_us.size() - 1;
    return b;
  }
  const auto it = std::lower_bound(timestamps_us.begin(), timestamps_us.end(), t_us);
  b.hi = static_cast<std::size_t>(it - timestamps_us.begin());
  if (timestamps_us[b.hi] == t_us) {
    b.lo = b.hi;
    return b;
  }
  b.lo = b.hi - 1;
  b.u = static_cast<double>(t_us - timestamps_us[b.lo]) /
        static_cast<double>(timestamps_us[b.hi] - timestamps_us[b.lo]);
  return b;
}

SE3Pose interpolate_pose(const PoseTrack& track, std::uint64_t t_us) {
  if (track.empty()) throw ContractViolation("interpolate_pose: empty track");
  const auto& ts = track.timestamps_us;
  if (t_us <= ts.front()) return track.poses.front();
  if (t_us >= ts.back()) return track.poses.back();
  const auto it = std::lower_bound(ts.begin(), ts.end(), t_us);
  const std::size_t hi = static_cast<std::size_t>(it - ts.begin());
  if (ts[hi] == t_us) return track.poses[hi];  // node timestamps map through verbatim
  const std::size_t lo = hi - 1;
  const double u = static_cast<double>(t_us - ts[lo]) / static_cast<double>(ts[hi] - ts[lo]);
  const SE3Pose& a = track.poses[lo];
  const SE3Pose& b = track.poses[hi];
  SE3Pose out;
  out.rotation = a.quaternion().slerp(u, b.quaternion()).toRotationMatrix();
  out.translation = (1.0 - u) * a.translation + u * b.translation;
  return out;
}

}  // namespace evsplat
