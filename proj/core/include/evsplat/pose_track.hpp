#pragma once

#include "evsplat/camera.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace evsplat {

// Timestamped world-to-camera poses, strictly increasing in time.
struct PoseTrack {
  std::vector<std::uint64_t> timestamps_us;
  std::vector<SE3Pose> poses;

  std::size_t size() const { return timestamps_us.size(); }
  bool empty() const { return timestamps_us.empty(); }

  void validate() const;

  // index of the timestamp closest to t (earlier one wins ties)
  std::size_t nearest_index(std::uint64_t t_us) const;

  struct Bracket {
    std::size_t lo = 0;
    std::size_t hi = 0;
    double u = 0.0;  // blend weight of hi
  };
  // bracketing nodes and blend weight for t; lo == hi at node timestamps and
  // outside the track's span
  Bracket bracket(std::uint64_t t_us) const;
};

// SLERP on rotations, LERP on translations between the bracketing nodes.
// Exactly reproduces the stored pose at node timestamps; clamps outside the
// track's time span.
SE3Pose interpolate_pose(const PoseTrack& track, std::uint64_t t_us);

// text format: one "t_us tx ty tz qx qy qz qw" line per pose
void write_pose_track(const std::string& path, const PoseTrack& track);
PoseTrack read_pose_track(const std::string& path);

}  // namespace evsplat
