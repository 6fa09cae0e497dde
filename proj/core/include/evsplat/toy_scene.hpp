#pragma once

#include "evsplat/camera.hpp"
#include "evsplat/gaussian_cloud.hpp"
#include "evsplat/pose_track.hpp"

#include <cstdint>

namespace evsplat {

// Seeded cluster of colored blobs around the origin, dense enough to give
// every camera ray structure. Used by the synthetic end-to-end fixtures.
struct ToySceneOptions {
  std::size_t n_gaussians = 120;
  double radius = 1.2;       // cluster extent
  double scale_min = 0.04;
  double scale_max = 0.16;
  int sh_degree = 1;         // mild view dependence by default
  std::uint64_t seed = 7;
};

GaussianCloud toy_scene(const ToySceneOptions& options = {});

// world-to-camera pose looking from eye toward target, +z forward, +y down
SE3Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& up = Vec3(0, 0, 1));

// Circle of cameras around the origin at a fixed height, all aimed at the
// center. The angular speed is modulated sinusoidally so the event rate
// varies over the orbit; ratio 1 gives a constant-speed orbit.
struct OrbitOptions {
  double radius = 4.0;
  double height = 0.8;
  std::uint64_t duration_us = 4000000;
  double pose_rate_hz = 50.0;
  double revolutions = 1.0;
  double speed_ratio = 1.0;  // max/min angular speed, >= 1
  int speed_cycles = 1;      // full modulation periods per track
};

PoseTrack orbit_track(const OrbitOptions& options = {});

// closed-form orbit angle at normalized time s in [0, 1]
double orbit_angle(const OrbitOptions& options, double s);

// the orbit pose at an arbitrary time, exact rather than interpolated
SE3Pose orbit_pose(const OrbitOptions& options, std::uint64_t t_us);

}  // namespace evsplat
