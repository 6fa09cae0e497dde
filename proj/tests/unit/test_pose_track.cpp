#include "evsplat/pose_track.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

using namespace evsplat;

namespace {

PoseTrack make_track(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PoseTrack track;
  for (std::size_t i = 0; i < n; ++i) {
    track.timestamps_us.push_back(1000 * i + 500);
    SE3Pose pose;
    pose.rotation = so3_exp(Vec3(u(rng), u(rng), u(rng)));
    pose.translation = Vec3(u(rng), u(rng), u(rng)) * 2.0;
    track.poses.push_back(pose);
  }
  return track;
}

// independent slerp via the axis-angle of the relative rotation
Mat3 slerp_ref(const Mat3& r0, const Mat3& r1, double s) {
  const Mat3 rel = r1 * r0.transpose();
  const double angle = rotation_angle(rel);
  if (angle < 1e-12) return r0;
  Vec3 axis(rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0), rel(1, 0) - rel(0, 1));
  axis.normalize();
  return so3_exp(s * angle * axis) * r0;
}

}  // namespace

TEST_CASE("track validation enforces strictly increasing timestamps") {
  PoseTrack track = make_track(5, 1);
  CHECK_NOTHROW(track.validate());
  track.timestamps_us[3] = track.timestamps_us[2];
  CHECK_THROWS_AS(track.validate(), ContractViolation);
  PoseTrack mismatched = make_track(4, 2);
  mismatched.poses.pop_back();
  CHECK_THROWS_AS(mismatched.validate(), ContractViolation);
  CHECK_THROWS_AS(PoseTrack{}.nearest_index(0), ContractViolation);
  CHECK_THROWS_AS(interpolate_pose(PoseTrack{}, 0), ContractViolation);
}

TEST_CASE("nearest_index picks the closest node, earlier on ties") {
  PoseTrack track = make_track(4, 3);  // nodes at 500, 1500, 2500, 3500
  CHECK(track.nearest_index(0) == 0);
  CHECK(track.nearest_index(500) == 0);
  CHECK(track.nearest_index(999) == 0);
  CHECK(track.nearest_index(1000) == 0);  // tie between 500 and 1500
  CHECK(track.nearest_index(1001) == 1);
  CHECK(track.nearest_index(99999) == 3);
}

TEST_CASE("interpolation reproduces the stored poses exactly at the nodes") {
  const PoseTrack track = make_track(6, 4);
  for (std::size_t i = 0; i < track.size(); ++i) {
    const SE3Pose p = interpolate_pose(track, track.timestamps_us[i]);
    CHECK(p.rotation == track.poses[i].rotation);
    CHECK(p.translation == track.poses[i].translation);
  }
}

TEST_CASE("interpolation clamps outside the track span") {
  const PoseTrack track = make_track(3, 5);
  const SE3Pose lo = interpolate_pose(track, 0);
  CHECK(lo.rotation == track.poses.front().rotation);
  CHECK(lo.translation == track.poses.front().translation);
  const SE3Pose hi = interpolate_pose(track, 1u << 30);
  CHECK(hi.rotation == track.poses.back().rotation);
  CHECK(hi.translation == track.poses.back().translation);
}

TEST_CASE("interpolated rotations follow the geodesic and translations the chord") {
  const PoseTrack track = make_track(2, 6);
  for (double s : {0.25, 0.5, 0.75}) {
    const std::uint64_t t =
        track.timestamps_us[0] +
        static_cast<std::uint64_t>(s * double(track.timestamps_us[1] - track.timestamps_us[0]));
    const double s_exact = double(t - track.timestamps_us[0]) /
                           double(track.timestamps_us[1] - track.timestamps_us[0]);
    const SE3Pose p = interpolate_pose(track, t);
    const Mat3 want = slerp_ref(track.poses[0].rotation, track.poses[1].rotation, s_exact);
    CHECK((p.rotation - want).norm() < 1e-9);
    const Vec3 chord = (1.0 - s_exact) * track.poses[0].translation +
                       s_exact * track.poses[1].translation;
    CHECK((p.translation - chord).norm() < 1e-12);
    CHECK_NOTHROW(p.validate());
  }
}

TEST_CASE("pose track files round trip") {
  const PoseTrack track = make_track(7, 7);
  const std::string path = "test_pose_track_tmp.txt";
  write_pose_track(path, track);
  const PoseTrack back = read_pose_track(path);
  std::remove(path.c_str());
  REQUIRE(back.size() == track.size());
  for (std::size_t i = 0; i < track.size(); ++i) {
    CHECK(back.timestamps_us[i] == track.timestamps_us[i]);
    CHECK((back.poses[i].rotation - track.poses[i].rotation).norm() < 1e-12);
    CHECK((back.poses[i].translation - track.poses[i].translation).norm() == 0.0);
  }
  CHECK_THROWS_AS(read_pose_track("no_such_track.txt"), IoError);
}
