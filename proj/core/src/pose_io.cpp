#include "evsplat/pose_track.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace evsplat {

void write_pose_track(const std::string& path, const PoseTrack& track) {
  track.validate();
  const std::string tmp = path + ".tmp";
  std::ofstream os(tmp);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << "# t_us tx ty tz qx qy qz qw (world-to-camera)\n";
  char line[512];
  for (std::size_t i = 0; i < track.size(); ++i) {
    const SE3Pose& p = track.poses[i];
    const Quat q = p.quaternion();
    std::snprintf(line, sizeof(line),
                  "%llu %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n",
                  static_cast<unsigned long long>(track.timestamps_us[i]),
                  p.translation.x(), p.translation.y(), p.translation.z(),
                  q.x(), q.y(), q.z(), q.w());
    os << line;
  }
  if (!os) throw IoError("write failed for " + path);
  os.close();
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename " + tmp + ": " + ec.message());
}

PoseTrack read_pose_track(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  PoseTrack track;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    unsigned long long t = 0;
    double tx, ty, tz, qx, qy, qz, qw;
    if (!(ls >> t >> tx >> ty >> tz >> qx >> qy >> qz >> qw)) {
      std::ostringstream err;
      err << path << ":" << line_no << ": malformed pose line";
      throw IoError(err.str());
    }
    track.timestamps_us.push_back(t);
    track.poses.push_back(SE3Pose::from_quaternion(Quat(qw, qx, qy, qz), Vec3(tx, ty, tz)));
  }
  track.validate();
  return track;
}

}  // namespace evsplat
