#include "evsplat/checkpoint.hpp"

#include "binio.hpp"

#include <filesystem>

namespace evsplat {

namespace {
constexpr char kMagic[] = "EVSCKPT1";
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  ckpt.cloud.validate();
  const std::string tmp = path + ".tmp";
  std::ofstream os(tmp, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os.write(kMagic, 8);
  binio::write_le<std::uint32_t>(os, kVersion);
  binio::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.cloud.sh_degree));
  binio::write_le<std::int64_t>(os, ckpt.iteration);
  binio::write_le<std::uint64_t>(os, ckpt.cloud.size());
  const GaussianCloud& c = ckpt.cloud;
  for (const Vec3& v : c.means)
    for (int j = 0; j < 3; ++j) binio::write_le<double>(os, v[j]);
  for (const Vec3& v : c.log_scales)
    for (int j = 0; j < 3; ++j) binio::write_le<double>(os, v[j]);
  for (const Vec4& v : c.rotations)
    for (int j = 0; j < 4; ++j) binio::write_le<double>(os, v[j]);
  for (double v : c.opacity_logits) binio::write_le<double>(os, v);
  for (double v : c.sh) binio::write_le<double>(os, v);
  if (!os) throw IoError("write failed for " + path);
  os.close();
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename " + tmp + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  binio::expect_magic(is, kMagic, path);
  const auto version = binio::read_le<std::uint32_t>(is, "checkpoint version");
  if (version != kVersion) throw IoError(path + ": unsupported checkpoint version");
  const auto sh_degree = binio::read_le<std::uint32_t>(is, "sh degree");
  if (sh_degree > 3) throw IoError(path + ": implausible sh degree");
  Checkpoint ckpt;
  ckpt.iteration = binio::read_le<std::int64_t>(is, "iteration");
  const auto n = binio::read_le<std::uint64_t>(is, "gaussian count");
  if (n > (1ull << 32)) throw IoError(path + ": implausible gaussian count");
  ckpt.cloud = GaussianCloud::sized(n, static_cast<int>(sh_degree));
  GaussianCloud& c = ckpt.cloud;
  for (Vec3& v : c.means)
    for (int j = 0; j < 3; ++j) v[j] = binio::read_le<double>(is, "mean");
  for (Vec3& v : c.log_scales)
    for (int j = 0; j < 3; ++j) v[j] = binio::read_le<double>(is, "log scale");
  for (Vec4& v : c.rotations)
    for (int j = 0; j < 4; ++j) v[j] = binio::read_le<double>(is, "rotation");
  for (double& v : c.opacity_logits) v = binio::read_le<double>(is, "opacity logit");
  for (double& v : c.sh) v = binio::read_le<double>(is, "sh coefficient");
  c.validate();
  return ckpt;
}

}  // namespace evsplat
