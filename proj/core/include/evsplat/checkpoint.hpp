#pragma once

#include "evsplat/gaussian_cloud.hpp"

#include <cstdint>
#include <string>

namespace evsplat {

struct Checkpoint {
  GaussianCloud cloud;
  std::int64_t iteration = 0;
};

// binary little-endian model file; round-trips doubles bit-exactly
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace evsplat
