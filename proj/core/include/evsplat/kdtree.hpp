#pragma once

#include "evsplat/types.hpp"

#include <cstddef>
#include <vector>

namespace evsplat {

// Static 3d kd-tree for nearest-neighbor lookups during initialization.
class KdTree3 {
 public:
  explicit KdTree3(const std::vector<Vec3>& points);

  // k nearest neighbors of q by Euclidean distance, nearest first; the point
  // with index `exclude` is skipped (pass npos to keep all). Ties break by
  // index so results are deterministic.
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::vector<std::pair<double, std::size_t>> knn(const Vec3& q, int k,
                                                  std::size_t exclude = npos) const;

 private:
  struct Node {
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t point = 0;
    std::uint8_t axis = 0;
  };
  std::vector<Vec3> points_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;

  std::int32_t build(std::vector<std::uint32_t>& ids, std::size_t begin, std::size_t end,
                     int depth);
};

}  // namespace evsplat
