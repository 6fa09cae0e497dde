#include "evsplat/kdtree.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

namespace evsplat {

KdTree3::KdTree3(const std::vector<Vec3>& points) : points_(points) {
  nodes_.reserve(points_.size());
  std::vector<std::uint32_t> ids(points_.size());
  std::iota(ids.begin(), ids.end(), 0u);
  root_ = build(ids, 0, ids.size(), 0);
}

std::int32_t KdTree3::build(std::vector<std::uint32_t>& ids, std::size_t begin, std::size_t end,
                            int depth) {
  if (begin >= end) return -1;
  const int axis = depth % 3;
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(ids.begin() + begin, ids.begin() + mid, ids.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     if (points_[a][axis] != points_[b][axis])
                       return points_[a][axis] < points_[b][axis];
                     return a < b;
                   });
  Node node;
  node.point = ids[mid];
  node.axis = static_cast<std::uint8_t>(axis);
  const auto self = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);
  const std::int32_t left = build(ids, begin, mid, depth + 1);
  const std::int32_t right = build(ids, mid + 1, end, depth + 1);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

std::vector<std::pair<double, std::size_t>> KdTree3::knn(const Vec3& q, int k,
                                                         std::size_t exclude) const {
  if (k <= 0) throw ContractViolation("kdtree: k must be positive");
  // max-heap of the k best (distance^2, index) pairs, worst on top
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry> best;

  auto consider = [&](std::size_t idx) {
    if (idx == exclude) return;
    const double d2 = (points_[idx] - q).squaredNorm();
    if (best.size() < static_cast<std::size_t>(k)) {
      best.emplace(d2, idx);
    } else if (d2 < best.top().first ||
               (d2 == best.top().first && idx < best.top().second)) {
      best.pop();
      best.emplace(d2, idx);
    }
  };

  // explicit stack; recursion depth is fine but this keeps frames small
  std::vector<std::int32_t> stack;
  if (root_ >= 0) stack.push_back(root_);
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    consider(node.point);
    const double delta = q[node.axis] - points_[node.point][node.axis];
    const std::int32_t near = delta <= 0.0 ? node.left : node.right;
    const std::int32_t far = delta <= 0.0 ? node.right : node.left;
    const bool prune_far = best.size() == static_cast<std::size_t>(k) &&
                           delta * delta > best.top().first;
    if (far >= 0 && !prune_far) stack.push_back(far);
    if (near >= 0) stack.push_back(near);
  }

  std::vector<Entry> out(best.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = {std::sqrt(best.top().first), best.top().second};
    best.pop();
  }
  return out;
}

}  // namespace evsplat
