#pragma once

#include "evsplat/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace evsplat {

// Adam moments for one parameter group. The group's scalars live in a flat
// array of fixed-size blocks (one block per Gaussian or per pose); blocks can
// be dropped or appended in step with the parameters they shadow.
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(std::size_t n_scalars);

  std::size_t size() const { return m_.size(); }
  std::uint64_t steps() const { return t_; }

  // one update over all n scalars
  void step(std::span<double> params, std::span<const double> grads, double lr);

  struct SliceRate {
    std::size_t offset = 0;
    std::size_t len = 0;
    double lr = 0.0;
  };

  // One update restricted to the given slices of every block_stride-sized
  // block, each slice with its own rate. Counts as a single step for bias
  // correction no matter how many slices are passed.
  void step_slices(std::span<double> params, std::span<const double> grads,
                   std::size_t block_stride, std::span<const SliceRate> slices);

  // Lazy update: only the listed blocks move; everything else keeps its
  // parameters AND moments (no decay), so a block that goes unhit for a while
  // does not coast on stale momentum. Bias correction runs on a per-block hit
  // count. Indices must be unique. Meant for sparsely hit groups like
  // per-pose blocks; dense groups should keep using step().
  void step_blocks(std::span<double> params, std::span<const double> grads,
                   std::size_t block_size, std::span<const std::uint32_t> blocks,
                   double lr);

  void zero_moments();
  void resize_blocks(const std::vector<std::uint8_t>& keep, std::size_t block_size,
                     std::size_t append_count);

  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void save(std::ostream& os) const;
  static AdamState load(std::istream& is);

 private:
  std::vector<double> m_;
  std::vector<double> v_;
  std::uint64_t t_ = 0;
  std::vector<std::uint64_t> block_t_;  // per-block hit counts, step_blocks only

  void advance() { ++t_; }
  void update_scalar(std::size_t i, double* param, double grad, double scaled_lr);
  double bias_corrected_lr(double lr) const;
  double bias_corrected_lr_at(double lr, std::uint64_t t) const;
};

}  // namespace evsplat
