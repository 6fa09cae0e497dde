#include "evsplat/adam.hpp"

#include "binio.hpp"

#include <cmath>

namespace evsplat {

AdamState::AdamState(std::size_t n_scalars) : m_(n_scalars, 0.0), v_(n_scalars, 0.0) {}

double AdamState::bias_corrected_lr(double lr) const { return bias_corrected_lr_at(lr, t_); }

double AdamState::bias_corrected_lr_at(double lr, std::uint64_t steps) const {
  // folded bias correction: lr * sqrt(1 - b2^t) / (1 - b1^t)
  const double t = static_cast<double>(steps);
  return lr * std::sqrt(1.0 - std::pow(beta2, t)) / (1.0 - std::pow(beta1, t));
}

void AdamState::update_scalar(std::size_t i, double* param, double grad, double scaled_lr) {
  m_[i] = beta1 * m_[i] + (1.0 - beta1) * grad;
  v_[i] = beta2 * v_[i] + (1.0 - beta2) * grad * grad;
  *param -= scaled_lr * m_[i] / (std::sqrt(v_[i]) + eps);
}

void AdamState::step(std::span<double> params, std::span<const double> grads, double lr) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw ContractViolation("adam: parameter/gradient size mismatch");
  advance();
  const double scaled = bias_corrected_lr(lr);
  for (std::size_t i = 0; i < params.size(); ++i)
    update_scalar(i, &params[i], grads[i], scaled);
}

void AdamState::step_slices(std::span<double> params, std::span<const double> grads,
                            std::size_t block_stride, std::span<const SliceRate> slices) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw ContractViolation("adam: parameter/gradient size mismatch");
  for (const SliceRate& s : slices)
    if (s.offset + s.len > block_stride) throw ContractViolation("adam: slice outside block");
  advance();
  for (const SliceRate& s : slices) {
    const double scaled = bias_corrected_lr(s.lr);
    for (std::size_t base = 0; base + block_stride <= params.size(); base += block_stride)
      for (std::size_t j = 0; j < s.len; ++j) {
        const std::size_t i = base + s.offset + j;
        update_scalar(i, &params[i], grads[i], scaled);
      }
  }
}

void AdamState::step_blocks(std::span<double> params, std::span<const double> grads,
                            std::size_t block_size, std::span<const std::uint32_t> blocks,
                            double lr) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw ContractViolation("adam: parameter/gradient size mismatch");
  if (block_size == 0 || m_.size() % block_size != 0)
    throw ContractViolation("adam: block size does not divide the state");
  const std::size_t n_blocks = m_.size() / block_size;
  if (block_t_.size() != n_blocks) block_t_.assign(n_blocks, 0);
  advance();
  for (const std::uint32_t b : blocks) {
    if (b >= n_blocks) throw ContractViolation("adam: block index out of range");
    ++block_t_[b];
    const double scaled = bias_corrected_lr_at(lr, block_t_[b]);
    for (std::size_t j = 0; j < block_size; ++j) {
      const std::size_t i = b * block_size + j;
      update_scalar(i, &params[i], grads[i], scaled);
    }
  }
}

void AdamState::zero_moments() {
  std::fill(m_.begin(), m_.end(), 0.0);
  std::fill(v_.begin(), v_.end(), 0.0);
  std::fill(block_t_.begin(), block_t_.end(), 0);
}

void AdamState::resize_blocks(const std::vector<std::uint8_t>& keep, std::size_t block_size,
                              std::size_t append_count) {
  if (keep.size() * block_size != m_.size())
    throw ContractViolation("adam: keep mask does not cover the state");
  std::size_t w = 0;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (!keep[i]) continue;
    if (w != i)
      for (std::size_t j = 0; j < block_size; ++j) {
        m_[w * block_size + j] = m_[i * block_size + j];
        v_[w * block_size + j] = v_[i * block_size + j];
      }
    ++w;
  }
  m_.resize((w + append_count) * block_size, 0.0);
  v_.resize((w + append_count) * block_size, 0.0);
  std::fill(m_.begin() + w * block_size, m_.end(), 0.0);
  std::fill(v_.begin() + w * block_size, v_.end(), 0.0);
  if (block_t_.size() == keep.size()) {
    std::size_t wb = 0;
    for (std::size_t i = 0; i < keep.size(); ++i)
      if (keep[i]) block_t_[wb++] = block_t_[i];
    block_t_.resize(w + append_count, 0);
    std::fill(block_t_.begin() + static_cast<std::ptrdiff_t>(w), block_t_.end(), 0);
  } else {
    block_t_.clear();  // hit counts tracked a different block partition
  }
}

void AdamState::save(std::ostream& os) const {
  binio::write_le<std::uint64_t>(os, t_);
  binio::write_le<std::uint64_t>(os, m_.size());
  for (double v : m_) binio::write_le<double>(os, v);
  for (double v : v_) binio::write_le<double>(os, v);
  binio::write_le<std::uint64_t>(os, block_t_.size());
  for (std::uint64_t t : block_t_) binio::write_le<std::uint64_t>(os, t);
}

AdamState AdamState::load(std::istream& is) {
  AdamState s;
  s.t_ = binio::read_le<std::uint64_t>(is, "adam step count");
  const auto n = binio::read_le<std::uint64_t>(is, "adam state size");
  s.m_.resize(n);
  s.v_.resize(n);
  for (double& v : s.m_) v = binio::read_le<double>(is, "adam first moment");
  for (double& v : s.v_) v = binio::read_le<double>(is, "adam second moment");
  const auto nb = binio::read_le<std::uint64_t>(is, "adam block hit counts");
  s.block_t_.resize(nb);
  for (std::uint64_t& t : s.block_t_) t = binio::read_le<std::uint64_t>(is, "adam block hits");
  return s;
}

}  // namespace evsplat
