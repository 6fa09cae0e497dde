#pragma once

#include "evsplat/types.hpp"

namespace evsplat {

inline constexpr int kMaxShDegree = 3;
inline constexpr int kMaxShBasis = 16;

// degree-0 basis constant; a dc coefficient of (target - 0.5) / kShC0 yields
// a view-independent color of `target`
inline constexpr double kShC0 = 0.28209479177387814;

constexpr int sh_basis_count(int degree) { return (degree + 1) * (degree + 1); }

// real SH basis values for a unit direction, low-order-first; out must hold
// sh_basis_count(degree) entries
void sh_basis(int degree, const Vec3& unit_dir, double* out);

// per-basis gradient wrt the unit direction
void sh_basis_grad(int degree, const Vec3& unit_dir, Vec3* out);

// View-dependent color: sum_b basis_b(dir) * block[b*3+c] + 0.5, clamped to
// be non-negative. view_dir need not be unit length; a near-zero direction
// falls back to +z. Requires sh_basis_count(degree) <= basis_count (the block
// holds basis_count coefficient triples).
Vec3 eval_sh(const double* sh_block, int basis_count, int degree, const Vec3& view_dir);

}  // namespace evsplat
