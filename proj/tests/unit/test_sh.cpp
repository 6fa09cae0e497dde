#include "evsplat/sh.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace evsplat;

namespace {

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Vec3 v(n(rng), n(rng), n(rng));
  while (v.norm() < 1e-6) v = Vec3(n(rng), n(rng), n(rng));
  return v.normalized();
}

}  // namespace

TEST_CASE("basis count follows (degree + 1)^2") {
  CHECK(sh_basis_count(0) == 1);
  CHECK(sh_basis_count(1) == 4);
  CHECK(sh_basis_count(2) == 9);
  CHECK(sh_basis_count(3) == 16);
}

// Monte Carlo orthonormality of the real basis: E[4 pi Y_i Y_j] over uniform
// sphere directions must be the identity. This pins every normalization
// constant without copying the table into the test.
TEST_CASE("basis functions are orthonormal on the sphere") {
  std::mt19937_64 rng(123);
  const int n_samples = 400000;
  double gram[16][16] = {};
  double y[16];
  for (int s = 0; s < n_samples; ++s) {
    sh_basis(3, random_unit(rng), y);
    for (int i = 0; i < 16; ++i)
      for (int j = i; j < 16; ++j) gram[i][j] += y[i] * y[j];
  }
  const double scale = 4.0 * M_PI / n_samples;
  for (int i = 0; i < 16; ++i)
    for (int j = i; j < 16; ++j) {
      const double v = gram[i][j] * scale;
      if (i == j)
        CHECK(v == doctest::Approx(1.0).epsilon(0.03));
      else
        CHECK(std::abs(v) < 0.03);
    }
}

TEST_CASE("basis gradients match central differences") {
  std::mt19937_64 rng(7);
  const double h = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 d = random_unit(rng);
    Vec3 grad[16];
    sh_basis_grad(3, d, grad);
    for (int axis = 0; axis < 3; ++axis) {
      Vec3 dp = d, dm = d;
      dp[axis] += h;
      dm[axis] -= h;
      double yp[16], ym[16];
      sh_basis(3, dp, yp);
      sh_basis(3, dm, ym);
      for (int b = 0; b < 16; ++b) {
        const double fd = (yp[b] - ym[b]) / (2.0 * h);
        CHECK(grad[b][axis] == doctest::Approx(fd).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("a dc-only expansion gives a view-independent color") {
  double block[16 * 3] = {};
  const Vec3 target(0.25, 0.5, 0.75);
  for (int c = 0; c < 3; ++c) block[c] = (target[c] - 0.5) / kShC0;
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec3 color = eval_sh(block, 16, 3, random_unit(rng));
    for (int c = 0; c < 3; ++c) CHECK(color[c] == doctest::Approx(target[c]).epsilon(1e-12));
  }
}

TEST_CASE("evaluated colors clamp at zero") {
  double block[3] = {-10.0, -10.0, -10.0};
  const Vec3 color = eval_sh(block, 1, 0, Vec3(0, 0, 1));
  CHECK(color == Vec3::Zero());
}

TEST_CASE("higher bands change the color with the view direction") {
  double block[4 * 3] = {};
  block[2 * 3 + 0] = 1.0;  // z-linear band on the red channel
  const Vec3 up = eval_sh(block, 4, 1, Vec3(0, 0, 1));
  const Vec3 down = eval_sh(block, 4, 1, Vec3(0, 0, -1));
  CHECK(up[0] != down[0]);
  CHECK(up[1] == down[1]);
}

TEST_CASE("degree argument truncates the expansion") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  double block[16 * 3];
  for (double& v : block) v = u(rng);
  const Vec3 dir = random_unit(rng);
  double y[16];
  sh_basis(2, dir, y);
  Vec3 expect = Vec3::Zero();
  for (int b = 0; b < 9; ++b)
    for (int c = 0; c < 3; ++c) expect[c] += y[b] * block[b * 3 + c];
  for (int c = 0; c < 3; ++c) expect[c] = std::max(0.0, expect[c] + 0.5);
  const Vec3 got = eval_sh(block, 16, 2, dir);
  CHECK((got - expect).norm() < 1e-12);
}

TEST_CASE("near-zero view directions fall back to +z") {
  double block[4 * 3] = {};
  block[2 * 3 + 1] = 0.7;
  const Vec3 at_z = eval_sh(block, 4, 1, Vec3(0, 0, 1));
  const Vec3 fallback = eval_sh(block, 4, 1, Vec3(0, 0, 0));
  CHECK((at_z - fallback).norm() == 0.0);
}

TEST_CASE("unnormalized view directions are normalized before evaluation") {
  double block[4 * 3] = {};
  block[1 * 3 + 0] = 0.4;
  block[3 * 3 + 2] = -0.2;
  const Vec3 dir(0.3, -0.8, 0.5);
  const Vec3 a = eval_sh(block, 4, 1, dir);
  const Vec3 b = eval_sh(block, 4, 1, 25.0 * dir);
  CHECK((a - b).norm() < 1e-12);
}
