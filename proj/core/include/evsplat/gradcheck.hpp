#pragma once

#include "evsplat/rasterizer.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace evsplat {

// Central-difference verification of render_backward on seeded random
// scenes. The scalar objective is a fixed random weighting of the log image;
// pixels whose compositing terms sit near a threshold (footprint edge, alpha
// clamps, log floor) are excluded up front so the objective stays smooth
// under the probe step.
struct GradCheckOptions {
  int n_scenes = 3;
  std::uint64_t seed = 42;
  double step = 1e-4;       // central-difference half-step
  double tolerance = 1e-3;  // max allowed relative error
  int width = 24;
  int height = 18;
  std::size_t n_gaussians = 10;
  int sh_degree = 3;
};

struct GradCheckFailure {
  std::string parameter;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  std::size_t n_checked = 0;
  double max_rel_error = 0.0;
  std::string worst_parameter;
  std::vector<GradCheckFailure> failures;
  bool passed() const { return failures.empty(); }
};

// relative error metric used throughout: |a - f| / max(floor, |a|, |f|)
double gradcheck_rel_error(double analytic, double numeric, double floor = 1e-4);

GradCheckReport run_gradient_check(const GradCheckOptions& options = {});

}  // namespace evsplat
