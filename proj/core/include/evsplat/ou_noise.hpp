#pragma once

#include "evsplat/pose_track.hpp"

#include <random>

namespace evsplat {

// Euler-Maruyama path of an Ornstein-Uhlenbeck process sampled at the given
// times: x' = x - theta * x * dt + sigma * sqrt(dt) * N(0,1), dt in seconds.
// The initial state is drawn from the stationary distribution
// N(0, sigma^2 / (2 theta)), so the whole path is zero-mean and stationary.
// sigma == 0 yields the all-zero path.
std::vector<double> ou_path(const std::vector<std::uint64_t>& times_us, double theta,
                            double sigma, std::mt19937_64& rng);

// Perturbs each pose by a time-correlated random motion: six OU channels
// (rotation xyz in radians, then translation xyz), rotation applied as
// R <- exp(hat(w)) * R, translation additive. sigma_* are the OU diffusion
// coefficients; stationary standard deviation is sigma / sqrt(2 theta).
PoseTrack perturb_poses(const PoseTrack& track, double sigma_rot, double sigma_trans,
                        double theta, std::mt19937_64& rng);

}  // namespace evsplat
