#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "tlrm/common.hpp"
#include "tlrm/rng.hpp"

namespace tlrm::balls {

using Eigen::MatrixXd;
using Eigen::Vector2d;

struct BallWorld {
    int n_balls = 3;
    double radius = 1.2;
    double box_size = 10.0;
    double speed = 0.5;  // constant per-ball speed, world units per step
    double dt = 1.0;
    int max_init_attempts = 1000;
};

struct BallState {
    std::vector<Vector2d> positions;
    std::vector<Vector2d> velocities;
};

void validate_world(const BallWorld& world);

// Elastic equal-mass dynamics: specular wall reflection, velocity exchange
// along the contact normal for ball pairs. Speeds are conserved.
std::vector<BallState> simulate_balls(const BallWorld& world, std::size_t T, Rng& rng);

// One step from a given state (tests drive specific geometries through this).
BallState step_balls(const BallWorld& world, const BallState& state);

// Smooth disk coverage: 1 inside radius - half_pixel, 0 outside
// radius + half_pixel, linear ramp between; summed over balls and clamped.
MatrixXd rasterize(const BallWorld& world, const BallState& state, int res);

// Mean over t of the mean squared pixel difference between consecutive
// frames: the zeroth-order (previous frame) prediction error.
double order0_mse(const std::vector<MatrixXd>& frames);

double kinetic_energy(const BallState& state);

}  // namespace tlrm::balls
