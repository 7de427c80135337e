#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "tlrm/common.hpp"
#include "tlrm/rng.hpp"

namespace tlrm::ppc {

using Eigen::Matrix2d;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

// Noise-driven underdamped second-order latent dynamics, discretized exactly.
// State is (position, velocity); one step advances continuous time by dt.
struct OscillatorModel {
    double omega = 0.0;  // natural frequency (rad per time unit)
    double zeta = 0.0;   // damping ratio, 0 < zeta < 1
    double dt = 0.0;
    double q = 0.0;      // white-noise intensity driving the velocity
    Matrix2d A2 = Matrix2d::Zero();
    Matrix2d Q2 = Matrix2d::Zero();
};

OscillatorModel build_oscillator(double omega, double zeta, double dt, double q);

// Solves S = A S A' + Q for the stationary state covariance.
Matrix2d stationary_covariance(const Matrix2d& A, const Matrix2d& Q);

// Noise intensity that yields the requested stationary position std.
double q_for_position_std(double omega, double zeta, double dt, double target_std);

struct Trajectory {
    MatrixXd states;  // T x 2: (position, velocity)
};

// x0 drawn from the stationary distribution.
Trajectory simulate_latent(const OscillatorModel& model, std::size_t T, Rng& rng);
// Forced initial state (impulse-response style runs).
Trajectory simulate_latent_from(const OscillatorModel& model, std::size_t T, const Vector2d& x0,
                                Rng& rng);

// Gaussian tuning curves uniformly tiling an interval; each curve is the mean
// of an independent Poisson spike count per frame.
struct PopulationCode {
    VectorXd preferred;  // strictly increasing, uniform spacing
    double sigma_tc = 0.0;
    double gain = 0.0;
};

// sigma_tc <= 0 means "use the center spacing".
PopulationCode make_population(int n_neurons, double lo, double hi, double sigma_tc, double gain);

VectorXd tuning_rates(const PopulationCode& code, double position);
VectorXd emit_spikes(const VectorXd& rates, Rng& rng);

// Spike-weighted mean of preferred angles. All-zero input is an error; the
// caller decides the fallback.
double com_decode(const PopulationCode& code, const VectorXd& counts);
// Same estimator on nonnegative real activations (e.g. decoded rates).
double com_decode_real(const PopulationCode& code, const VectorXd& values);

// One latent trajectory plus its spike report.
struct PpcSequence {
    MatrixXd states;  // T x 2
    MatrixXd counts;  // T x n_neurons, integer-valued
};

PpcSequence generate_sequence(const OscillatorModel& model, const PopulationCode& code,
                              std::size_t T, Rng& latent_rng, Rng& spike_rng);

}  // namespace tlrm::ppc
