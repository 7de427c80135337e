#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "tlrm/common.hpp"
#include "tlrm/ppc_world.hpp"
#include "tlrm/rng.hpp"

namespace tlrm::kalman {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

// Gaussian surrogate for one spike frame: the population's likelihood over
// position has mean com_decode(counts) and variance sigma_tc^2 / sum(counts).
// A frame with no spikes carries no information (valid = false).
struct PseudoObs {
    double value = 0.0;
    double variance = 0.0;
    bool valid = false;
};

// Linear-Gaussian state-space model with a fixed scalar emission row; the
// observation noise is supplied per step by the data, not learned.
struct LgdsParams {
    int d = 1;
    MatrixXd A;
    MatrixXd Q;
    RowVectorXd C;  // fixed: [1] (d=1) or [1 0] (d=2)
    VectorXd mu0;
    MatrixXd S0;
};

struct Belief {
    VectorXd mean;
    MatrixXd cov;
};

PseudoObs to_pseudo_obs(const ppc::PopulationCode& code, const VectorXd& counts);
std::vector<PseudoObs> to_pseudo_obs_sequence(const ppc::PopulationCode& code,
                                              const MatrixXd& counts);

Belief kf_predict(const LgdsParams& params, const Belief& belief);
// Scalar-observation update with time-varying noise R = obs.variance;
// invalid observations leave the belief unchanged.
Belief kf_update(const LgdsParams& params, const Belief& belief, const PseudoObs& obs);

struct FilterResult {
    std::vector<Belief> predicted;  // prior at t, before the update
    std::vector<Belief> filtered;   // posterior at t
    double loglik = 0.0;            // innovations form over valid observations
};

FilterResult kf_filter(const LgdsParams& params, const std::vector<PseudoObs>& obs);

struct SmoothResult {
    std::vector<Belief> smoothed;
    // cross[t] = Cov(x_{t+1}, x_t | all observations), t = 0..T-2
    std::vector<MatrixXd> cross;
};

SmoothResult rts_smooth(const LgdsParams& params, const FilterResult& fr);

LgdsParams em_init(int d, double dt, Rng& rng);

struct EmOptions {
    int iters = 50;
    double jitter = 1e-9;
    double plateau_tol = 1e-6;
    double dt = 0.05;  // seeds the d=2 position-velocity coupling
};

LgdsParams em_fit(const std::vector<std::vector<PseudoObs>>& sequences, int d,
                  const EmOptions& opt, Rng& rng, std::vector<double>* loglik_trace = nullptr);

// Filter each sequence and score C * mean against the true positions,
// averaged over every step of every sequence.
double kf_position_mse(const LgdsParams& params,
                       const std::vector<std::vector<PseudoObs>>& obs_sequences,
                       const std::vector<VectorXd>& true_positions);

// Draw a latent/observation run from the model itself (oracle fixtures).
struct SimulatedLgds {
    MatrixXd states;  // T x d
    std::vector<PseudoObs> obs;
};
SimulatedLgds simulate_lgds(const LgdsParams& params, std::size_t T, double obs_variance,
                            Rng& rng);

}  // namespace tlrm::kalman
