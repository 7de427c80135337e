#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "tlrm/adam.hpp"
#include "tlrm/common.hpp"
#include "tlrm/ppc_world.hpp"
#include "tlrm/rng.hpp"
#include "tlrm/tape.hpp"

namespace tlrm::rvae {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class EmissionKind { gaussian, poisson };
enum class Variant { rvae, tvae };

// Recognition-posterior cumulants carried between steps; the recurrent state.
struct SuffStats {
    VectorXd mu;
    VectorXd var;  // >= var_floor elementwise

    VectorXd concat() const;
    static SuffStats prior(std::size_t d);  // (0, 1): the latent prior's cumulants
};

struct RvaeConfig {
    std::size_t obs_dim = 0;
    std::size_t d = 10;           // latent dimension
    std::size_t enc_hidden = 64;  // width of encoder layers
    std::size_t dec_hidden = 64;
    EmissionKind emission = EmissionKind::gaussian;
    Variant variant = Variant::rvae;
    bool bounded_emission = false;  // sigmoid on the Gaussian mean head (pixel data)
    double var_floor = 1e-6;
};

// Encoder: two fully-connected ReLU layers over the observation, concat with
// the raw previous suffstats, one more ReLU layer, then linear mean and
// log-variance heads (diagonal posterior). Decoder: two ReLU layers from z,
// then an emission head and a reverse-transition head producing the 2d
// suffstats estimate. Emission and transition variances are learned scalars
// in log space.
struct RvaeParams {
    RvaeConfig cfg;

    diff::Tensor enc_w1, enc_b1;
    diff::Tensor enc_w2, enc_b2;
    diff::Tensor enc_wc, enc_bc;
    diff::Tensor enc_wmu, enc_bmu;
    diff::Tensor enc_wlv, enc_blv;
    diff::Tensor dec_w1, dec_b1;
    diff::Tensor dec_w2, dec_b2;
    diff::Tensor dec_we, dec_be;
    diff::Tensor dec_wt, dec_bt;
    diff::Tensor log_sigma2_emiss;
    diff::Tensor log_sigma2_trans;

    std::vector<std::pair<std::string, diff::Tensor*>> named_params();
    std::vector<std::pair<std::string, const diff::Tensor*>> named_params() const;
};

RvaeParams make_rvae(const RvaeConfig& cfg, Rng& rng);

struct Encoded {
    VectorXd mu;
    VectorXd sigma;  // floored at sqrt(var_floor)
};
Encoded encode(const RvaeParams& params, const VectorXd& s_prev, const VectorXd& x);

struct Decoded {
    VectorXd emission;  // Gaussian mean or Poisson rates
    VectorXd mu_trans;  // 2d reverse-transition mean
};
Decoded decode(const RvaeParams& params, const VectorXd& z);

struct FreeEnergyTerms {
    double recog_entropy_term = 0.0;
    double prior_term = 0.0;
    double trans_term = 0.0;  // zero under TVAE (term absent)
    double emiss_term = 0.0;
    double total = 0.0;
};

// Tape-level graph; node handles exposed so callers can differentiate or
// inspect individual terms.
struct FreeEnergyNodes {
    diff::NodeId mu = -1;
    diff::NodeId sigma = -1;
    diff::NodeId z = -1;
    diff::NodeId recog = -1;
    diff::NodeId prior = -1;
    diff::NodeId trans = -1;  // -1 under TVAE
    diff::NodeId emiss = -1;
    diff::NodeId total = -1;
};

// Records the single-sample free energy over existing tape nodes; param
// leaves must follow named_params() order.
FreeEnergyNodes record_free_energy(diff::Tape& tape, const RvaeParams& params,
                                   const std::vector<diff::NodeId>& param_leaves,
                                   diff::NodeId s_prev_node, diff::NodeId x_node,
                                   const VectorXd& eps);

FreeEnergyTerms free_energy(const RvaeParams& params, const VectorXd& s_prev, const VectorXd& x,
                            const VectorXd& eps);

struct StepResult {
    SuffStats suffstats;  // pre-update encode cumulants, detached
    FreeEnergyTerms terms;
};

// One temporally-local update: single eps draw, AdaM on all parameters.
// Only (s_prev, x_t) enter; the returned suffstats are detached, so no
// gradient crosses step boundaries.
StepResult train_step(RvaeParams& params, diff::AdamState& opt, const SuffStats& s_prev,
                      const VectorXd& x_t, const diff::AdamConfig& adam_cfg, Rng& rng);

// s_0 = prior cumulants; iterates encode (train=false) or train_step.
std::vector<SuffStats> run_sequence(RvaeParams& params, diff::AdamState* opt,
                                    const std::vector<VectorXd>& observations, bool train,
                                    const diff::AdamConfig& adam_cfg, Rng& rng,
                                    std::vector<double>* loss_trace = nullptr);

// Decode positions from a trained Poisson-emission model: posterior-mean z,
// emission rates, center-of-mass estimate against the true positions.
double ppc_eval(RvaeParams& params, const std::vector<MatrixXd>& spike_sequences,
                const ppc::PopulationCode& code, const std::vector<VectorXd>& true_positions);

// Backward-in-time generation through the reverse-transition head.
// Element 0 of the result is the last time step (reverse order).
std::vector<VectorXd> generate_backward(const RvaeParams& params, std::size_t T, Rng& rng);

}  // namespace tlrm::rvae
