#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "tlrm/common.hpp"
#include "tlrm/rng.hpp"

namespace tlrm::efh {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class UnitKind { poisson, real_bernoulli };
enum class Role { observation, prev_suffstats };

struct VisBlock {
    std::size_t size = 0;
    UnitKind kind = UnitKind::real_bernoulli;
    Role role = Role::observation;
};

// Two-layer energy model with Bernoulli hiddens and a partitioned visible
// layer: an observation block plus one block holding the previous step's
// hidden means. Variants differ only in how that block is treated during
// the negative phase:
//   rEFH  — reconstructed like any other visible (the block is modeled)
//   TRBM  — clamped to the data (pure conditioning)
//   RTRBM — TRBM plus gradients backpropagated through the hidden recursion
enum class Variant { trbm, refh, rtrbm };

struct EfhParams {
    MatrixXd W;      // H x V
    VectorXd b_vis;  // V
    VectorXd b_hid;  // H
    std::vector<VisBlock> layout;
    double natural_clamp = 30.0;  // cap on the Poisson natural parameter

    std::size_t hidden() const { return static_cast<std::size_t>(W.rows()); }
    std::size_t visible() const { return static_cast<std::size_t>(W.cols()); }
    std::size_t block_offset(std::size_t b) const;
    std::size_t obs_size() const;
    std::size_t prev_offset() const;  // offset of the prev-suffstats block
};

void validate_layout(const EfhParams& params);

// Observation block of the given kind plus a prev-suffstats block of size
// `hidden` (hidden means feed back as modeled visibles).
EfhParams make_efh(std::size_t obs_dim, UnitKind obs_kind, std::size_t hidden, Rng& rng,
                   double init_std = 1e-2);

// Data-dependent visible bias init: log-rate for Poisson blocks, logit-mean
// for Bernoulli blocks.
void init_visible_bias(EfhParams& params, const VectorXd& obs_mean);

VectorXd hidden_means(const EfhParams& params, const VectorXd& visible);
VectorXd sample_hidden(const EfhParams& params, const VectorXd& visible, Rng& rng);
// Blockwise conditional means; Poisson natural parameters above the clamp are
// capped and counted in *clamp_warnings.
VectorXd visible_means(const EfhParams& params, const VectorXd& hidden,
                       long* clamp_warnings = nullptr);
VectorXd sample_visible(const EfhParams& params, const VectorXd& hidden, Rng& rng,
                        long* clamp_warnings = nullptr);

struct EfhHyper {
    Variant variant = Variant::refh;
    int cd_k = 1;
    double lr = 1e-3;
    double momentum = 0.9;
    int epochs = 10;
    int bptt_horizon = 16;   // RTRBM window; 0 disables the recurrent term
    int predict_sweeps = 25;
};

// Momentum buffers plus running counters, persisted across steps.
struct CdState {
    MatrixXd vel_W;
    VectorXd vel_b_vis;
    VectorXd vel_b_hid;
    long clamp_warnings = 0;
    double recon_error_acc = 0.0;  // obs-block squared reconstruction error
    std::size_t steps = 0;

    static CdState for_params(const EfhParams& params);
};

struct CdGrad {
    MatrixXd dW;
    VectorXd db_vis;
    VectorXd db_hid;
    VectorXd hid_data;   // positive-phase hidden means
    VectorXd hid_recon;  // negative-phase hidden means
    double obs_recon_error = 0.0;
};

// CD-k gradient estimate for one batch of visible vectors. Blocks whose role
// appears in clamp_roles stay fixed through the negative alternations.
CdGrad cd_gradient(const EfhParams& params, const std::vector<VectorXd>& batch, int k,
                   const std::vector<Role>& clamp_roles, Rng& rng, long* clamp_warnings);

void apply_update(EfhParams& params, CdState& state, const CdGrad& grad, double lr,
                  double momentum);

// One momentum CD step on a batch.
void cd_step(EfhParams& params, CdState& state, const std::vector<VectorXd>& batch, int k,
             double lr, double momentum, const std::vector<Role>& clamp_roles, Rng& rng);

// One full pass over a trajectory with per-step updates. The visible vector
// at step t is [obs_t ; zbar_{t-1}] with zbar computed from the previous
// step's visibles under the parameters current at step t. Returns zbar_1..T.
std::vector<VectorXd> train_sequence(EfhParams& params, CdState& state, Variant variant,
                                     const std::vector<VectorXd>& obs_seq, const EfhHyper& hyper,
                                     Rng& rng);

// Gradient of sum_t g_t . h_{t-1} through the recursion
// h_t = sigmoid(W [obs_t ; h_{t-1}] + b_hid), boundary h held constant.
struct RecurrentTerm {
    double value = 0.0;
    MatrixXd dW;
    VectorXd db_hid;
};
RecurrentTerm recurrent_term_gradient(const EfhParams& params,
                                      const std::vector<VectorXd>& obs_window,
                                      const VectorXd& boundary,
                                      const std::vector<VectorXd>& g);

// RTRBM pass over one trajectory: truncated-window updates combining the
// per-step clamped CD gradients with the recurrent term above.
void train_rtrbm_sequence(EfhParams& params, CdState& state,
                          const std::vector<VectorXd>& obs_seq, const EfhHyper& hyper, Rng& rng);

// Fixed-parameter recursion used at evaluation time.
std::vector<VectorXd> eval_suffstats(const EfhParams& params,
                                     const std::vector<VectorXd>& obs_seq);

// Clamped-Gibbs next-observation prediction: the prev-suffstats block stays
// fixed at zbar, the observation block starts at init_obs, and the final
// output is the noiseless observation mean under the last hidden sample.
VectorXd predict_next(const EfhParams& params, const VectorXd& zbar, const VectorXd& init_obs,
                      int sweeps, Rng& rng);

// Decoded observation means given suffstats (PPC decode path).
VectorXd decode_observation(const EfhParams& params, const VectorXd& zbar,
                            long* clamp_warnings = nullptr);

}  // namespace tlrm::efh
