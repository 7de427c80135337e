#include "tlrm/harmonium.hpp"

#include <algorithm>
#include <cmath>

#include "tlrm/tape.hpp"

namespace tlrm::efh {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

bool role_clamped(Role role, const std::vector<Role>& clamp_roles) {
    return std::find(clamp_roles.begin(), clamp_roles.end(), role) != clamp_roles.end();
}

}  // namespace

std::size_t EfhParams::block_offset(std::size_t b) const {
    std::size_t off = 0;
    for (std::size_t i = 0; i < b; ++i) off += layout[i].size;
    return off;
}

std::size_t EfhParams::obs_size() const {
    std::size_t n = 0;
    for (const VisBlock& blk : layout)
        if (blk.role == Role::observation) n += blk.size;
    return n;
}

std::size_t EfhParams::prev_offset() const {
    std::size_t off = 0;
    for (const VisBlock& blk : layout) {
        if (blk.role == Role::prev_suffstats) return off;
        off += blk.size;
    }
    throw ContractError("harmonium: layout has no prev-suffstats block");
}

void validate_layout(const EfhParams& params) {
    std::size_t total = 0;
    std::size_t prev_blocks = 0;
    std::size_t prev_size = 0;
    for (const VisBlock& blk : params.layout) {
        total += blk.size;
        if (blk.role == Role::prev_suffstats) {
            ++prev_blocks;
            prev_size = blk.size;
        }
    }
    if (total != params.visible())
        throw ShapeError("harmonium: layout sizes do not sum to the visible count");
    if (prev_blocks != 1 || prev_size != params.hidden())
        throw ShapeError("harmonium: exactly one prev-suffstats block of size H required");
}

EfhParams make_efh(std::size_t obs_dim, UnitKind obs_kind, std::size_t hidden, Rng& rng,
                   double init_std) {
    EfhParams p;
    const std::size_t V = obs_dim + hidden;
    p.W.resize(static_cast<Eigen::Index>(hidden), static_cast<Eigen::Index>(V));
    for (Eigen::Index i = 0; i < p.W.rows(); ++i)
        for (Eigen::Index j = 0; j < p.W.cols(); ++j) p.W(i, j) = init_std * rng.normal();
    p.b_vis = VectorXd::Zero(static_cast<Eigen::Index>(V));
    p.b_hid = VectorXd::Zero(static_cast<Eigen::Index>(hidden));
    p.layout = {{obs_dim, obs_kind, Role::observation},
                {hidden, UnitKind::real_bernoulli, Role::prev_suffstats}};
    validate_layout(p);
    return p;
}

void init_visible_bias(EfhParams& params, const VectorXd& obs_mean) {
    std::size_t off = 0;
    for (const VisBlock& blk : params.layout) {
        if (blk.role == Role::observation) {
            if (obs_mean.size() != static_cast<Eigen::Index>(blk.size))
                throw ShapeError("init_visible_bias: mean length mismatch");
            for (std::size_t i = 0; i < blk.size; ++i) {
                const double m = obs_mean(static_cast<Eigen::Index>(i));
                if (blk.kind == UnitKind::poisson)
                    params.b_vis(static_cast<Eigen::Index>(off + i)) = std::log(std::max(m, 1e-2));
                else {
                    const double p = std::clamp(m, 1e-3, 1.0 - 1e-3);
                    params.b_vis(static_cast<Eigen::Index>(off + i)) = std::log(p / (1.0 - p));
                }
            }
        }
        off += blk.size;
    }
}

VectorXd hidden_means(const EfhParams& params, const VectorXd& visible) {
    if (visible.size() != static_cast<Eigen::Index>(params.visible()))
        throw ShapeError("hidden_means: visible length mismatch");
    VectorXd act = params.W * visible + params.b_hid;
    for (Eigen::Index i = 0; i < act.size(); ++i) act(i) = sigmoid(act(i));
    return act;
}

VectorXd sample_hidden(const EfhParams& params, const VectorXd& visible, Rng& rng) {
    VectorXd p = hidden_means(params, visible);
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = rng.bernoulli(p(i)) ? 1.0 : 0.0;
    return p;
}

VectorXd visible_means(const EfhParams& params, const VectorXd& hidden, long* clamp_warnings) {
    if (hidden.size() != static_cast<Eigen::Index>(params.hidden()))
        throw ShapeError("visible_means: hidden length mismatch");
    VectorXd nat = params.W.transpose() * hidden + params.b_vis;
    VectorXd out(nat.size());
    std::size_t off = 0;
    for (const VisBlock& blk : params.layout) {
        for (std::size_t i = 0; i < blk.size; ++i) {
            const auto idx = static_cast<Eigen::Index>(off + i);
            if (blk.kind == UnitKind::poisson) {
                double eta = nat(idx);
                if (eta > params.natural_clamp) {
                    eta = params.natural_clamp;
                    if (clamp_warnings) ++(*clamp_warnings);
                }
                out(idx) = std::exp(eta);
            } else {
                out(idx) = sigmoid(nat(idx));
            }
        }
        off += blk.size;
    }
    return out;
}

VectorXd sample_visible(const EfhParams& params, const VectorXd& hidden, Rng& rng,
                        long* clamp_warnings) {
    VectorXd mean = visible_means(params, hidden, clamp_warnings);
    std::size_t off = 0;
    for (const VisBlock& blk : params.layout) {
        for (std::size_t i = 0; i < blk.size; ++i) {
            const auto idx = static_cast<Eigen::Index>(off + i);
            if (blk.kind == UnitKind::poisson)
                mean(idx) = static_cast<double>(rng.poisson(mean(idx)));
            else
                mean(idx) = rng.bernoulli(mean(idx)) ? 1.0 : 0.0;
        }
        off += blk.size;
    }
    return mean;
}

CdState CdState::for_params(const EfhParams& params) {
    CdState st;
    st.vel_W = MatrixXd::Zero(params.W.rows(), params.W.cols());
    st.vel_b_vis = VectorXd::Zero(params.b_vis.size());
    st.vel_b_hid = VectorXd::Zero(params.b_hid.size());
    return st;
}

CdGrad cd_gradient(const EfhParams& params, const std::vector<VectorXd>& batch, int k,
                   const std::vector<Role>& clamp_roles, Rng& rng, long* clamp_warnings) {
    if (k < 1) throw DomainError("cd_gradient: k must be >= 1");
    if (batch.empty()) throw DomainError("cd_gradient: empty batch");

    CdGrad g;
    g.dW = MatrixXd::Zero(params.W.rows(), params.W.cols());
    g.db_vis = VectorXd::Zero(params.b_vis.size());
    g.db_hid = VectorXd::Zero(params.b_hid.size());
    g.hid_data = VectorXd::Zero(params.b_hid.size());
    g.hid_recon = VectorXd::Zero(params.b_hid.size());

    for (const VectorXd& v_data : batch) {
        const VectorXd p_data = hidden_means(params, v_data);

        // Negative chain: sampled hiddens, blockwise visible reconstruction.
        VectorXd h = p_data;
        for (Eigen::Index i = 0; i < h.size(); ++i) h(i) = rng.bernoulli(h(i)) ? 1.0 : 0.0;
        VectorXd v_recon = v_data;
        for (int step = 0; step < k; ++step) {
            VectorXd mean = visible_means(params, h, clamp_warnings);
            std::size_t off = 0;
            for (const VisBlock& blk : params.layout) {
                const bool clamped = role_clamped(blk.role, clamp_roles);
                for (std::size_t i = 0; i < blk.size; ++i) {
                    const auto idx = static_cast<Eigen::Index>(off + i);
                    if (clamped) {
                        v_recon(idx) = v_data(idx);
                    } else if (blk.role == Role::prev_suffstats) {
                        // carried statistics reconstruct through their means
                        v_recon(idx) = mean(idx);
                    } else if (blk.kind == UnitKind::poisson) {
                        v_recon(idx) = static_cast<double>(rng.poisson(mean(idx)));
                    } else {
                        v_recon(idx) = rng.bernoulli(mean(idx)) ? 1.0 : 0.0;
                    }
                }
                off += blk.size;
            }
            if (step + 1 < k) {
                h = hidden_means(params, v_recon);
                for (Eigen::Index i = 0; i < h.size(); ++i)
                    h(i) = rng.bernoulli(h(i)) ? 1.0 : 0.0;
            }
        }
        const VectorXd p_recon = hidden_means(params, v_recon);

        g.dW.noalias() += p_data * v_data.transpose() - p_recon * v_recon.transpose();
        g.db_vis += v_data - v_recon;
        g.db_hid += p_data - p_recon;
        g.hid_data += p_data;
        g.hid_recon += p_recon;

        const std::size_t obs_n = params.obs_size();
        const VectorXd recon_mean = visible_means(params, p_recon, nullptr);
        for (std::size_t i = 0; i < obs_n; ++i) {
            const double d = v_data(static_cast<Eigen::Index>(i)) -
                             recon_mean(static_cast<Eigen::Index>(i));
            g.obs_recon_error += d * d;
        }
    }

    const double inv = 1.0 / static_cast<double>(batch.size());
    g.dW *= inv;
    g.db_vis *= inv;
    g.db_hid *= inv;
    g.hid_data *= inv;
    g.hid_recon *= inv;
    g.obs_recon_error *= inv;
    return g;
}

void apply_update(EfhParams& params, CdState& state, const CdGrad& grad, double lr,
                  double momentum) {
    state.vel_W = momentum * state.vel_W + lr * grad.dW;
    state.vel_b_vis = momentum * state.vel_b_vis + lr * grad.db_vis;
    state.vel_b_hid = momentum * state.vel_b_hid + lr * grad.db_hid;
    params.W += state.vel_W;
    params.b_vis += state.vel_b_vis;
    params.b_hid += state.vel_b_hid;
    state.recon_error_acc += grad.obs_recon_error;
    state.steps += 1;
}

void cd_step(EfhParams& params, CdState& state, const std::vector<VectorXd>& batch, int k,
             double lr, double momentum, const std::vector<Role>& clamp_roles, Rng& rng) {
    CdGrad g = cd_gradient(params, batch, k, clamp_roles, rng, &state.clamp_warnings);
    apply_update(params, state, g, lr, momentum);
}

namespace {

VectorXd initial_suffstats(const EfhParams& params) {
    VectorXd z(params.b_hid.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = sigmoid(params.b_hid(i));
    return z;
}

VectorXd compose_visible(const EfhParams& params, const VectorXd& obs, const VectorXd& zbar) {
    if (obs.size() != static_cast<Eigen::Index>(params.obs_size()))
        throw ShapeError("harmonium: observation length mismatch");
    VectorXd v(static_cast<Eigen::Index>(params.visible()));
    const auto prev_off = static_cast<Eigen::Index>(params.prev_offset());
    v.segment(0, obs.size()) = obs;  // obs block first in the standard layout
    v.segment(prev_off, zbar.size()) = zbar;
    return v;
}

}  // namespace

std::vector<VectorXd> train_sequence(EfhParams& params, CdState& state, Variant variant,
                                     const std::vector<VectorXd>& obs_seq, const EfhHyper& hyper,
                                     Rng& rng) {
    if (obs_seq.empty()) throw DomainError("train_sequence: empty sequence");
    const std::vector<Role> clamp_roles =
        variant == Variant::refh ? std::vector<Role>{} : std::vector<Role>{Role::prev_suffstats};

    std::vector<VectorXd> suffstats;
    suffstats.reserve(obs_seq.size());

    VectorXd v_prev;  // visible vector consumed at the previous step
    for (std::size_t t = 0; t < obs_seq.size(); ++t) {
        // zbar_{t-1} under the parameters current at step t
        const VectorXd zbar =
            t == 0 ? initial_suffstats(params) : hidden_means(params, v_prev);
        if (t > 0) suffstats.push_back(zbar);

        const VectorXd v_t = compose_visible(params, obs_seq[t], zbar);
        cd_step(params, state, {v_t}, hyper.cd_k, hyper.lr, hyper.momentum, clamp_roles, rng);
        v_prev = v_t;
    }
    suffstats.push_back(hidden_means(params, v_prev));  // zbar_T, final parameters
    return suffstats;
}

RecurrentTerm recurrent_term_gradient(const EfhParams& params,
                                      const std::vector<VectorXd>& obs_window,
                                      const VectorXd& boundary,
                                      const std::vector<VectorXd>& g) {
    if (obs_window.size() != g.size())
        throw ShapeError("recurrent_term_gradient: window/coefficient length mismatch");
    diff::Tape tape;
    const diff::NodeId W = tape.leaf(diff::Tensor::from_matrix(params.W));
    const diff::NodeId b = tape.leaf(diff::Tensor::from_vector(params.b_hid));

    diff::NodeId h_prev = tape.constant(diff::Tensor::from_vector(boundary));
    diff::NodeId loss = tape.constant(diff::Tensor::scalar(0.0));
    for (std::size_t t = 0; t < obs_window.size(); ++t) {
        const diff::NodeId gt = tape.constant(diff::Tensor::from_vector(g[t]));
        loss = tape.add(loss, tape.sum(tape.mul(gt, h_prev)));
        const diff::NodeId cat =
            tape.concat({tape.constant(diff::Tensor::from_vector(obs_window[t])), h_prev});
        h_prev = tape.sigmoid(tape.affine(W, cat, b));
    }
    auto grads = tape.gradient(loss);
    RecurrentTerm out;
    out.value = tape.value(loss)[0];
    out.dW = grads.at(W).to_matrix();
    out.db_hid = grads.at(b).to_vector();
    return out;
}

void train_rtrbm_sequence(EfhParams& params, CdState& state,
                          const std::vector<VectorXd>& obs_seq, const EfhHyper& hyper, Rng& rng) {
    if (obs_seq.empty()) throw DomainError("train_rtrbm_sequence: empty sequence");
    const std::vector<Role> clamp{Role::prev_suffstats};
    const std::size_t window = static_cast<std::size_t>(std::max(1, hyper.bptt_horizon));

    VectorXd v_prev;
    bool have_prev = false;
    std::size_t t0 = 0;
    while (t0 < obs_seq.size()) {
        const std::size_t t1 = std::min(t0 + window, obs_seq.size());
        const std::size_t len = t1 - t0;

        // boundary suffstats under current parameters
        const VectorXd boundary =
            have_prev ? hidden_means(params, v_prev) : initial_suffstats(params);

        // forward the recursion across the window with fixed parameters
        std::vector<VectorXd> zbars(len);
        std::vector<VectorXd> visibles(len);
        zbars[0] = boundary;
        for (std::size_t i = 0; i < len; ++i) {
            visibles[i] = compose_visible(params, obs_seq[t0 + i], zbars[i]);
            if (i + 1 < len) zbars[i + 1] = hidden_means(params, visibles[i]);
        }

        // per-step clamped CD gradients plus recurrent-term coefficients
        CdGrad acc;
        acc.dW = MatrixXd::Zero(params.W.rows(), params.W.cols());
        acc.db_vis = VectorXd::Zero(params.b_vis.size());
        acc.db_hid = VectorXd::Zero(params.b_hid.size());
        std::vector<VectorXd> g_coeff(len);
        const auto prev_off = static_cast<Eigen::Index>(params.prev_offset());
        const auto H = static_cast<Eigen::Index>(params.hidden());
        for (std::size_t i = 0; i < len; ++i) {
            CdGrad g = cd_gradient(params, {visibles[i]}, hyper.cd_k, clamp, rng,
                                   &state.clamp_warnings);
            acc.dW += g.dW;
            acc.db_vis += g.db_vis;
            acc.db_hid += g.db_hid;
            acc.obs_recon_error += g.obs_recon_error;
            // d(-log p_t)/d zbar_{t-1}, CD estimate
            g_coeff[i] =
                params.W.middleCols(prev_off, H).transpose() * (g.hid_recon - g.hid_data);
        }

        if (hyper.bptt_horizon > 0 && len > 0) {
            std::vector<VectorXd> window_obs(obs_seq.begin() + static_cast<long>(t0),
                                             obs_seq.begin() + static_cast<long>(t1));
            RecurrentTerm rec = recurrent_term_gradient(params, window_obs, boundary, g_coeff);
            // descend the recurrent term alongside the CD ascent direction
            acc.dW -= rec.dW;
            acc.db_hid -= rec.db_hid;
        }

        const double inv = 1.0 / static_cast<double>(len);
        acc.dW *= inv;
        acc.db_vis *= inv;
        acc.db_hid *= inv;
        acc.obs_recon_error *= inv;
        apply_update(params, state, acc, hyper.lr, hyper.momentum);

        v_prev = visibles.back();
        have_prev = true;
        t0 = t1;
    }
}

std::vector<VectorXd> eval_suffstats(const EfhParams& params,
                                     const std::vector<VectorXd>& obs_seq) {
    std::vector<VectorXd> out;
    out.reserve(obs_seq.size());
    VectorXd zbar = initial_suffstats(params);
    for (const VectorXd& obs : obs_seq) {
        zbar = hidden_means(params, compose_visible(params, obs, zbar));
        out.push_back(zbar);
    }
    return out;
}

VectorXd predict_next(const EfhParams& params, const VectorXd& zbar, const VectorXd& init_obs,
                      int sweeps, Rng& rng) {
    if (sweeps < 1) throw DomainError("predict_next: sweeps must be >= 1");
    VectorXd v = compose_visible(params, init_obs, zbar);
    const auto prev_off = static_cast<Eigen::Index>(params.prev_offset());
    const auto H = static_cast<Eigen::Index>(params.hidden());
    VectorXd h;
    long warnings = 0;
    for (int s = 0; s < sweeps; ++s) {
        h = sample_hidden(params, v, rng);
        VectorXd v_next = sample_visible(params, h, rng, &warnings);
        v_next.segment(prev_off, H) = zbar;  // clamp
        v = v_next;
    }
    VectorXd mean = visible_means(params, h, &warnings);
    return mean.head(static_cast<Eigen::Index>(params.obs_size()));
}

VectorXd decode_observation(const EfhParams& params, const VectorXd& zbar,
                            long* clamp_warnings) {
    VectorXd mean = visible_means(params, zbar, clamp_warnings);
    return mean.head(static_cast<Eigen::Index>(params.obs_size()));
}

}  // namespace tlrm::efh
