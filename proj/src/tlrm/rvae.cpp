#include "tlrm/rvae.hpp"

#include <cmath>

namespace tlrm::rvae {

using diff::NodeId;
using diff::Tape;
using diff::Tensor;

VectorXd SuffStats::concat() const {
    VectorXd out(mu.size() + var.size());
    out << mu, var;
    return out;
}

SuffStats SuffStats::prior(std::size_t d) {
    SuffStats s;
    s.mu = VectorXd::Zero(static_cast<Eigen::Index>(d));
    s.var = VectorXd::Ones(static_cast<Eigen::Index>(d));
    return s;
}

std::vector<std::pair<std::string, diff::Tensor*>> RvaeParams::named_params() {
    return {
        {"enc_w1", &enc_w1}, {"enc_b1", &enc_b1}, {"enc_w2", &enc_w2}, {"enc_b2", &enc_b2},
        {"enc_wc", &enc_wc}, {"enc_bc", &enc_bc}, {"enc_wmu", &enc_wmu}, {"enc_bmu", &enc_bmu},
        {"enc_wlv", &enc_wlv}, {"enc_blv", &enc_blv}, {"dec_w1", &dec_w1}, {"dec_b1", &dec_b1},
        {"dec_w2", &dec_w2}, {"dec_b2", &dec_b2}, {"dec_we", &dec_we}, {"dec_be", &dec_be},
        {"dec_wt", &dec_wt}, {"dec_bt", &dec_bt}, {"log_sigma2_emiss", &log_sigma2_emiss},
        {"log_sigma2_trans", &log_sigma2_trans},
    };
}

std::vector<std::pair<std::string, const diff::Tensor*>> RvaeParams::named_params() const {
    auto mut = const_cast<RvaeParams*>(this)->named_params();
    std::vector<std::pair<std::string, const diff::Tensor*>> out;
    out.reserve(mut.size());
    for (auto& [name, t] : mut) out.emplace_back(name, t);
    return out;
}

namespace {

Tensor init_weight(std::size_t rows, std::size_t cols, Rng& rng) {
    // He-style scaling for the ReLU stacks
    const double std = std::sqrt(2.0 / static_cast<double>(cols));
    Tensor t = Tensor::zeros({rows, cols});
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = std * rng.normal();
    return t;
}

Tensor init_head(std::size_t rows, std::size_t cols, Rng& rng) {
    const double std = 1.0 / std::sqrt(static_cast<double>(cols));
    Tensor t = Tensor::zeros({rows, cols});
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.1 * std * rng.normal();
    return t;
}

VectorXd relu_vec(VectorXd v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = std::max(0.0, v(i));
    return v;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

RvaeParams make_rvae(const RvaeConfig& cfg, Rng& rng) {
    if (cfg.obs_dim == 0 || cfg.d == 0) throw DomainError("make_rvae: zero dimensions");
    RvaeParams p;
    p.cfg = cfg;
    const std::size_t he = cfg.enc_hidden, hd = cfg.dec_hidden, d = cfg.d, m = cfg.obs_dim;
    p.enc_w1 = init_weight(he, m, rng);
    p.enc_b1 = Tensor::zeros({he});
    p.enc_w2 = init_weight(he, he, rng);
    p.enc_b2 = Tensor::zeros({he});
    p.enc_wc = init_weight(he, he + 2 * d, rng);
    p.enc_bc = Tensor::zeros({he});
    p.enc_wmu = init_head(d, he, rng);
    p.enc_bmu = Tensor::zeros({d});
    p.enc_wlv = init_head(d, he, rng);
    p.enc_blv = Tensor::zeros({d});
    p.dec_w1 = init_weight(hd, d, rng);
    p.dec_b1 = Tensor::zeros({hd});
    p.dec_w2 = init_weight(hd, hd, rng);
    p.dec_b2 = Tensor::zeros({hd});
    p.dec_we = init_head(m, hd, rng);
    p.dec_be = Tensor::zeros({m});
    p.dec_wt = init_head(2 * d, hd, rng);
    p.dec_bt = Tensor::zeros({2 * d});
    p.log_sigma2_emiss = Tensor::scalar(0.0);
    p.log_sigma2_trans = Tensor::scalar(0.0);
    return p;
}

Encoded encode(const RvaeParams& params, const VectorXd& s_prev, const VectorXd& x) {
    const RvaeConfig& c = params.cfg;
    if (x.size() != static_cast<Eigen::Index>(c.obs_dim))
        throw ShapeError("encode: observation length mismatch");
    if (s_prev.size() != static_cast<Eigen::Index>(2 * c.d))
        throw ShapeError("encode: suffstats length mismatch");

    VectorXd h1 = relu_vec(params.enc_w1.mat() * x + params.enc_b1.vec());
    VectorXd h2 = relu_vec(params.enc_w2.mat() * h1 + params.enc_b2.vec());
    VectorXd cat(h2.size() + s_prev.size());
    cat << h2, s_prev;
    VectorXd h3 = relu_vec(params.enc_wc.mat() * cat + params.enc_bc.vec());

    Encoded e;
    e.mu = params.enc_wmu.mat() * h3 + params.enc_bmu.vec();
    VectorXd logvar = params.enc_wlv.mat() * h3 + params.enc_blv.vec();
    e.sigma.resize(logvar.size());
    const double floor = std::sqrt(c.var_floor);
    for (Eigen::Index i = 0; i < logvar.size(); ++i)
        e.sigma(i) = std::max(floor, std::exp(0.5 * logvar(i)));
    return e;
}

Decoded decode(const RvaeParams& params, const VectorXd& z) {
    const RvaeConfig& c = params.cfg;
    if (z.size() != static_cast<Eigen::Index>(c.d)) throw ShapeError("decode: latent length mismatch");
    VectorXd g1 = relu_vec(params.dec_w1.mat() * z + params.dec_b1.vec());
    VectorXd g2 = relu_vec(params.dec_w2.mat() * g1 + params.dec_b2.vec());
    Decoded out;
    out.emission = params.dec_we.mat() * g2 + params.dec_be.vec();
    if (c.emission == EmissionKind::poisson) {
        for (Eigen::Index i = 0; i < out.emission.size(); ++i)
            out.emission(i) = std::exp(out.emission(i));
    } else if (c.bounded_emission) {
        for (Eigen::Index i = 0; i < out.emission.size(); ++i)
            out.emission(i) = sigmoid(out.emission(i));
    }
    out.mu_trans = params.dec_wt.mat() * g2 + params.dec_bt.vec();
    return out;
}

FreeEnergyNodes record_free_energy(Tape& tape, const RvaeParams& params,
                                   const std::vector<NodeId>& leaves, NodeId s_prev_node,
                                   NodeId x_node, const VectorXd& eps) {
    const RvaeConfig& c = params.cfg;
    if (leaves.size() != 20) throw ContractError("record_free_energy: expected 20 param leaves");
    enum {
        W1, B1, W2, B2, WC, BC, WMU, BMU, WLV, BLV,
        DW1, DB1, DW2, DB2, DWE, DBE, DWT, DBT, LSE, LST
    };

    // encoder
    NodeId h1 = tape.relu(tape.affine(leaves[W1], x_node, leaves[B1]));
    NodeId h2 = tape.relu(tape.affine(leaves[W2], h1, leaves[B2]));
    NodeId cat = tape.concat({h2, s_prev_node});
    NodeId h3 = tape.relu(tape.affine(leaves[WC], cat, leaves[BC]));
    NodeId mu = tape.affine(leaves[WMU], h3, leaves[BMU]);
    NodeId logvar = tape.affine(leaves[WLV], h3, leaves[BLV]);
    NodeId sigma = tape.exp(tape.scale(logvar, 0.5));
    // floor: sigma + relu(floor - sigma)
    NodeId floor_c = tape.constant(Tensor::full({c.d}, std::sqrt(c.var_floor)));
    sigma = tape.add(sigma, tape.relu(tape.sub(floor_c, sigma)));

    NodeId z = tape.reparam_sample(mu, sigma, Tensor::from_vector(eps));

    // decoder
    NodeId g1 = tape.relu(tape.affine(leaves[DW1], z, leaves[DB1]));
    NodeId g2 = tape.relu(tape.affine(leaves[DW2], g1, leaves[DB2]));
    NodeId emiss_nat = tape.affine(leaves[DWE], g2, leaves[DBE]);
    NodeId mu_trans = tape.affine(leaves[DWT], g2, leaves[DBT]);

    FreeEnergyNodes nodes;
    nodes.mu = mu;
    nodes.sigma = sigma;
    nodes.z = z;

    nodes.recog = tape.scale(tape.sum(tape.log(sigma)), -1.0);
    nodes.prior =
        tape.scale(tape.add(tape.sum(tape.square(mu)), tape.sum(tape.square(sigma))), 0.5);

    NodeId total = tape.add(nodes.recog, nodes.prior);

    if (c.variant == Variant::rvae) {
        NodeId lst = leaves[LST];
        NodeId resid = tape.sum(tape.square(tape.sub(s_prev_node, mu_trans)));
        NodeId scaled = tape.mul(resid, tape.exp(tape.scale(lst, -1.0)));
        nodes.trans = tape.add(tape.scale(lst, static_cast<double>(c.d)),
                               tape.scale(scaled, 0.5));
        total = tape.add(total, nodes.trans);
    }

    if (c.emission == EmissionKind::poisson) {
        // sum(lambda - x .* eta), eta the log-rate head
        NodeId lambda = tape.exp(emiss_nat);
        NodeId xl = tape.mul(x_node, emiss_nat);
        nodes.emiss = tape.sub(tape.sum(lambda), tape.sum(xl));
    } else {
        NodeId mean = c.bounded_emission ? tape.sigmoid(emiss_nat) : emiss_nat;
        NodeId lse = leaves[LSE];
        NodeId resid = tape.sum(tape.square(tape.sub(x_node, mean)));
        NodeId scaled = tape.mul(resid, tape.exp(tape.scale(lse, -1.0)));
        nodes.emiss = tape.add(tape.scale(lse, 0.5 * static_cast<double>(c.obs_dim)),
                               tape.scale(scaled, 0.5));
    }
    total = tape.add(total, nodes.emiss);
    nodes.total = total;
    return nodes;
}

namespace {

struct BuiltGraph {
    Tape tape;
    std::vector<NodeId> leaves;
    FreeEnergyNodes nodes;
};

BuiltGraph build_graph(const RvaeParams& params, const VectorXd& s_prev, const VectorXd& x,
                       const VectorXd& eps) {
    BuiltGraph g;
    for (auto& [name, t] : params.named_params()) g.leaves.push_back(g.tape.leaf(*t));
    NodeId s_node = g.tape.constant(Tensor::from_vector(s_prev));
    NodeId x_node = g.tape.constant(Tensor::from_vector(x));
    g.nodes = record_free_energy(g.tape, params, g.leaves, s_node, x_node, eps);
    return g;
}

FreeEnergyTerms read_terms(const Tape& tape, const FreeEnergyNodes& nodes) {
    FreeEnergyTerms t;
    t.recog_entropy_term = tape.value(nodes.recog)[0];
    t.prior_term = tape.value(nodes.prior)[0];
    t.trans_term = nodes.trans >= 0 ? tape.value(nodes.trans)[0] : 0.0;
    t.emiss_term = tape.value(nodes.emiss)[0];
    t.total = tape.value(nodes.total)[0];
    return t;
}

}  // namespace

FreeEnergyTerms free_energy(const RvaeParams& params, const VectorXd& s_prev, const VectorXd& x,
                            const VectorXd& eps) {
    BuiltGraph g = build_graph(params, s_prev, x, eps);
    return read_terms(g.tape, g.nodes);
}

StepResult train_step(RvaeParams& params, diff::AdamState& opt, const SuffStats& s_prev,
                      const VectorXd& x_t, const diff::AdamConfig& adam_cfg, Rng& rng) {
    const std::size_t d = params.cfg.d;
    VectorXd eps(static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < eps.size(); ++i) eps(i) = rng.normal();

    BuiltGraph g = build_graph(params, s_prev.concat(), x_t, eps);
    auto grads = g.tape.gradient(g.nodes.total);

    StepResult out;
    out.terms = read_terms(g.tape, g.nodes);
    // pre-update cumulants, detached from the graph
    out.suffstats.mu = g.tape.value(g.nodes.mu).to_vector();
    const Tensor& sig = g.tape.value(g.nodes.sigma);
    out.suffstats.var.resize(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) out.suffstats.var(static_cast<Eigen::Index>(i)) = sig[i] * sig[i];

    auto named = params.named_params();
    std::vector<Tensor*> ps;
    std::vector<const Tensor*> gs;
    ps.reserve(named.size());
    gs.reserve(named.size());
    for (std::size_t k = 0; k < named.size(); ++k) {
        ps.push_back(named[k].second);
        gs.push_back(&grads.at(g.leaves[k]));
    }
    diff::adam_step(ps, gs, opt, adam_cfg);
    return out;
}

std::vector<SuffStats> run_sequence(RvaeParams& params, diff::AdamState* opt,
                                    const std::vector<VectorXd>& observations, bool train,
                                    const diff::AdamConfig& adam_cfg, Rng& rng,
                                    std::vector<double>* loss_trace) {
    if (observations.empty()) throw DomainError("run_sequence: empty sequence");
    if (train && opt == nullptr) throw ContractError("run_sequence: training needs optimizer state");

    std::vector<SuffStats> out;
    out.reserve(observations.size());
    SuffStats s = SuffStats::prior(params.cfg.d);
    for (const VectorXd& x : observations) {
        if (train) {
            StepResult r = train_step(params, *opt, s, x, adam_cfg, rng);
            if (loss_trace) loss_trace->push_back(r.terms.total);
            s = r.suffstats;
        } else {
            Encoded e = encode(params, s.concat(), x);
            s.mu = e.mu;
            s.var = e.sigma.cwiseProduct(e.sigma);
        }
        out.push_back(s);
    }
    return out;
}

double ppc_eval(RvaeParams& params, const std::vector<MatrixXd>& spike_sequences,
                const ppc::PopulationCode& code, const std::vector<VectorXd>& true_positions) {
    if (params.cfg.emission != EmissionKind::poisson)
        throw ContractError("ppc_eval: needs a Poisson-emission model");
    if (spike_sequences.size() != true_positions.size())
        throw ShapeError("ppc_eval: sequence count mismatch");

    diff::AdamConfig unused;
    Rng rng(0);  // not consumed on the no-training path
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t s = 0; s < spike_sequences.size(); ++s) {
        const MatrixXd& counts = spike_sequences[s];
        std::vector<VectorXd> obs;
        obs.reserve(static_cast<std::size_t>(counts.rows()));
        for (Eigen::Index t = 0; t < counts.rows(); ++t) obs.push_back(counts.row(t).transpose());
        std::vector<SuffStats> stats = run_sequence(params, nullptr, obs, false, unused, rng);
        for (std::size_t t = 0; t < stats.size(); ++t) {
            const VectorXd rates = decode(params, stats[t].mu).emission;
            const double est = ppc::com_decode_real(code, rates);
            const double err = est - true_positions[s](static_cast<Eigen::Index>(t));
            acc += err * err;
            ++n;
        }
    }
    return acc / static_cast<double>(n);
}

std::vector<VectorXd> generate_backward(const RvaeParams& params, std::size_t T, Rng& rng) {
    if (params.cfg.variant != Variant::rvae)
        throw UnsupportedVariantError("generate_backward: variant lacks the reverse transition");
    if (T < 1) throw DomainError("generate_backward: T must be >= 1");

    const std::size_t d = params.cfg.d;
    VectorXd z(static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();

    std::vector<VectorXd> frames;
    frames.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
        Decoded dec = decode(params, z);
        frames.push_back(dec.emission);  // noiseless emission
        if (t + 1 == T) break;
        VectorXd mu = dec.mu_trans.head(static_cast<Eigen::Index>(d));
        VectorXd var = dec.mu_trans.tail(static_cast<Eigen::Index>(d))
                           .cwiseMax(params.cfg.var_floor);
        for (Eigen::Index i = 0; i < z.size(); ++i)
            z(i) = mu(i) + std::sqrt(var(i)) * rng.normal();
    }
    return frames;
}

}  // namespace tlrm::rvae
