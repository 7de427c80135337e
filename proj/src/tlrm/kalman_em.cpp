#include "tlrm/kalman_em.hpp"

#include <cmath>

namespace tlrm::kalman {

namespace {

constexpr double kTwoPi = 6.283185307179586;

MatrixXd symmetrize(const MatrixXd& m) { return 0.5 * (m + m.transpose().eval()); }

// Symmetric projection onto PSD plus jitter; used to repair M-step roundoff.
MatrixXd make_psd(const MatrixXd& m, double jitter) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(m));
    VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    MatrixXd fixed = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    return symmetrize(fixed) + jitter * MatrixXd::Identity(m.rows(), m.cols());
}

MatrixXd psd_sqrt(const MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(m));
    VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

PseudoObs to_pseudo_obs(const ppc::PopulationCode& code, const VectorXd& counts) {
    PseudoObs obs;
    const double total = counts.sum();
    if (total <= 0.0) {
        obs.valid = false;
        obs.variance = std::numeric_limits<double>::infinity();
        return obs;
    }
    obs.valid = true;
    obs.value = ppc::com_decode(code, counts);
    obs.variance = code.sigma_tc * code.sigma_tc / total;
    return obs;
}

std::vector<PseudoObs> to_pseudo_obs_sequence(const ppc::PopulationCode& code,
                                              const MatrixXd& counts) {
    std::vector<PseudoObs> out;
    out.reserve(static_cast<std::size_t>(counts.rows()));
    for (Eigen::Index t = 0; t < counts.rows(); ++t)
        out.push_back(to_pseudo_obs(code, counts.row(t).transpose()));
    return out;
}

Belief kf_predict(const LgdsParams& params, const Belief& belief) {
    Belief out;
    out.mean = params.A * belief.mean;
    out.cov = symmetrize(params.A * belief.cov * params.A.transpose() + params.Q);
    return out;
}

Belief kf_update(const LgdsParams& params, const Belief& belief, const PseudoObs& obs) {
    if (!obs.valid) return belief;
    const double innovation = obs.value - params.C.dot(belief.mean);
    const double s = (params.C * belief.cov * params.C.transpose())(0, 0) + obs.variance;
    const VectorXd gain = belief.cov * params.C.transpose() / s;
    Belief out;
    out.mean = belief.mean + gain * innovation;
    // Joseph form keeps the covariance PSD with a time-varying R.
    const MatrixXd ikc =
        MatrixXd::Identity(params.d, params.d) - gain * params.C;
    out.cov = symmetrize(ikc * belief.cov * ikc.transpose() +
                         gain * obs.variance * gain.transpose());
    return out;
}

FilterResult kf_filter(const LgdsParams& params, const std::vector<PseudoObs>& obs) {
    FilterResult fr;
    fr.predicted.reserve(obs.size());
    fr.filtered.reserve(obs.size());
    Belief prior{params.mu0, symmetrize(params.S0)};
    for (std::size_t t = 0; t < obs.size(); ++t) {
        if (t > 0) prior = kf_predict(params, fr.filtered.back());
        fr.predicted.push_back(prior);
        if (obs[t].valid) {
            const double s =
                (params.C * prior.cov * params.C.transpose())(0, 0) + obs[t].variance;
            const double e = obs[t].value - params.C.dot(prior.mean);
            fr.loglik += -0.5 * (std::log(kTwoPi * s) + e * e / s);
        }
        fr.filtered.push_back(kf_update(params, prior, obs[t]));
    }
    return fr;
}

SmoothResult rts_smooth(const LgdsParams& params, const FilterResult& fr) {
    const std::size_t T = fr.filtered.size();
    SmoothResult sr;
    sr.smoothed.resize(T);
    if (T == 0) return sr;
    sr.cross.resize(T - 1);
    sr.smoothed[T - 1] = fr.filtered[T - 1];

    for (std::size_t t = T - 1; t-- > 0;) {
        const Belief& filt = fr.filtered[t];
        const Belief& pred = fr.predicted[t + 1];
        MatrixXd pred_cov = pred.cov;
        Eigen::LLT<MatrixXd> llt(pred_cov);
        if (llt.info() != Eigen::Success) {
            pred_cov += 1e-9 * MatrixXd::Identity(params.d, params.d);
            llt.compute(pred_cov);
            if (llt.info() != Eigen::Success)
                throw SingularityError("rts_smooth: predicted covariance is singular");
        }
        // J = filt.cov A' pred.cov^-1
        const MatrixXd J =
            llt.solve((params.A * filt.cov).eval()).transpose();
        sr.smoothed[t].mean =
            filt.mean + J * (sr.smoothed[t + 1].mean - pred.mean);
        sr.smoothed[t].cov = symmetrize(
            filt.cov + J * (sr.smoothed[t + 1].cov - pred.cov) * J.transpose());
        sr.cross[t] = sr.smoothed[t + 1].cov * J.transpose();
    }
    return sr;
}

LgdsParams em_init(int d, double dt, Rng& rng) {
    if (d != 1 && d != 2) throw DomainError("em_init: latent dimension must be 1 or 2");
    LgdsParams p;
    p.d = d;
    p.A = 0.99 * MatrixXd::Identity(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) p.A(i, j) += rng.uniform(-0.01, 0.01);
    if (d == 2) p.A(0, 1) += dt;  // position-velocity coupling
    p.Q = 1e-2 * MatrixXd::Identity(d, d);
    p.C = RowVectorXd::Zero(d);
    p.C(0) = 1.0;
    p.mu0 = VectorXd::Zero(d);
    p.S0 = MatrixXd::Identity(d, d);
    return p;
}

LgdsParams em_fit(const std::vector<std::vector<PseudoObs>>& sequences, int d,
                  const EmOptions& opt, Rng& rng, std::vector<double>* loglik_trace) {
    if (opt.iters < 1) throw DomainError("em_fit: iters must be >= 1");
    LgdsParams p = em_init(d, opt.dt, rng);

    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < opt.iters; ++it) {
        MatrixXd sum_pair = MatrixXd::Zero(d, d);   // sum E[x_t x_{t-1}']
        MatrixXd sum_prev = MatrixXd::Zero(d, d);   // sum E[x_{t-1} x_{t-1}']
        MatrixXd sum_curr = MatrixXd::Zero(d, d);   // sum E[x_t x_t'], t >= 1
        VectorXd mu0_acc = VectorXd::Zero(d);
        MatrixXd s0_acc = MatrixXd::Zero(d, d);
        std::size_t n_trans = 0;
        double ll = 0.0;

        std::vector<std::vector<Belief>> heads;
        heads.reserve(sequences.size());
        for (const auto& seq : sequences) {
            FilterResult fr = kf_filter(p, seq);
            SmoothResult sr = rts_smooth(p, fr);
            ll += fr.loglik;
            const std::size_t T = seq.size();
            for (std::size_t t = 1; t < T; ++t) {
                const Belief& a = sr.smoothed[t - 1];
                const Belief& b = sr.smoothed[t];
                sum_pair += sr.cross[t - 1] + b.mean * a.mean.transpose();
                sum_prev += a.cov + a.mean * a.mean.transpose();
                sum_curr += b.cov + b.mean * b.mean.transpose();
            }
            n_trans += T - 1;
            mu0_acc += sr.smoothed[0].mean;
            heads.push_back({sr.smoothed[0]});
        }
        if (loglik_trace) loglik_trace->push_back(ll);

        // M-step: closed-form A, Q; C fixed; R supplied by the data.
        MatrixXd prev_inv = sum_prev;
        Eigen::FullPivLU<MatrixXd> lu(prev_inv);
        if (!lu.isInvertible())
            lu.compute(prev_inv + opt.jitter * MatrixXd::Identity(d, d));
        p.A = (lu.solve(sum_pair.transpose())).transpose();
        MatrixXd q_new =
            (sum_curr - p.A * sum_pair.transpose() - sum_pair * p.A.transpose() +
             p.A * sum_prev * p.A.transpose()) /
            static_cast<double>(n_trans);
        p.Q = make_psd(q_new, opt.jitter);

        const double n_seq = static_cast<double>(sequences.size());
        p.mu0 = mu0_acc / n_seq;
        for (const auto& h : heads)
            s0_acc += h[0].cov +
                      (h[0].mean - p.mu0) * (h[0].mean - p.mu0).transpose();
        p.S0 = make_psd(s0_acc / n_seq, opt.jitter);

        // keep the fitted dynamics inside the stability margin
        const double rho = p.A.eigenvalues().cwiseAbs().maxCoeff();
        if (rho > 1.0 + 1e-6) p.A *= (1.0 + 1e-6) / rho;

        if (it > 0 && std::fabs(ll - prev_ll) < opt.plateau_tol * (1.0 + std::fabs(ll))) break;
        prev_ll = ll;
    }
    return p;
}

double kf_position_mse(const LgdsParams& params,
                       const std::vector<std::vector<PseudoObs>>& obs_sequences,
                       const std::vector<VectorXd>& true_positions) {
    if (obs_sequences.size() != true_positions.size())
        throw ShapeError("kf_position_mse: sequence count mismatch");
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t s = 0; s < obs_sequences.size(); ++s) {
        FilterResult fr = kf_filter(params, obs_sequences[s]);
        const VectorXd& truth = true_positions[s];
        if (truth.size() != static_cast<Eigen::Index>(fr.filtered.size()))
            throw ShapeError("kf_position_mse: trajectory length mismatch");
        for (std::size_t t = 0; t < fr.filtered.size(); ++t) {
            const double est = params.C.dot(fr.filtered[t].mean);
            const double err = est - truth(static_cast<Eigen::Index>(t));
            acc += err * err;
            ++n;
        }
    }
    return acc / static_cast<double>(n);
}

SimulatedLgds simulate_lgds(const LgdsParams& params, std::size_t T, double obs_variance,
                            Rng& rng) {
    SimulatedLgds sim;
    sim.states.resize(static_cast<Eigen::Index>(T), params.d);
    const MatrixXd q_sqrt = psd_sqrt(params.Q);
    const MatrixXd s0_sqrt = psd_sqrt(params.S0);
    VectorXd x = params.mu0;
    VectorXd w(params.d);
    for (int i = 0; i < params.d; ++i) w(i) = rng.normal();
    x += s0_sqrt * w;
    const double obs_sd = std::sqrt(obs_variance);
    for (std::size_t t = 0; t < T; ++t) {
        sim.states.row(static_cast<Eigen::Index>(t)) = x.transpose();
        PseudoObs o;
        o.valid = true;
        o.variance = obs_variance;
        o.value = params.C.dot(x) + obs_sd * rng.normal();
        sim.obs.push_back(o);
        for (int i = 0; i < params.d; ++i) w(i) = rng.normal();
        x = params.A * x + q_sqrt * w;
    }
    return sim;
}

}  // namespace tlrm::kalman
