#include "tlrm/ppc_world.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>

namespace tlrm::ppc {

namespace {

// PSD square root for sampling; tolerates semidefinite inputs (q = 0).
Matrix2d psd_sqrt(const Matrix2d& S) {
    Eigen::SelfAdjointEigenSolver<Matrix2d> es(S);
    Vector2d ev = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

OscillatorModel build_oscillator(double omega, double zeta, double dt, double q) {
    if (!(zeta > 0.0 && zeta < 1.0))
        throw DomainError("build_oscillator: zeta must lie in (0,1) (underdamped)");
    if (!(omega > 0.0)) throw DomainError("build_oscillator: omega must be positive");
    if (!(dt > 0.0)) throw DomainError("build_oscillator: dt must be positive");
    if (q < 0.0) throw DomainError("build_oscillator: q must be nonnegative");

    OscillatorModel m;
    m.omega = omega;
    m.zeta = zeta;
    m.dt = dt;
    m.q = q;

    Matrix2d F;
    F << 0.0, 1.0, -omega * omega, -2.0 * zeta * omega;

    // Closed-form matrix exponential for the underdamped pair.
    const double wd = omega * std::sqrt(1.0 - zeta * zeta);
    const double decay = std::exp(-zeta * omega * dt);
    const double c = std::cos(wd * dt), s = std::sin(wd * dt);
    m.A2 = decay * (c * Matrix2d::Identity() + (s / wd) * (F + zeta * omega * Matrix2d::Identity()));

    // Van Loan discretization of the process noise.
    Eigen::Matrix4d blk = Eigen::Matrix4d::Zero();
    blk.topLeftCorner<2, 2>() = -F;
    blk.topRightCorner<2, 2>() << 0.0, 0.0, 0.0, q;  // L q L', L = (0,1)
    blk.bottomRightCorner<2, 2>() = F.transpose();
    blk *= dt;
    Eigen::Matrix4d e = blk.exp();
    m.Q2 = m.A2 * e.topRightCorner<2, 2>();
    m.Q2 = 0.5 * (m.Q2 + m.Q2.transpose().eval());  // symmetrize roundoff
    return m;
}

Matrix2d stationary_covariance(const Matrix2d& A, const Matrix2d& Q) {
    // vec(S) = (I - A (x) A)^{-1} vec(Q)
    Eigen::Matrix4d K;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) K(2 * j + i, 2 * l + k) = A(i, k) * A(j, l);
    Eigen::Matrix4d lhs = Eigen::Matrix4d::Identity() - K;
    Eigen::Vector4d vq(Q(0, 0), Q(1, 0), Q(0, 1), Q(1, 1));
    Eigen::Vector4d vs = lhs.fullPivLu().solve(vq);
    Matrix2d S;
    S << vs(0), vs(2), vs(1), vs(3);
    return 0.5 * (S + S.transpose().eval());
}

double q_for_position_std(double omega, double zeta, double dt, double target_std) {
    // Stationary covariance is linear in q.
    OscillatorModel unit = build_oscillator(omega, zeta, dt, 1.0);
    double var_unit = stationary_covariance(unit.A2, unit.Q2)(0, 0);
    return target_std * target_std / var_unit;
}

Trajectory simulate_latent_from(const OscillatorModel& model, std::size_t T, const Vector2d& x0,
                                Rng& rng) {
    if (T < 1) throw DomainError("simulate_latent: T must be >= 1");
    Matrix2d noise_sqrt = psd_sqrt(model.Q2);
    Trajectory traj;
    traj.states.resize(static_cast<Eigen::Index>(T), 2);
    Vector2d x = x0;
    for (std::size_t t = 0; t < T; ++t) {
        traj.states(static_cast<Eigen::Index>(t), 0) = x(0);
        traj.states(static_cast<Eigen::Index>(t), 1) = x(1);
        Vector2d w(rng.normal(), rng.normal());
        x = model.A2 * x + noise_sqrt * w;
    }
    return traj;
}

Trajectory simulate_latent(const OscillatorModel& model, std::size_t T, Rng& rng) {
    Matrix2d S = stationary_covariance(model.A2, model.Q2);
    Matrix2d L = psd_sqrt(S);
    Vector2d w(rng.normal(), rng.normal());
    return simulate_latent_from(model, T, L * w, rng);
}

PopulationCode make_population(int n_neurons, double lo, double hi, double sigma_tc, double gain) {
    if (n_neurons < 2) throw DomainError("make_population: need at least two neurons");
    if (!(hi > lo)) throw DomainError("make_population: empty tiling interval");
    if (gain <= 0.0) throw DomainError("make_population: gain must be positive");
    PopulationCode code;
    code.preferred.resize(n_neurons);
    const double spacing = (hi - lo) / static_cast<double>(n_neurons - 1);
    for (int i = 0; i < n_neurons; ++i) code.preferred(i) = lo + spacing * i;
    code.sigma_tc = sigma_tc > 0.0 ? sigma_tc : spacing;
    code.gain = gain;
    return code;
}

VectorXd tuning_rates(const PopulationCode& code, double position) {
    const double inv2s2 = 1.0 / (2.0 * code.sigma_tc * code.sigma_tc);
    VectorXd rates(code.preferred.size());
    for (Eigen::Index i = 0; i < code.preferred.size(); ++i) {
        const double d = position - code.preferred(i);
        rates(i) = code.gain * std::exp(-d * d * inv2s2);
    }
    return rates;
}

VectorXd emit_spikes(const VectorXd& rates, Rng& rng) {
    VectorXd counts(rates.size());
    for (Eigen::Index i = 0; i < rates.size(); ++i) {
        if (rates(i) < 0.0) throw DomainError("emit_spikes: negative rate");
        counts(i) = static_cast<double>(rng.poisson(rates(i)));
    }
    return counts;
}

namespace {

double weighted_mean(const PopulationCode& code, const VectorXd& w) {
    if (w.size() != code.preferred.size())
        throw ShapeError("com_decode: count length does not match population");
    double total = 0.0, acc = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w(i) < 0.0) throw DomainError("com_decode: negative weight");
        total += w(i);
        acc += w(i) * code.preferred(i);
    }
    if (total <= 0.0) throw NoSpikesError("com_decode: all weights zero");
    return acc / total;
}

}  // namespace

double com_decode(const PopulationCode& code, const VectorXd& counts) {
    return weighted_mean(code, counts);
}

double com_decode_real(const PopulationCode& code, const VectorXd& values) {
    return weighted_mean(code, values);
}

PpcSequence generate_sequence(const OscillatorModel& model, const PopulationCode& code,
                              std::size_t T, Rng& latent_rng, Rng& spike_rng) {
    PpcSequence seq;
    seq.states = simulate_latent(model, T, latent_rng).states;
    seq.counts.resize(seq.states.rows(), code.preferred.size());
    for (Eigen::Index t = 0; t < seq.states.rows(); ++t)
        seq.counts.row(t) = emit_spikes(tuning_rates(code, seq.states(t, 0)), spike_rng);
    return seq;
}

}  // namespace tlrm::ppc
