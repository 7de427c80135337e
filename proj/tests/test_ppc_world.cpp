#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "tlrm/ppc_world.hpp"

using namespace tlrm;
using namespace tlrm::ppc;

namespace {

const double kOmega = 2.0 * M_PI * 0.2;

// Independent route to the discretized noise covariance: Simpson quadrature
// of exp(F s) L q L' exp(F' s) over [0, dt], with the closed-form propagator.
Matrix2d quadrature_q2(double omega, double zeta, double dt, double q, int n) {
    Matrix2d F;
    F << 0.0, 1.0, -omega * omega, -2.0 * zeta * omega;
    const double wd = omega * std::sqrt(1.0 - zeta * zeta);
    auto propagator = [&](double s) {
        return std::exp(-zeta * omega * s) *
               (std::cos(wd * s) * Matrix2d::Identity() +
                (std::sin(wd * s) / wd) * (F + zeta * omega * Matrix2d::Identity()));
    };
    Matrix2d noise;
    noise << 0.0, 0.0, 0.0, q;
    auto integrand = [&](double s) {
        Matrix2d e = propagator(s);
        return Matrix2d(e * noise * e.transpose());
    };
    Matrix2d acc = Matrix2d::Zero();
    const double h = dt / n;
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc += w * integrand(i * h);
    }
    return acc * (h / 3.0);
}

}  // namespace

TEST_CASE("oscillator rejects non-underdamped configs") {
    CHECK_THROWS_AS(build_oscillator(kOmega, 1.0, 0.05, 0.1), DomainError);
    CHECK_THROWS_AS(build_oscillator(kOmega, 1.5, 0.05, 0.1), DomainError);
    CHECK_THROWS_AS(build_oscillator(kOmega, -0.1, 0.05, 0.1), DomainError);
    CHECK_THROWS_AS(build_oscillator(-1.0, 0.1, 0.05, 0.1), DomainError);
    CHECK_THROWS_AS(build_oscillator(kOmega, 0.1, 0.05, -1.0), DomainError);
}

TEST_CASE("q = 0 gives a zero process covariance") {
    OscillatorModel m = build_oscillator(kOmega, 0.1, 0.05, 0.0);
    CHECK(m.Q2.norm() == 0.0);
}

TEST_CASE("eigenvalues: complex pair inside the unit circle, undamped limit") {
    OscillatorModel m = build_oscillator(kOmega, 0.1, 0.05, 0.1);
    Eigen::Vector2cd eig = m.A2.eigenvalues();
    CHECK(std::abs(eig(0).imag()) > 0.0);
    CHECK(std::abs(eig(0)) < 1.0);
    CHECK(std::abs(std::abs(eig(0)) - std::abs(eig(1))) < 1e-12);

    double prev = 0.0;
    for (double zeta : {0.2, 0.05, 0.01, 0.001}) {
        OscillatorModel mz = build_oscillator(kOmega, zeta, 0.01, 0.0);
        const double mod = std::abs(mz.A2.eigenvalues()(0));
        CHECK(mod < 1.0);
        CHECK(mod > prev);  // approaches 1 from below as zeta -> 0
        prev = mod;
    }
    CHECK(prev > 0.9999);
}

TEST_CASE("exact discretization matches the quadrature oracle") {
    OscillatorModel m = build_oscillator(kOmega, 0.1, 0.05, 0.37);
    Matrix2d oracle = quadrature_q2(kOmega, 0.1, 0.05, 0.37, 2000);
    CHECK((m.Q2 - oracle).norm() < 1e-10 * oracle.norm() + 1e-14);
}

TEST_CASE("stationary covariance: Lyapunov solution vs long simulation") {
    const double q = q_for_position_std(kOmega, 0.1, 0.05, 0.5);
    OscillatorModel m = build_oscillator(kOmega, 0.1, 0.05, q);
    Matrix2d S = stationary_covariance(m.A2, m.Q2);
    CHECK(S(0, 0) == doctest::Approx(0.25).epsilon(1e-9));  // q derived for std 0.5

    Rng rng(42);
    Trajectory traj = simulate_latent(m, 1000000, rng);
    Eigen::RowVector2d mean = traj.states.colwise().mean();
    Eigen::MatrixXd centered = traj.states.rowwise() - mean;
    Matrix2d sample = (centered.transpose() * centered) / static_cast<double>(traj.states.rows());
    CHECK(sample(0, 0) == doctest::Approx(S(0, 0)).epsilon(0.05));
    CHECK(sample(1, 1) == doctest::Approx(S(1, 1)).epsilon(0.05));
}

TEST_CASE("lag-1 autocovariance matches A * Sigma") {
    const double q = q_for_position_std(kOmega, 0.1, 0.05, 0.5);
    OscillatorModel m = build_oscillator(kOmega, 0.1, 0.05, q);
    Matrix2d S = stationary_covariance(m.A2, m.Q2);
    const double expected = (m.A2 * S)(0, 0);

    Rng rng(7);
    Trajectory traj = simulate_latent(m, 100000, rng);
    const auto T = traj.states.rows();
    const double mean = traj.states.col(0).mean();
    double acc = 0.0;
    for (Eigen::Index t = 0; t + 1 < T; ++t)
        acc += (traj.states(t + 1, 0) - mean) * (traj.states(t, 0) - mean);
    const double sample = acc / static_cast<double>(T - 1);
    CHECK(sample == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("noise-free impulse response oscillates and decays") {
    OscillatorModel m = build_oscillator(kOmega, 0.1, 0.05, 0.0);
    Rng rng(0);
    const int period_steps = static_cast<int>(2.0 * M_PI / (kOmega * 0.05)) + 1;
    Trajectory traj = simulate_latent_from(m, period_steps, {1.0, 0.0}, rng);
    bool crossed = false;
    for (Eigen::Index t = 0; t < traj.states.rows(); ++t)
        crossed = crossed || traj.states(t, 0) < 0.0;
    CHECK(crossed);
    CHECK(std::fabs(traj.states(traj.states.rows() - 1, 0)) < 1.0);
}

TEST_CASE("simulation is deterministic under a fixed seed") {
    const double q = q_for_position_std(kOmega, 0.1, 0.05, 0.5);
    OscillatorModel m = build_oscillator(kOmega, 0.1, 0.05, q);
    Rng r1(123), r2(123);
    Trajectory a = simulate_latent(m, 500, r1);
    Trajectory b = simulate_latent(m, 500, r2);
    CHECK((a.states - b.states).norm() == 0.0);
}

TEST_CASE("tuning curves: peak, one-sigma point, midpoint symmetry, bounded") {
    PopulationCode code = make_population(15, -2.0, 2.0, -1.0, 4.0);
    const double spacing = 4.0 / 14.0;
    CHECK(code.sigma_tc == doctest::Approx(spacing));

    VectorXd at_center = tuning_rates(code, code.preferred(7));
    CHECK(at_center(7) == doctest::Approx(4.0));

    VectorXd at_sigma = tuning_rates(code, code.preferred(7) + code.sigma_tc);
    CHECK(at_sigma(7) == doctest::Approx(4.0 * std::exp(-0.5)));

    const double mid = 0.5 * (code.preferred(6) + code.preferred(7));
    VectorXd at_mid = tuning_rates(code, mid);
    CHECK(at_mid(6) == doctest::Approx(at_mid(7)).epsilon(1e-12));

    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const double s = rng.uniform(-3.0, 3.0);
        VectorXd rates = tuning_rates(code, s);
        CHECK(rates.maxCoeff() <= 4.0 + 1e-12);
        // symmetric in (position - preferred)
        for (Eigen::Index i = 0; i < rates.size(); ++i) {
            const double mirrored = 2.0 * code.preferred(i) - s;
            CHECK(tuning_rates(code, mirrored)(i) == doctest::Approx(rates(i)).epsilon(1e-12));
        }
    }
}

TEST_CASE("poisson sampler: degenerate case and moments within 3 SE") {
    Rng rng(11);
    VectorXd zero = emit_spikes(VectorXd::Zero(4), rng);
    CHECK(zero.maxCoeff() == 0.0);
    CHECK_THROWS_AS(emit_spikes(VectorXd::Constant(1, -0.5), rng), DomainError);

    const int n = 100000;
    for (double lambda : {0.5, 2.0, 3.0, 8.0}) {
        Rng r(derive_seed(99, "pois", static_cast<std::uint64_t>(lambda * 10)));
        double sum = 0.0, sumsq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double c = static_cast<double>(r.poisson(lambda));
            sum += c;
            sumsq += c * c;
        }
        const double mean = sum / n;
        const double var = sumsq / n - mean * mean;
        const double se_mean = std::sqrt(lambda / n);
        // sampling std of a Poisson sample variance: sqrt((lambda + 2 lambda^2)/n)
        const double se_var = std::sqrt((lambda + 2.0 * lambda * lambda) / n);
        CHECK(std::fabs(mean - lambda) < 3.0 * se_mean);
        CHECK(std::fabs(var - lambda) < 3.0 * se_var);
    }
}

TEST_CASE("center-of-mass decode: point mass, symmetry, errors, invariances") {
    PopulationCode code = make_population(15, -2.0, 2.0, -1.0, 4.0);
    VectorXd counts = VectorXd::Zero(15);
    counts(4) = 1.0;
    CHECK(com_decode(code, counts) == doctest::Approx(code.preferred(4)));

    VectorXd sym = VectorXd::Zero(15);
    sym(6) = 3.0;
    sym(7) = 5.0;
    sym(8) = 3.0;
    CHECK(com_decode(code, sym) == doctest::Approx(code.preferred(7)));

    CHECK_THROWS_AS(com_decode(code, VectorXd::Zero(15)), NoSpikesError);
    CHECK_THROWS_AS(com_decode(code, VectorXd::Constant(15, -1.0)), DomainError);
    CHECK_THROWS_AS(com_decode_real(code, VectorXd::Zero(15)), NoSpikesError);

    // exact scale invariance of the real-valued decoder
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        VectorXd v(15);
        for (int i = 0; i < 15; ++i) v(i) = rng.uniform();
        const double base = com_decode_real(code, v);
        for (double c : {0.5, 2.0, 117.0}) {
            CHECK(com_decode_real(code, (c * v).eval()) == doctest::Approx(base).epsilon(1e-12));
        }
    }

    // indicator input recovers the preferred angle
    VectorXd ind = VectorXd::Zero(15);
    ind(9) = 0.37;
    CHECK(com_decode_real(code, ind) == doctest::Approx(code.preferred(9)));

    // decoding the tuning profile recovers the encoded position away from edges
    for (double s = -1.5; s <= 1.5; s += 0.05) {
        const double est = com_decode_real(code, tuning_rates(code, s));
        CHECK(std::fabs(est - s) < 0.02);
    }
}

TEST_CASE("generate_sequence shapes and determinism") {
    const double q = q_for_position_std(kOmega, 0.1, 0.05, 0.5);
    OscillatorModel m = build_oscillator(kOmega, 0.1, 0.05, q);
    PopulationCode code = make_population(15, -2.0, 2.0, -1.0, 4.0);
    Rng l1(1), s1(2), l2(1), s2(2);
    PpcSequence a = generate_sequence(m, code, 200, l1, s1);
    PpcSequence b = generate_sequence(m, code, 200, l2, s2);
    CHECK(a.states.rows() == 200);
    CHECK(a.counts.cols() == 15);
    CHECK((a.counts - b.counts).norm() == 0.0);
    CHECK(a.counts.minCoeff() >= 0.0);
    for (Eigen::Index t = 0; t < a.counts.rows(); ++t)
        for (Eigen::Index i = 0; i < a.counts.cols(); ++i)
            CHECK(a.counts(t, i) == std::floor(a.counts(t, i)));
}
