#include "tlrm/balls_world.hpp"

#include <cmath>

namespace tlrm::balls {

void validate_world(const BallWorld& world) {
    if (world.n_balls < 1) throw DomainError("balls: need at least one ball");
    if (world.radius <= 0.0 || world.box_size <= 0.0 || world.dt <= 0.0 || world.speed < 0.0)
        throw DomainError("balls: geometry parameters must be positive");
    if (2.0 * world.radius * world.n_balls >= world.box_size)
        throw DomainError("balls: balls do not fit in the box");
    if (world.speed * world.dt >= world.radius)
        throw DomainError("balls: step displacement must stay below the radius");
}

namespace {

void bounce_walls(const BallWorld& world, BallState& s) {
    const double lo = world.radius;
    const double hi = world.box_size - world.radius;
    for (int b = 0; b < world.n_balls; ++b) {
        for (int ax = 0; ax < 2; ++ax) {
            double& p = s.positions[b](ax);
            double& v = s.velocities[b](ax);
            if (p < lo) {
                p = 2.0 * lo - p;
                v = std::fabs(v);
            } else if (p > hi) {
                p = 2.0 * hi - p;
                v = -std::fabs(v);
            }
        }
    }
}

// Contact bounce: each ball reflects its velocity component along the
// contact normal if it is moving into the other ball, so every ball keeps
// its own speed exactly (sign flips only). Overlap is projected apart
// along the normal, half per ball; the pass repeats while a projection
// re-opened an earlier pair (triple contacts).
void bounce_pairs(const BallWorld& world, BallState& s) {
    const double tol = 1e-9 * world.radius;
    for (int pass = 0; pass < 8; ++pass) {
        bool touched = false;
        for (int i = 0; i < world.n_balls; ++i) {
            for (int j = i + 1; j < world.n_balls; ++j) {
                Vector2d diff = s.positions[j] - s.positions[i];
                double d = diff.norm();
                if (d >= 2.0 * world.radius - tol) continue;
                touched = true;
                Vector2d n = d > 1e-12 ? Vector2d(diff / d) : Vector2d(1.0, 0.0);
                const double vi_n = s.velocities[i].dot(n);
                const double vj_n = s.velocities[j].dot(n);
                if (vi_n > 0.0) s.velocities[i] -= 2.0 * vi_n * n;  // i moving toward j
                if (vj_n < 0.0) s.velocities[j] -= 2.0 * vj_n * n;  // j moving toward i
                const double overlap = 2.0 * world.radius - d;
                s.positions[i] -= 0.5 * overlap * n;
                s.positions[j] += 0.5 * overlap * n;
            }
        }
        if (!touched) break;
    }
}

BallState init_state(const BallWorld& world, Rng& rng) {
    const double lo = world.radius;
    const double hi = world.box_size - world.radius;
    BallState s;
    for (int attempt = 0; attempt < world.max_init_attempts; ++attempt) {
        s.positions.clear();
        for (int b = 0; b < world.n_balls; ++b)
            s.positions.emplace_back(rng.uniform(lo, hi), rng.uniform(lo, hi));
        bool ok = true;
        for (int i = 0; i < world.n_balls && ok; ++i)
            for (int j = i + 1; j < world.n_balls && ok; ++j)
                ok = (s.positions[i] - s.positions[j]).norm() >= 2.0 * world.radius;
        if (!ok) continue;
        s.velocities.clear();
        for (int b = 0; b < world.n_balls; ++b) {
            const double theta = rng.uniform(0.0, 2.0 * M_PI);
            s.velocities.emplace_back(world.speed * std::cos(theta),
                                      world.speed * std::sin(theta));
        }
        return s;
    }
    throw PlacementError("balls: could not place non-overlapping balls");
}

}  // namespace

BallState step_balls(const BallWorld& world, const BallState& state) {
    BallState s = state;
    for (int b = 0; b < world.n_balls; ++b) s.positions[b] += world.dt * s.velocities[b];
    bounce_walls(world, s);
    bounce_pairs(world, s);
    return s;
}

std::vector<BallState> simulate_balls(const BallWorld& world, std::size_t T, Rng& rng) {
    validate_world(world);
    if (T < 1) throw DomainError("simulate_balls: T must be >= 1");
    std::vector<BallState> out;
    out.reserve(T);
    out.push_back(init_state(world, rng));
    for (std::size_t t = 1; t < T; ++t) out.push_back(step_balls(world, out.back()));
    return out;
}

MatrixXd rasterize(const BallWorld& world, const BallState& state, int res) {
    if (res < 8) throw DomainError("rasterize: resolution must be >= 8");
    const double px = world.box_size / static_cast<double>(res);
    const double hp = 0.5 * px;
    MatrixXd frame = MatrixXd::Zero(res, res);
    for (int i = 0; i < res; ++i) {
        const double y = (i + 0.5) * px;
        for (int j = 0; j < res; ++j) {
            const double x = (j + 0.5) * px;
            double v = 0.0;
            for (int b = 0; b < world.n_balls; ++b) {
                const double d = (state.positions[b] - Vector2d(x, y)).norm();
                if (d <= world.radius - hp)
                    v += 1.0;
                else if (d < world.radius + hp)
                    v += (world.radius + hp - d) / (2.0 * hp);
            }
            frame(i, j) = std::min(1.0, v);
        }
    }
    return frame;
}

double order0_mse(const std::vector<MatrixXd>& frames) {
    if (frames.size() < 2) throw DomainError("order0_mse: need at least two frames");
    double acc = 0.0;
    for (std::size_t t = 0; t + 1 < frames.size(); ++t) {
        const MatrixXd d = frames[t + 1] - frames[t];
        acc += d.array().square().mean();
    }
    return acc / static_cast<double>(frames.size() - 1);
}

double kinetic_energy(const BallState& state) {
    double e = 0.0;
    for (const Vector2d& v : state.velocities) e += v.squaredNorm();
    return e;
}

}  // namespace tlrm::balls
