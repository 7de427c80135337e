#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fd_oracle.hpp"
#include "tlrm/adam.hpp"
#include "tlrm/rng.hpp"
#include "tlrm/tape.hpp"

using namespace tlrm;
using namespace tlrm::diff;
using tlrm_test::fd_max_rel_error;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double scale = 0.5) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = scale * rng.normal();
    return t;
}

}  // namespace

TEST_CASE("elementwise forward values") {
    Tape tape;
    NodeId x = tape.leaf(Tensor({3}, {-1.0, 0.0, 2.0}));
    NodeId r = tape.relu(x);
    CHECK(tape.value(r)[0] == 0.0);
    CHECK(tape.value(r)[1] == 0.0);
    CHECK(tape.value(r)[2] == 2.0);

    NodeId s = tape.sigmoid(tape.constant(Tensor::scalar(0.0)));
    CHECK(tape.value(s)[0] == doctest::Approx(0.5).epsilon(1e-15));

    NodeId sg = tape.stop_gradient(x);
    for (std::size_t i = 0; i < 3; ++i) CHECK(tape.value(sg)[i] == tape.value(x)[i]);
}

TEST_CASE("forward evaluation is deterministic") {
    auto run = [] {
        Tape tape;
        NodeId x = tape.leaf(Tensor({4}, {0.3, -0.7, 1.1, 0.05}));
        NodeId y = tape.sum(tape.sigmoid(tape.square(x)));
        return tape.value(y)[0];
    };
    CHECK(run() == run());
}

TEST_CASE("gradient of sum is ones") {
    Tape tape;
    NodeId x = tape.leaf(Tensor({3}, {0.2, -0.4, 5.0}));
    NodeId out = tape.sum(x);
    auto g = tape.gradient(out);
    for (std::size_t i = 0; i < 3; ++i) CHECK(g.at(x)[i] == 1.0);
}

TEST_CASE("stop_gradient blocks exactly") {
    Tape tape;
    NodeId x = tape.leaf(Tensor({1}, {2.0}));
    NodeId out = tape.sum(tape.mul(tape.stop_gradient(x), x));
    auto g = tape.gradient(out);
    CHECK(g.at(x)[0] == 2.0);  // only the non-stopped factor contributes

    Tape tape2;
    NodeId y = tape2.leaf(Tensor({3}, {1.0, -2.0, 0.5}));
    NodeId out2 = tape2.sum(tape2.square(tape2.stop_gradient(y)));
    auto g2 = tape2.gradient(out2);
    for (std::size_t i = 0; i < 3; ++i) CHECK(g2.at(y)[i] == 0.0);
}

TEST_CASE("shape and contract errors") {
    Tape tape;
    NodeId a = tape.leaf(Tensor({2}, {1.0, 2.0}));
    NodeId b = tape.leaf(Tensor({3}, {1.0, 2.0, 3.0}));
    CHECK_THROWS_AS(tape.add(a, b), ShapeError);
    CHECK_THROWS_AS(tape.matmul(a, b), ShapeError);
    CHECK_THROWS_AS((void)tape.gradient(b), ContractError);
    CHECK_THROWS_AS(tape.leaf(Tensor({1}, {std::nan("")})), DomainError);
}

TEST_CASE("reparam_sample forward and gradient") {
    {
        Tape tape;
        NodeId mu = tape.leaf(Tensor({1}, {1.0}));
        NodeId sigma = tape.leaf(Tensor({1}, {2.0}));
        NodeId z = tape.reparam_sample(mu, sigma, Tensor({1}, {0.0}));
        CHECK(tape.value(z)[0] == 1.0);
    }
    {
        Tape tape;
        NodeId mu = tape.leaf(Tensor({1}, {0.0}));
        NodeId sigma = tape.leaf(Tensor({1}, {1.0}));
        NodeId z = tape.reparam_sample(mu, sigma, Tensor({1}, {1.5}));
        CHECK(tape.value(z)[0] == 1.5);
    }
    {
        Tape tape;
        NodeId mu = tape.leaf(Tensor({1}, {0.0}));
        NodeId sigma = tape.leaf(Tensor({1}, {-0.5}));
        CHECK_THROWS_AS(tape.reparam_sample(mu, sigma, Tensor({1}, {0.0})), DomainError);
    }

    // d/dsigma of sum(reparam) equals eps, checked against the FD oracle
    Tensor eps({3}, {1.5, -0.6, 0.2});
    auto build = [&eps](Tape& t, const std::vector<NodeId>& ids) {
        return t.sum(t.reparam_sample(ids[0], ids[1], eps));
    };
    Rng rng(7);
    std::vector<Tensor> leaves = {random_tensor({3}, rng), Tensor({3}, {0.7, 1.3, 0.4})};
    CHECK(fd_max_rel_error(build, leaves) < 1e-4);

    Tape tape;
    NodeId mu = tape.leaf(leaves[0]);
    NodeId sigma = tape.leaf(leaves[1]);
    auto g = tape.gradient(tape.sum(tape.reparam_sample(mu, sigma, eps)));
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(g.at(sigma)[i] == doctest::Approx(eps[i]).epsilon(1e-12));
        CHECK(g.at(mu)[i] == 1.0);
    }
}

TEST_CASE("two-layer MLP loss matches finite differences") {
    Rng rng(11);
    Tensor x = random_tensor({6}, rng, 1.0);
    auto build = [&x](Tape& t, const std::vector<NodeId>& ids) {
        NodeId h = t.relu(t.affine(ids[0], t.constant(x), ids[1]));
        NodeId y = t.affine(ids[2], h, ids[3]);
        return t.sum(t.square(y));
    };
    std::vector<Tensor> leaves = {random_tensor({4, 6}, rng), random_tensor({4}, rng),
                                  random_tensor({2, 4}, rng), random_tensor({2}, rng)};
    CHECK(fd_max_rel_error(build, leaves) < 1e-4);
}

TEST_CASE("random composites match finite differences at 10 points") {
    // A randomized program over the primitive set; shapes tracked so every
    // draw is well-formed, domain-restricted ops fed positive inputs.
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
        Rng rng(derive_seed(321, "fd-composite", trial));

        const std::size_t dim = 4;
        std::vector<Tensor> leaves = {random_tensor({dim}, rng), random_tensor({dim}, rng),
                                      random_tensor({3, dim}, rng), random_tensor({3}, rng)};
        std::vector<int> program;
        for (int i = 0; i < 12; ++i) program.push_back(static_cast<int>(rng.uniform_index(9)));

        auto build = [&](Tape& t, const std::vector<NodeId>& ids) {
            NodeId u = ids[0];
            NodeId v = ids[1];
            for (int oppick : program) {
                switch (oppick) {
                    case 0: u = t.add(u, v); break;
                    case 1: u = t.mul(u, v); break;
                    case 2: u = t.sigmoid(u); break;
                    case 3: u = t.softplus(u); break;
                    case 4: u = t.square(u); break;
                    case 5: v = t.relu(t.add(v, t.constant(Tensor::full({dim}, 0.31)))); break;
                    case 6: u = t.log(t.add(t.softplus(u), t.constant(Tensor::full({dim}, 0.1)))); break;
                    case 7: {
                        NodeId cat = t.concat({u, v});
                        u = t.slice(cat, 0, dim);
                        v = t.slice(cat, dim, dim);
                        break;
                    }
                    case 8: v = t.scale(v, 0.7); break;
                }
            }
            NodeId w = t.affine(ids[2], u, ids[3]);
            return t.add(t.mean(t.square(w)), t.sum(t.mul(u, v)));
        };
        CHECK(fd_max_rel_error(build, leaves) < 1e-4);
    }
}

TEST_CASE("adam: zero gradient is a fixed point") {
    Tensor p({3}, {0.4, -0.2, 1.0});
    Tensor p0 = p;
    Tensor g = Tensor::zeros({3});
    AdamState st = AdamState::for_params({&p});
    AdamConfig cfg;
    for (int i = 0; i < 5; ++i) adam_step({&p}, {&g}, st, cfg);
    for (std::size_t i = 0; i < 3; ++i) CHECK(p[i] == p0[i]);
    CHECK(st.step == 5);
}

TEST_CASE("adam: first step matches the closed form") {
    // At step 1 the update is -lr * g/|g| / (1 + eps/|ghat|)-style; exactly:
    // mhat = g, vhat = g^2, delta = -lr * g / (|g| + eps).
    Tensor p({2}, {1.0, -3.0});
    Tensor g({2}, {0.3, -0.02});
    AdamState st = AdamState::for_params({&p});
    AdamConfig cfg;  // betas (0.9, 0.999), lr 1e-3, eps 1e-8
    adam_step({&p}, {&g}, st, cfg);
    for (std::size_t i = 0; i < 2; ++i) {
        const double expect = (i == 0 ? 1.0 : -3.0) - cfg.lr * g[i] / (std::fabs(g[i]) + cfg.eps);
        CHECK(p[i] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("adam: independent tensors update independently") {
    Tensor a({2}, {0.5, 0.5});
    Tensor b({2}, {0.5, 0.5});
    Tensor ga({2}, {1.0, -1.0});
    Tensor gb = Tensor::zeros({2});
    AdamState st = AdamState::for_params({&a, &b});
    AdamConfig cfg;
    adam_step({&a, &b}, {&ga, &gb}, st, cfg);
    CHECK(a[0] != 0.5);
    CHECK(b[0] == 0.5);
    CHECK(b[1] == 0.5);

    // same update as a lone-parameter run
    Tensor a2({2}, {0.5, 0.5});
    AdamState st2 = AdamState::for_params({&a2});
    adam_step({&a2}, {&ga}, st2, cfg);
    CHECK(a[0] == a2[0]);
    CHECK(a[1] == a2[1]);
}
