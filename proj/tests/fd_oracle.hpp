#pragma once

// Central finite-difference oracle for gradient checks. Rebuilds the forward
// pass from scratch for every probe, so it is independent of the backward
// code it validates.

#include <cmath>
#include <functional>
#include <vector>

#include "tlrm/tape.hpp"

namespace tlrm_test {

using tlrm::diff::NodeId;
using tlrm::diff::Tape;
using tlrm::diff::Tensor;

// build(tape, leaf_ids) records the graph over the given leaves and returns
// the scalar output node.
using GraphBuilder = std::function<NodeId(Tape&, const std::vector<NodeId>&)>;

inline double eval_forward(const GraphBuilder& build, const std::vector<Tensor>& leaves) {
    Tape tape;
    std::vector<NodeId> ids;
    ids.reserve(leaves.size());
    for (const Tensor& t : leaves) ids.push_back(tape.leaf(t));
    NodeId out = build(tape, ids);
    return tape.value(out)[0];
}

// Returns the max relative error between reverse-mode and central finite
// differences over every coordinate of every leaf.
inline double fd_max_rel_error(const GraphBuilder& build, std::vector<Tensor> leaves,
                               double h = 1e-5) {
    Tape tape;
    std::vector<NodeId> ids;
    for (const Tensor& t : leaves) ids.push_back(tape.leaf(t));
    NodeId out = build(tape, ids);
    auto grads = tape.gradient(out);

    double worst = 0.0;
    for (std::size_t k = 0; k < leaves.size(); ++k) {
        const Tensor& g = grads.at(ids[k]);
        for (std::size_t i = 0; i < leaves[k].size(); ++i) {
            const double saved = leaves[k][i];
            leaves[k][i] = saved + h;
            const double fp = eval_forward(build, leaves);
            leaves[k][i] = saved - h;
            const double fm = eval_forward(build, leaves);
            leaves[k][i] = saved;
            const double fd = (fp - fm) / (2.0 * h);
            const double denom = std::max({std::fabs(fd), std::fabs(g[i]), 1e-6});
            worst = std::max(worst, std::fabs(fd - g[i]) / denom);
        }
    }
    return worst;
}

}  // namespace tlrm_test
