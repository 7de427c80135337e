#pragma once

#include <unordered_map>
#include <vector>

#include "tlrm/tensor.hpp"

namespace tlrm::diff {

using NodeId = int;

enum class Op {
    leaf,
    constant,
    affine,  // (W, x, b) -> W*x + b
    matmul,
    add,
    mul,
    concat,
    slice,
    relu,
    sigmoid,
    exp,
    log,
    softplus,
    square,
    sum,
    mean,
    stop_gradient,
};

struct Node {
    Op op;
    std::vector<NodeId> inputs;
    Tensor value;
    std::size_t offset = 0;  // slice begin
    std::size_t extent = 0;  // slice length
};

// Append-only forward tape; one backward pass visits each node once.
// Input ids always precede the node they feed, so a reverse sweep is a
// valid topological order. Tapes are single-threaded; build one per step.
class Tape {
public:
    NodeId leaf(Tensor v);
    NodeId constant(Tensor v);

    // General recording entry point; the named wrappers below all funnel
    // through here. slice needs its range passed via the dedicated wrapper.
    NodeId record(Op op, const std::vector<NodeId>& inputs, std::size_t offset = 0,
                  std::size_t extent = 0);

    NodeId affine(NodeId w, NodeId x, NodeId b) { return record(Op::affine, {w, x, b}); }
    NodeId matmul(NodeId a, NodeId b) { return record(Op::matmul, {a, b}); }
    NodeId add(NodeId a, NodeId b) { return record(Op::add, {a, b}); }
    NodeId mul(NodeId a, NodeId b) { return record(Op::mul, {a, b}); }
    NodeId concat(const std::vector<NodeId>& parts) { return record(Op::concat, parts); }
    NodeId slice(NodeId x, std::size_t offset, std::size_t extent) {
        return record(Op::slice, {x}, offset, extent);
    }
    NodeId relu(NodeId x) { return record(Op::relu, {x}); }
    NodeId sigmoid(NodeId x) { return record(Op::sigmoid, {x}); }
    NodeId exp(NodeId x) { return record(Op::exp, {x}); }
    NodeId log(NodeId x) { return record(Op::log, {x}); }
    NodeId softplus(NodeId x) { return record(Op::softplus, {x}); }
    NodeId square(NodeId x) { return record(Op::square, {x}); }
    NodeId sum(NodeId x) { return record(Op::sum, {x}); }
    NodeId mean(NodeId x) { return record(Op::mean, {x}); }
    NodeId stop_gradient(NodeId x) { return record(Op::stop_gradient, {x}); }

    // mu + sigma .* eps with eps a non-differentiable input; the pathwise
    // gradient reaches mu and sigma only.
    NodeId reparam_sample(NodeId mu, NodeId sigma, const Tensor& eps);

    // Convenience: elementwise scale / shift by a constant.
    NodeId scale(NodeId x, double c);
    NodeId sub(NodeId a, NodeId b) { return add(a, scale(b, -1.0)); }

    const Tensor& value(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)).value; }
    std::size_t size() const { return nodes_.size(); }
    void clear() { nodes_.clear(); }

    // d(output)/d(leaf) for every leaf on the tape; output must be scalar.
    std::unordered_map<NodeId, Tensor> gradient(NodeId output) const;

private:
    NodeId push(Node n);
    const Node& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }

    std::vector<Node> nodes_;
};

}  // namespace tlrm::diff
