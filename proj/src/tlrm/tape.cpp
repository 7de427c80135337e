#include "tlrm/tape.hpp"

#include <cmath>

namespace tlrm::diff {

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b)) throw ShapeError(std::string(what) + ": operand shapes differ");
}

double softplus_stable(double x) {
    // log(1 + e^x) without overflow for large |x|
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

}  // namespace

NodeId Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::leaf(Tensor v) {
    if (!v.all_finite()) throw DomainError("leaf tensor has non-finite entries");
    return push({Op::leaf, {}, std::move(v)});
}

NodeId Tape::constant(Tensor v) {
    if (!v.all_finite()) throw DomainError("constant tensor has non-finite entries");
    return push({Op::constant, {}, std::move(v)});
}

NodeId Tape::reparam_sample(NodeId mu, NodeId sigma, const Tensor& eps) {
    const Tensor& m = value(mu);
    const Tensor& s = value(sigma);
    check_same_shape(m, s, "reparam_sample");
    check_same_shape(m, eps, "reparam_sample");
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s[i] <= 0.0) throw DomainError("reparam_sample: sigma must be positive");
    return add(mu, mul(sigma, constant(eps)));
}

NodeId Tape::scale(NodeId x, double c) {
    return mul(x, constant(Tensor::full(value(x).shape(), c)));
}

NodeId Tape::record(Op op, const std::vector<NodeId>& inputs, std::size_t offset,
                    std::size_t extent) {
    auto in = [&](std::size_t i) -> const Tensor& { return value(inputs.at(i)); };

    Tensor out;
    switch (op) {
        case Op::leaf:
        case Op::constant:
            throw ContractError("leaf/constant must be recorded via their own entry points");
        case Op::affine: {
            const Tensor& w = in(0);
            const Tensor& x = in(1);
            const Tensor& b = in(2);
            if (w.rank() != 2 || x.rank() != 1 || b.rank() != 1 || w.cols() != x.size() ||
                w.rows() != b.size())
                throw ShapeError("affine: expects W(m,n), x(n), b(m)");
            out = Tensor::zeros({w.rows()});
            out.vec() = w.mat() * x.vec() + b.vec();
            break;
        }
        case Op::matmul: {
            const Tensor& a = in(0);
            const Tensor& b = in(1);
            if (a.rank() == 2 && b.rank() == 2 && a.cols() == b.rows()) {
                out = Tensor::zeros({a.rows(), b.cols()});
                out.mat() = a.mat() * b.mat();
            } else if (a.rank() == 2 && b.rank() == 1 && a.cols() == b.size()) {
                out = Tensor::zeros({a.rows()});
                out.vec() = a.mat() * b.vec();
            } else {
                throw ShapeError("matmul: incompatible shapes");
            }
            break;
        }
        case Op::add:
        case Op::mul: {
            const Tensor& a = in(0);
            const Tensor& b = in(1);
            check_same_shape(a, b, op == Op::add ? "add" : "mul");
            out = Tensor::zeros(a.shape());
            if (op == Op::add)
                out.vec() = a.vec() + b.vec();
            else
                out.vec() = a.vec().cwiseProduct(b.vec());
            break;
        }
        case Op::concat: {
            if (inputs.empty()) throw ShapeError("concat: no inputs");
            std::size_t n = 0;
            for (std::size_t i = 0; i < inputs.size(); ++i) {
                if (in(i).rank() != 1) throw ShapeError("concat: rank-1 inputs only");
                n += in(i).size();
            }
            out = Tensor::zeros({n});
            std::size_t at = 0;
            for (std::size_t i = 0; i < inputs.size(); ++i) {
                const Tensor& p = in(i);
                for (std::size_t j = 0; j < p.size(); ++j) out[at + j] = p[j];
                at += p.size();
            }
            break;
        }
        case Op::slice: {
            const Tensor& x = in(0);
            if (x.rank() != 1 || extent == 0 || offset + extent > x.size())
                throw ShapeError("slice: range out of bounds");
            out = Tensor::zeros({extent});
            for (std::size_t j = 0; j < extent; ++j) out[j] = x[offset + j];
            break;
        }
        case Op::relu:
        case Op::sigmoid:
        case Op::exp:
        case Op::log:
        case Op::softplus:
        case Op::square: {
            const Tensor& x = in(0);
            out = Tensor::zeros(x.shape());
            for (std::size_t j = 0; j < x.size(); ++j) {
                double v = x[j];
                switch (op) {
                    case Op::relu: out[j] = v > 0.0 ? v : 0.0; break;
                    case Op::sigmoid: out[j] = 1.0 / (1.0 + std::exp(-v)); break;
                    case Op::exp: out[j] = std::exp(v); break;
                    case Op::log:
                        if (v <= 0.0) throw DomainError("log of non-positive value");
                        out[j] = std::log(v);
                        break;
                    case Op::softplus: out[j] = softplus_stable(v); break;
                    case Op::square: out[j] = v * v; break;
                    default: break;
                }
            }
            break;
        }
        case Op::sum:
        case Op::mean: {
            const Tensor& x = in(0);
            double s = x.vec().sum();
            out = Tensor::scalar(op == Op::sum ? s : s / static_cast<double>(x.size()));
            break;
        }
        case Op::stop_gradient: {
            out = in(0);
            break;
        }
    }

    Node n{op, inputs, std::move(out), offset, extent};
    return push(std::move(n));
}

std::unordered_map<NodeId, Tensor> Tape::gradient(NodeId output) const {
    const Node& top = node(output);
    if (top.value.size() != 1) throw ContractError("gradient: output node must be scalar");

    // adjoint per node, allocated on first touch
    std::vector<Tensor> adj(nodes_.size());
    std::vector<bool> touched(nodes_.size(), false);
    auto bump = [&](NodeId id) -> Tensor& {
        auto i = static_cast<std::size_t>(id);
        if (!touched[i]) {
            adj[i] = Tensor::zeros(nodes_[i].value.shape());
            touched[i] = true;
        }
        return adj[i];
    };

    bump(output)[0] = 1.0;

    for (int id = output; id >= 0; --id) {
        auto i = static_cast<std::size_t>(id);
        if (!touched[i]) continue;
        const Node& n = nodes_[i];
        const Tensor& g = adj[i];
        switch (n.op) {
            case Op::leaf:
            case Op::constant:
            case Op::stop_gradient:
                break;
            case Op::affine: {
                const Tensor& w = node(n.inputs[0]).value;
                const Tensor& x = node(n.inputs[1]).value;
                bump(n.inputs[0]).mat().noalias() += g.vec() * x.vec().transpose();
                bump(n.inputs[1]).vec().noalias() += w.mat().transpose() * g.vec();
                bump(n.inputs[2]).vec() += g.vec();
                break;
            }
            case Op::matmul: {
                const Tensor& a = node(n.inputs[0]).value;
                const Tensor& b = node(n.inputs[1]).value;
                if (b.rank() == 2) {
                    bump(n.inputs[0]).mat().noalias() += g.mat() * b.mat().transpose();
                    bump(n.inputs[1]).mat().noalias() += a.mat().transpose() * g.mat();
                } else {
                    bump(n.inputs[0]).mat().noalias() += g.vec() * b.vec().transpose();
                    bump(n.inputs[1]).vec().noalias() += a.mat().transpose() * g.vec();
                }
                break;
            }
            case Op::add:
                bump(n.inputs[0]).vec() += g.vec();
                bump(n.inputs[1]).vec() += g.vec();
                break;
            case Op::mul: {
                const Tensor& a = node(n.inputs[0]).value;
                const Tensor& b = node(n.inputs[1]).value;
                bump(n.inputs[0]).vec() += g.vec().cwiseProduct(b.vec());
                bump(n.inputs[1]).vec() += g.vec().cwiseProduct(a.vec());
                break;
            }
            case Op::concat: {
                std::size_t at = 0;
                for (NodeId in_id : n.inputs) {
                    Tensor& gi = bump(in_id);
                    for (std::size_t j = 0; j < gi.size(); ++j) gi[j] += g[at + j];
                    at += gi.size();
                }
                break;
            }
            case Op::slice: {
                Tensor& gi = bump(n.inputs[0]);
                for (std::size_t j = 0; j < n.extent; ++j) gi[n.offset + j] += g[j];
                break;
            }
            case Op::relu: {
                const Tensor& x = node(n.inputs[0]).value;
                Tensor& gi = bump(n.inputs[0]);
                for (std::size_t j = 0; j < x.size(); ++j)
                    if (x[j] > 0.0) gi[j] += g[j];
                break;
            }
            case Op::sigmoid: {
                Tensor& gi = bump(n.inputs[0]);
                for (std::size_t j = 0; j < n.value.size(); ++j)
                    gi[j] += g[j] * n.value[j] * (1.0 - n.value[j]);
                break;
            }
            case Op::exp: {
                Tensor& gi = bump(n.inputs[0]);
                for (std::size_t j = 0; j < n.value.size(); ++j) gi[j] += g[j] * n.value[j];
                break;
            }
            case Op::log: {
                const Tensor& x = node(n.inputs[0]).value;
                Tensor& gi = bump(n.inputs[0]);
                for (std::size_t j = 0; j < x.size(); ++j) gi[j] += g[j] / x[j];
                break;
            }
            case Op::softplus: {
                const Tensor& x = node(n.inputs[0]).value;
                Tensor& gi = bump(n.inputs[0]);
                for (std::size_t j = 0; j < x.size(); ++j)
                    gi[j] += g[j] / (1.0 + std::exp(-x[j]));
                break;
            }
            case Op::square: {
                const Tensor& x = node(n.inputs[0]).value;
                Tensor& gi = bump(n.inputs[0]);
                for (std::size_t j = 0; j < x.size(); ++j) gi[j] += g[j] * 2.0 * x[j];
                break;
            }
            case Op::sum: {
                Tensor& gi = bump(n.inputs[0]);
                gi.vec().array() += g[0];
                break;
            }
            case Op::mean: {
                Tensor& gi = bump(n.inputs[0]);
                gi.vec().array() += g[0] / static_cast<double>(gi.size());
                break;
            }
        }
    }

    std::unordered_map<NodeId, Tensor> grads;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].op != Op::leaf) continue;
        auto id = static_cast<NodeId>(i);
        grads.emplace(id, touched[i] ? std::move(adj[i]) : Tensor::zeros(nodes_[i].value.shape()));
    }
    return grads;
}

}  // namespace tlrm::diff
