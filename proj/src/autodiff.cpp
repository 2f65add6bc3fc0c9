#include "shiftadapt/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shiftadapt {

double weighted_mean_loss(const std::vector<double>& values, const std::vector<double>& weights) {
    if (values.empty()) {
        throw std::invalid_argument("weighted_mean_loss: empty batch");
    }
    if (values.size() != weights.size()) {
        throw std::invalid_argument("weighted_mean_loss: length mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
            throw std::invalid_argument("weighted_mean_loss: weights must be finite and >= 0");
        }
        acc += weights[i] * values[i];
    }
    return acc / static_cast<double>(values.size());
}

GradTape::NodeId GradTape::push(Node n) {
    nodes_.push_back(std::move(n));
    forward_done_ = false;
    return static_cast<NodeId>(nodes_.size() - 1);
}

void GradTape::check_id(NodeId id) const {
    if (id >= nodes_.size()) {
        throw std::invalid_argument("GradTape: node id out of range");
    }
}

const GradTape::Node& GradTape::node(NodeId id) const {
    check_id(id);
    return nodes_[id];
}

GradTape::NodeId GradTape::input(std::size_t rows, std::size_t cols) {
    Node n;
    n.op = Op::Input;
    n.rows = rows;
    n.cols = cols;
    return push(std::move(n));
}

GradTape::NodeId GradTape::parameter(std::size_t rows, std::size_t cols) {
    Node n;
    n.op = Op::Parameter;
    n.rows = rows;
    n.cols = cols;
    return push(std::move(n));
}

GradTape::NodeId GradTape::index_input(std::size_t rows) {
    Node n;
    n.op = Op::IndexInput;
    n.rows = rows;
    n.cols = 1;
    return push(std::move(n));
}

GradTape::NodeId GradTape::matmul(NodeId a, NodeId b) {
    const Node& na = node(a);
    const Node& nb = node(b);
    if (na.cols != nb.rows) {
        throw std::invalid_argument("GradTape::matmul: inner dimensions do not match");
    }
    Node n;
    n.op = Op::MatMul;
    n.a = a;
    n.b = b;
    n.rows = na.rows;
    n.cols = nb.cols;
    return push(std::move(n));
}

GradTape::NodeId GradTape::add_bias(NodeId a, NodeId bias) {
    const Node& na = node(a);
    const Node& nb = node(bias);
    if (nb.rows != 1 || nb.cols != na.cols) {
        throw std::invalid_argument("GradTape::add_bias: bias must be 1 x cols");
    }
    Node n;
    n.op = Op::AddBias;
    n.a = a;
    n.b = bias;
    n.rows = na.rows;
    n.cols = na.cols;
    return push(std::move(n));
}

GradTape::NodeId GradTape::add(NodeId a, NodeId b) {
    const Node& na = node(a);
    const Node& nb = node(b);
    if (na.rows != nb.rows || na.cols != nb.cols) {
        throw std::invalid_argument("GradTape::add: shape mismatch");
    }
    Node n;
    n.op = Op::Add;
    n.a = a;
    n.b = b;
    n.rows = na.rows;
    n.cols = na.cols;
    return push(std::move(n));
}

GradTape::NodeId GradTape::sub(NodeId a, NodeId b) {
    const Node& na = node(a);
    const Node& nb = node(b);
    if (na.rows != nb.rows || na.cols != nb.cols) {
        throw std::invalid_argument("GradTape::sub: shape mismatch");
    }
    Node n;
    n.op = Op::Sub;
    n.a = a;
    n.b = b;
    n.rows = na.rows;
    n.cols = na.cols;
    return push(std::move(n));
}

GradTape::NodeId GradTape::relu(NodeId a) {
    const Node& na = node(a);
    Node n;
    n.op = Op::Relu;
    n.a = a;
    n.rows = na.rows;
    n.cols = na.cols;
    return push(std::move(n));
}

GradTape::NodeId GradTape::sigmoid(NodeId a) {
    const Node& na = node(a);
    Node n;
    n.op = Op::Sigmoid;
    n.a = a;
    n.rows = na.rows;
    n.cols = na.cols;
    return push(std::move(n));
}

GradTape::NodeId GradTape::softmax(NodeId a) {
    const Node& na = node(a);
    Node n;
    n.op = Op::Softmax;
    n.a = a;
    n.rows = na.rows;
    n.cols = na.cols;
    return push(std::move(n));
}

GradTape::NodeId GradTape::log_softmax_pick(NodeId logits, NodeId labels) {
    const Node& nl = node(logits);
    const Node& ny = node(labels);
    if (ny.op != Op::IndexInput) {
        throw std::invalid_argument("GradTape::log_softmax_pick: labels must be an index_input");
    }
    if (ny.rows != nl.rows) {
        throw std::invalid_argument("GradTape::log_softmax_pick: label count must match rows");
    }
    Node n;
    n.op = Op::LogSoftmaxPick;
    n.a = logits;
    n.b = labels;
    n.rows = nl.rows;
    n.cols = 1;
    return push(std::move(n));
}

GradTape::NodeId GradTape::select_col(NodeId a, std::size_t col) {
    const Node& na = node(a);
    if (col >= na.cols) {
        throw std::invalid_argument("GradTape::select_col: column out of range");
    }
    Node n;
    n.op = Op::SelectCol;
    n.a = a;
    n.col = col;
    n.rows = na.rows;
    n.cols = 1;
    return push(std::move(n));
}

GradTape::NodeId GradTape::one_minus(NodeId a) {
    const Node& na = node(a);
    Node n;
    n.op = Op::OneMinus;
    n.a = a;
    n.rows = na.rows;
    n.cols = na.cols;
    return push(std::move(n));
}

GradTape::NodeId GradTape::log_clamped(NodeId a) {
    const Node& na = node(a);
    Node n;
    n.op = Op::LogClamped;
    n.a = a;
    n.rows = na.rows;
    n.cols = na.cols;
    return push(std::move(n));
}

GradTape::NodeId GradTape::square(NodeId a) {
    const Node& na = node(a);
    Node n;
    n.op = Op::Square;
    n.a = a;
    n.rows = na.rows;
    n.cols = na.cols;
    return push(std::move(n));
}

GradTape::NodeId GradTape::scale(NodeId a, double s) {
    const Node& na = node(a);
    Node n;
    n.op = Op::Scale;
    n.a = a;
    n.scalar = s;
    n.rows = na.rows;
    n.cols = na.cols;
    return push(std::move(n));
}

GradTape::NodeId GradTape::mean_weighted(NodeId values, NodeId weights) {
    const Node& nv = node(values);
    const Node& nw = node(weights);
    if (nv.cols != 1 || nw.cols != 1 || nv.rows != nw.rows) {
        throw std::invalid_argument("GradTape::mean_weighted: values and weights must be matching n x 1");
    }
    if (nv.rows == 0) {
        throw std::invalid_argument("GradTape::mean_weighted: empty batch");
    }
    Node n;
    n.op = Op::MeanWeighted;
    n.a = values;
    n.b = weights;
    n.rows = 1;
    n.cols = 1;
    return push(std::move(n));
}

void GradTape::bind(NodeId slot, DenseMatrix value) {
    check_id(slot);
    Node& n = nodes_[slot];
    if (n.op != Op::Input && n.op != Op::Parameter) {
        throw std::invalid_argument("GradTape::bind: node is not an input or parameter slot");
    }
    if (value.rows != n.rows || value.cols != n.cols) {
        throw std::invalid_argument("GradTape::bind: shape does not match the recorded graph");
    }
    n.value = std::move(value);
    n.bound = true;
    forward_done_ = false;
}

void GradTape::bind_indices(NodeId slot, std::vector<int> indices) {
    check_id(slot);
    Node& n = nodes_[slot];
    if (n.op != Op::IndexInput) {
        throw std::invalid_argument("GradTape::bind_indices: node is not an index input");
    }
    if (indices.size() != n.rows) {
        throw std::invalid_argument("GradTape::bind_indices: length does not match the recorded graph");
    }
    n.indices = std::move(indices);
    n.bound = true;
    forward_done_ = false;
}

void GradTape::forward() {
    for (Node& n : nodes_) {
        switch (n.op) {
            case Op::Input:
            case Op::Parameter:
                if (!n.bound) throw std::logic_error("GradTape::forward: unbound slot");
                break;
            case Op::IndexInput: {
                if (!n.bound) throw std::logic_error("GradTape::forward: unbound index input");
                for (int idx : n.indices) {
                    if (idx < 0) throw std::invalid_argument("GradTape: negative label index");
                }
                break;
            }
            case Op::MatMul:
                n.value = shiftadapt::matmul(nodes_[n.a].value, nodes_[n.b].value);
                break;
            case Op::AddBias:
                n.value = add_row_broadcast(nodes_[n.a].value, nodes_[n.b].value);
                break;
            case Op::Add: {
                n.value = nodes_[n.a].value;
                const auto& bv = nodes_[n.b].value.data;
                for (std::size_t i = 0; i < n.value.data.size(); ++i) n.value.data[i] += bv[i];
                break;
            }
            case Op::Sub: {
                n.value = nodes_[n.a].value;
                const auto& bv = nodes_[n.b].value.data;
                for (std::size_t i = 0; i < n.value.data.size(); ++i) n.value.data[i] -= bv[i];
                break;
            }
            case Op::Relu: {
                n.value = nodes_[n.a].value;
                for (double& v : n.value.data) v = v > 0.0 ? v : 0.0;
                break;
            }
            case Op::Sigmoid: {
                n.value = nodes_[n.a].value;
                for (double& v : n.value.data) v = 1.0 / (1.0 + std::exp(-v));
                break;
            }
            case Op::Softmax: {
                const DenseMatrix& x = nodes_[n.a].value;
                n.value = DenseMatrix(x.rows, x.cols);
                for (std::size_t i = 0; i < x.rows; ++i) {
                    double mx = x.at(i, 0);
                    for (std::size_t j = 1; j < x.cols; ++j) mx = std::max(mx, x.at(i, j));
                    double sum = 0.0;
                    for (std::size_t j = 0; j < x.cols; ++j) {
                        const double e = std::exp(x.at(i, j) - mx);
                        n.value.at(i, j) = e;
                        sum += e;
                    }
                    for (std::size_t j = 0; j < x.cols; ++j) n.value.at(i, j) /= sum;
                }
                break;
            }
            case Op::LogSoftmaxPick: {
                const DenseMatrix& x = nodes_[n.a].value;
                const auto& idx = nodes_[n.b].indices;
                n.value = DenseMatrix(x.rows, 1);
                n.scratch = DenseMatrix(x.rows, x.cols);  // softmax kept for backward
                for (std::size_t i = 0; i < x.rows; ++i) {
                    if (static_cast<std::size_t>(idx[i]) >= x.cols) {
                        throw std::invalid_argument("GradTape: label index out of range");
                    }
                    double mx = x.at(i, 0);
                    for (std::size_t j = 1; j < x.cols; ++j) mx = std::max(mx, x.at(i, j));
                    double sum = 0.0;
                    for (std::size_t j = 0; j < x.cols; ++j) sum += std::exp(x.at(i, j) - mx);
                    const double lse = mx + std::log(sum);
                    for (std::size_t j = 0; j < x.cols; ++j) {
                        n.scratch.at(i, j) = std::exp(x.at(i, j) - lse);
                    }
                    n.value.at(i, 0) = x.at(i, static_cast<std::size_t>(idx[i])) - lse;
                }
                break;
            }
            case Op::SelectCol: {
                const DenseMatrix& x = nodes_[n.a].value;
                n.value = DenseMatrix(x.rows, 1);
                for (std::size_t i = 0; i < x.rows; ++i) n.value.at(i, 0) = x.at(i, n.col);
                break;
            }
            case Op::OneMinus: {
                n.value = nodes_[n.a].value;
                for (double& v : n.value.data) v = 1.0 - v;
                break;
            }
            case Op::LogClamped: {
                n.value = nodes_[n.a].value;
                for (double& v : n.value.data) {
                    v = std::log(std::clamp(v, kProbEps, 1.0 - kProbEps));
                }
                break;
            }
            case Op::Square: {
                n.value = nodes_[n.a].value;
                for (double& v : n.value.data) v = v * v;
                break;
            }
            case Op::Scale: {
                n.value = nodes_[n.a].value;
                for (double& v : n.value.data) v *= n.scalar;
                break;
            }
            case Op::MeanWeighted: {
                const DenseMatrix& v = nodes_[n.a].value;
                const DenseMatrix& w = nodes_[n.b].value;
                double acc = 0.0;
                for (std::size_t i = 0; i < v.rows; ++i) acc += w.at(i, 0) * v.at(i, 0);
                n.value = DenseMatrix(1, 1);
                n.value.at(0, 0) = acc / static_cast<double>(v.rows);
                break;
            }
        }
    }
    forward_done_ = true;
}

void GradTape::backward(NodeId output, const DenseMatrix& output_adjoint) {
    check_id(output);
    if (!forward_done_) {
        throw std::logic_error("GradTape::backward: forward() has not run on the current bindings");
    }
    Node& out = nodes_[output];
    if (output_adjoint.rows != out.rows || output_adjoint.cols != out.cols) {
        throw std::invalid_argument("GradTape::backward: adjoint shape mismatch");
    }
    for (Node& n : nodes_) {
        n.adjoint = DenseMatrix(n.rows, n.cols);
    }
    out.adjoint = output_adjoint;

    // Node ids are topological by construction; walk in reverse.
    for (std::size_t k = nodes_.size(); k-- > 0;) {
        Node& n = nodes_[k];
        const DenseMatrix& g = n.adjoint;
        switch (n.op) {
            case Op::Input:
            case Op::Parameter:
            case Op::IndexInput:
                break;
            case Op::MatMul: {
                Node& a = nodes_[n.a];
                Node& b = nodes_[n.b];
                const DenseMatrix da = shiftadapt::matmul(g, transpose(b.value));
                const DenseMatrix db = shiftadapt::matmul(transpose(a.value), g);
                for (std::size_t i = 0; i < da.data.size(); ++i) a.adjoint.data[i] += da.data[i];
                for (std::size_t i = 0; i < db.data.size(); ++i) b.adjoint.data[i] += db.data[i];
                break;
            }
            case Op::AddBias: {
                Node& a = nodes_[n.a];
                Node& bias = nodes_[n.b];
                for (std::size_t i = 0; i < g.data.size(); ++i) a.adjoint.data[i] += g.data[i];
                for (std::size_t i = 0; i < g.rows; ++i) {
                    for (std::size_t j = 0; j < g.cols; ++j) {
                        bias.adjoint.data[j] += g.at(i, j);
                    }
                }
                break;
            }
            case Op::Add: {
                Node& a = nodes_[n.a];
                Node& b = nodes_[n.b];
                for (std::size_t i = 0; i < g.data.size(); ++i) {
                    a.adjoint.data[i] += g.data[i];
                    b.adjoint.data[i] += g.data[i];
                }
                break;
            }
            case Op::Sub: {
                Node& a = nodes_[n.a];
                Node& b = nodes_[n.b];
                for (std::size_t i = 0; i < g.data.size(); ++i) {
                    a.adjoint.data[i] += g.data[i];
                    b.adjoint.data[i] -= g.data[i];
                }
                break;
            }
            case Op::Relu: {
                Node& a = nodes_[n.a];
                for (std::size_t i = 0; i < g.data.size(); ++i) {
                    if (a.value.data[i] > 0.0) a.adjoint.data[i] += g.data[i];
                }
                break;
            }
            case Op::Sigmoid: {
                Node& a = nodes_[n.a];
                for (std::size_t i = 0; i < g.data.size(); ++i) {
                    const double s = n.value.data[i];
                    a.adjoint.data[i] += g.data[i] * s * (1.0 - s);
                }
                break;
            }
            case Op::Softmax: {
                Node& a = nodes_[n.a];
                for (std::size_t i = 0; i < n.rows; ++i) {
                    double dot = 0.0;
                    for (std::size_t j = 0; j < n.cols; ++j) dot += g.at(i, j) * n.value.at(i, j);
                    for (std::size_t j = 0; j < n.cols; ++j) {
                        a.adjoint.at(i, j) += n.value.at(i, j) * (g.at(i, j) - dot);
                    }
                }
                break;
            }
            case Op::LogSoftmaxPick: {
                Node& a = nodes_[n.a];
                const auto& idx = nodes_[n.b].indices;
                for (std::size_t i = 0; i < n.rows; ++i) {
                    const double gi = g.at(i, 0);
                    if (gi == 0.0) continue;
                    for (std::size_t j = 0; j < a.cols; ++j) {
                        a.adjoint.at(i, j) -= gi * n.scratch.at(i, j);
                    }
                    a.adjoint.at(i, static_cast<std::size_t>(idx[i])) += gi;
                }
                break;
            }
            case Op::SelectCol: {
                Node& a = nodes_[n.a];
                for (std::size_t i = 0; i < n.rows; ++i) {
                    a.adjoint.at(i, n.col) += g.at(i, 0);
                }
                break;
            }
            case Op::OneMinus: {
                Node& a = nodes_[n.a];
                for (std::size_t i = 0; i < g.data.size(); ++i) a.adjoint.data[i] -= g.data[i];
                break;
            }
            case Op::LogClamped: {
                Node& a = nodes_[n.a];
                for (std::size_t i = 0; i < g.data.size(); ++i) {
                    const double x = a.value.data[i];
                    if (x > kProbEps && x < 1.0 - kProbEps) {
                        a.adjoint.data[i] += g.data[i] / x;
                    }
                }
                break;
            }
            case Op::Square: {
                Node& a = nodes_[n.a];
                for (std::size_t i = 0; i < g.data.size(); ++i) {
                    a.adjoint.data[i] += 2.0 * a.value.data[i] * g.data[i];
                }
                break;
            }
            case Op::Scale: {
                Node& a = nodes_[n.a];
                for (std::size_t i = 0; i < g.data.size(); ++i) {
                    a.adjoint.data[i] += n.scalar * g.data[i];
                }
                break;
            }
            case Op::MeanWeighted: {
                Node& v = nodes_[n.a];
                Node& w = nodes_[n.b];
                const double gi = g.at(0, 0) / static_cast<double>(v.rows);
                for (std::size_t i = 0; i < v.rows; ++i) {
                    v.adjoint.at(i, 0) += gi * w.value.at(i, 0);
                    w.adjoint.at(i, 0) += gi * v.value.at(i, 0);
                }
                break;
            }
        }
    }
}

const DenseMatrix& GradTape::value(NodeId id) const {
    check_id(id);
    if (!forward_done_) {
        throw std::logic_error("GradTape::value: forward() has not run on the current bindings");
    }
    return nodes_[id].value;
}

const DenseMatrix& GradTape::gradient(NodeId id) const {
    check_id(id);
    return nodes_[id].adjoint;
}

}  // namespace shiftadapt
