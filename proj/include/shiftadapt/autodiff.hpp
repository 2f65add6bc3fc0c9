#pragma once

#include <cstdint>
#include <vector>

#include "shiftadapt/matrix.hpp"

namespace shiftadapt {

/// Probabilities are clamped to [kProbEps, 1 - kProbEps] before any log so a
/// saturated discriminator cannot produce an infinite loss.
inline constexpr double kProbEps = 1e-7;

/// Plain (non-recorded) weighted mean: (1/n) * sum_i weights[i] * values[i].
/// Throws std::invalid_argument on empty input or length mismatch.
double weighted_mean_loss(const std::vector<double>& values, const std::vector<double>& weights);

/// Reverse-mode tape over a fixed computation graph.
///
/// Usage: create slots (input/parameter/index_input), compose primitives,
/// then bind values and call forward(); backward(node, adjoint) fills
/// per-node adjoints readable through gradient(). The graph is static: all
/// shapes are fixed when an op is recorded, and rebinding inputs lets the
/// same graph run on every minibatch.
class GradTape {
  public:
    using NodeId = std::uint32_t;

    // ---- graph construction ------------------------------------------------
    NodeId input(std::size_t rows, std::size_t cols);
    NodeId parameter(std::size_t rows, std::size_t cols);
    /// Per-row integer indices (class labels); carries no gradient.
    NodeId index_input(std::size_t rows);

    NodeId matmul(NodeId a, NodeId b);
    /// a (n x m) plus a 1 x m bias row broadcast over rows.
    NodeId add_bias(NodeId a, NodeId bias);
    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId relu(NodeId a);
    NodeId sigmoid(NodeId a);
    /// Row-wise softmax.
    NodeId softmax(NodeId a);
    /// Row-wise log softmax evaluated at the label column: n x 1 output.
    /// This is the fused, numerically stable cross-entropy kernel.
    NodeId log_softmax_pick(NodeId logits, NodeId labels);
    /// Fixed column of a as an n x 1 vector.
    NodeId select_col(NodeId a, std::size_t col);
    NodeId one_minus(NodeId a);
    /// log of the input clamped to [kProbEps, 1 - kProbEps].
    NodeId log_clamped(NodeId a);
    NodeId square(NodeId a);
    NodeId scale(NodeId a, double s);
    /// (1/n) * sum_i weights[i] * values[i]; both n x 1, result 1 x 1.
    NodeId mean_weighted(NodeId values, NodeId weights);

    // ---- execution ---------------------------------------------------------
    void bind(NodeId slot, DenseMatrix value);
    void bind_indices(NodeId slot, std::vector<int> indices);

    /// Evaluates every node in recorded order. Throws std::logic_error if a
    /// slot is unbound and std::invalid_argument on shape mismatch.
    void forward();

    /// Seeds `output_adjoint` at `output` and accumulates adjoints down the
    /// tape. Throws std::logic_error if called before forward().
    void backward(NodeId output, const DenseMatrix& output_adjoint);

    const DenseMatrix& value(NodeId id) const;
    /// Adjoint of a node after backward(); for parameter leaves this is the
    /// gradient of the seeded output.
    const DenseMatrix& gradient(NodeId id) const;

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t rows_of(NodeId id) const { return nodes_[id].rows; }
    std::size_t cols_of(NodeId id) const { return nodes_[id].cols; }

  private:
    enum class Op {
        Input,
        IndexInput,
        Parameter,
        MatMul,
        AddBias,
        Add,
        Sub,
        Relu,
        Sigmoid,
        Softmax,
        LogSoftmaxPick,
        SelectCol,
        OneMinus,
        LogClamped,
        Square,
        Scale,
        MeanWeighted,
    };

    struct Node {
        Op op;
        NodeId a = 0;
        NodeId b = 0;
        std::size_t rows = 0;
        std::size_t cols = 0;
        double scalar = 0.0;     // Scale factor
        std::size_t col = 0;     // SelectCol column
        bool bound = false;      // leaves only
        DenseMatrix value;
        DenseMatrix adjoint;
        DenseMatrix scratch;     // cached softmax for LogSoftmaxPick
        std::vector<int> indices;
    };

    NodeId push(Node n);
    const Node& node(NodeId id) const;
    void check_id(NodeId id) const;

    std::vector<Node> nodes_;
    bool forward_done_ = false;
};

}  // namespace shiftadapt
