#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shiftadapt/matrix.hpp"

namespace shiftadapt {

/// Plain MLP parameter stack. Layer i maps widths[i] -> widths[i+1] with a
/// relu on every layer except the last.
struct MlpParams {
    std::vector<DenseMatrix> weights;  // in x out
    std::vector<DenseMatrix> biases;   // 1 x out
};

enum class HeadKind { Joint, Split };

struct ModelArch {
    std::size_t input_dim = 2;
    std::size_t class_count = 2;
    std::vector<std::size_t> extractor_widths = {64, 64};  // hidden layers
    std::size_t feature_dim = 16;
    std::size_t head_width = 32;
    HeadKind head = HeadKind::Joint;
};

/// Feature extractor plus classification/discrimination head(s).
/// Joint head: one MLP with c+1 outputs, unit c+1 standing for "target
/// domain". Split head: a c-way classifier and a 1-logit discriminator.
struct ModelBundle {
    ModelArch arch;
    MlpParams extractor;
    MlpParams joint_head;  // used when arch.head == Joint
    MlpParams cls_head;    // used when arch.head == Split
    MlpParams dis_head;    // used when arch.head == Split

    /// Mutable views over every parameter tensor, extractor first. The order
    /// is stable and shared with the optimizer's velocity buffers.
    std::vector<DenseMatrix*> all_params();
    std::vector<const DenseMatrix*> all_params() const;
    std::vector<std::string> param_names() const;
};

/// Symmetric uniform init in +/- sqrt(6 / (fan_in + fan_out)), biases zero.
ModelBundle make_model(const ModelArch& arch, std::uint64_t seed);

/// Forward pass through the extractor: n x d -> n x K. Deterministic; the
/// differentiable twin lives in the training graph builder.
DenseMatrix extract(const ModelBundle& model, const DenseMatrix& x);

/// Joint-head scores for a feature batch.
struct JointScores {
    DenseMatrix joint_probs;        // n x (c+1), softmax rows
    DenseMatrix conditional_probs;  // n x (c+1); cols 1..c renormalized, last col 0
    std::size_t clamped_rows = 0;   // rows where 1 - p_domain fell below the clamp
};

/// Softmax over the c+1 joint logits plus the conditional renormalization
/// conditional[y] = joint[y] / (1 - joint[c+1]) with the denominator clamped
/// at kProbEps (clamped rows are counted, not hidden).
JointScores joint_scores(const ModelBundle& model, const DenseMatrix& features);

/// Conditional renormalization of a single joint row; exposed for tests.
std::vector<double> conditional_from_joint(const std::vector<double>& joint_probs);

struct SplitScores {
    DenseMatrix class_probs;  // n x c softmax rows
    DenseMatrix domain_prob;  // n x 1 sigmoid of the discriminator logit
};

SplitScores split_scores(const ModelBundle& model, const DenseMatrix& features);

/// Class posterior rows (n x c) as the deployed classifier emits them:
/// Joint -> conditional scores over the first c units, Split -> class softmax.
DenseMatrix class_posteriors(const ModelBundle& model, const DenseMatrix& x);

/// Checkpoints are flat JSON: architecture descriptor plus named parameter
/// arrays with shapes. Round-trips are bit-faithful.
void save_checkpoint(const ModelBundle& model, const std::string& path);
ModelBundle load_checkpoint(const std::string& path);

}  // namespace shiftadapt
