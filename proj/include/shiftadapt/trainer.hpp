#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shiftadapt/estimator.hpp"
#include "shiftadapt/model.hpp"
#include "shiftadapt/simplex.hpp"
#include "shiftadapt/synth.hpp"

namespace shiftadapt {

/// Training modes, one per ablation arm:
///   source_only      supervised fit on source, no adaptation
///   dann_baseline    split heads, marginal feature alignment
///   joint_no_gamma   joint c+1 head, unweighted
///   cls_full         joint head + estimated class weights + fade-in
///   cls_split_heads  class weights on split heads (no joint parameterization)
enum class TrainMode { SourceOnly, DannBaseline, JointNoGamma, ClsFull, ClsSplitHeads };

TrainMode parse_train_mode(const std::string& name);
std::string to_string(TrainMode mode);

struct OptimizerConfig {
    double lr = 1e-2;
    double momentum = 0.9;
};

struct EstimatorConfig {
    int steps = 50;        // projected-gradient iterations per estimate
    double lr = 0.1;
    double ema_decay = 0.9;
};

struct TrainConfig {
    TrainMode mode = TrainMode::ClsFull;
    double lambda = 1.0;  // adversarial weight on the extractor objective
    int epochs = 10;
    std::size_t batch_size = 128;
    OptimizerConfig optimizer;
    bool fade_in = true;
    EstimatorConfig estimator;
    std::uint64_t seed = 0;
    /// Fraction of each domain held out of every update, used for the
    /// domain-accuracy metric.
    double holdout_fraction = 0.2;
    std::vector<std::size_t> extractor_widths = {64, 64};
    std::size_t feature_dim = 16;
    std::size_t head_width = 32;
};

struct EpochMetrics {
    int epoch = 0;
    double src_acc = 0.0;
    double tgt_acc = 0.0;  // deployed accuracy: corrected for cls modes, raw otherwise
    double dom_acc = 0.0;  // balanced domain accuracy on held-out rows
    double est_kl = 0.0;   // KL(deployed estimate, sealed target prior)
    double est_l1 = 0.0;
    double loss_cls = 0.0;
    double loss_adv_d = 0.0;
    double loss_adv_f = 0.0;
    double alpha = 0.0;
    double est_objective = 0.0;  // mean-matching objective (estimator trace only)
};

struct TrainEvent {
    int epoch = 0;
    std::string what;
};

struct TrainMetrics {
    std::vector<EpochMetrics> history;  // epoch 0 = pre-training evaluation
    std::vector<TrainEvent> events;
};

struct TrainResult {
    ModelBundle model;
    MeanMatchState estimator;
    TrainMetrics metrics;
    SimplexVector final_estimate = SimplexVector::uniform(2);  // deployed at end
    GammaWeights final_gamma;
};

/// Objective values at the start of a step, in descent sense (lower better).
struct StepLosses {
    double cls = 0.0;
    double adv_d = 0.0;
    double adv_f = 0.0;
};

/// The full alternating loop: per epoch, re-estimate the target prior from
/// accumulated feature means (Infer), then run the adversarial updates over
/// minibatches while the estimate stays frozen (Align). Deterministic per
/// config and seed.
TrainResult run_training(const DomainPair& pair, const TrainConfig& config);

/// One adversarial round on a split-head model: classifier+discriminator
/// update, then extractor update. Parameters change in place.
StepLosses step_baseline(ModelBundle& model, const DenseMatrix& source_x,
                         const std::vector<int>& source_y, const DenseMatrix& target_x,
                         double lambda, const OptimizerConfig& opt = {});

/// Same round on the joint c+1 head. With gamma absent every class weight is
/// one and the losses coincide bit-for-bit with the unweighted objective.
StepLosses step_joint(ModelBundle& model, const DenseMatrix& source_x,
                      const std::vector<int>& source_y, const DenseMatrix& target_x,
                      const std::optional<GammaWeights>& gamma, double lambda = 1.0,
                      const OptimizerConfig& opt = {});

/// Balanced accuracy of a freshly trained probe discriminator on held-out
/// extracted features. 0.5 means the feature marginals are indistinguishable.
double domain_confusion_diagnostic(const ModelBundle& model, const DomainPair& pair,
                                   std::uint64_t seed = 0);

/// Raised by concept_shift_probe when no feature bin clears the minimum
/// per-domain count.
struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Mean absolute gap between source and target class-given-feature
/// frequencies, measured on a binned 1-D projection of the extracted
/// features. Reads sealed target labels; evaluation only.
double concept_shift_probe(const ModelBundle& model, const DomainPair& pair,
                           std::size_t bins = 16, std::size_t min_bin_count = 10);

/// `epoch, src_acc, tgt_acc, dom_acc, est_kl, est_l1, loss_cls, loss_adv_d,
/// loss_adv_f, alpha` — one row per epoch.
void write_metrics_csv(const std::string& path, const TrainMetrics& metrics);

/// `epoch, kl_to_truth, l1_to_truth, objective, alpha`.
void write_estimator_trace_csv(const std::string& path, const TrainMetrics& metrics);

}  // namespace shiftadapt
