#pragma once

#include "shiftadapt/autodiff.hpp"
#include "shiftadapt/model.hpp"

namespace shiftadapt {

/// Parameter slots for one MLP inside a tape.
struct MlpGraph {
    std::vector<GradTape::NodeId> weights;
    std::vector<GradTape::NodeId> biases;
};

MlpGraph add_mlp_params(GradTape& tape, std::size_t input_dim,
                        const std::vector<std::size_t>& hidden, std::size_t output_dim);

/// Forward graph of the MLP: relu on hidden layers, linear output.
GradTape::NodeId mlp_forward_graph(GradTape& tape, const MlpGraph& mlp, GradTape::NodeId x);

void bind_mlp(GradTape& tape, const MlpGraph& slots, const MlpParams& params);

/// One recorded graph holding both per-batch objectives of the adversarial
/// game: the head step (classifier/discriminator ascent) and the extractor
/// step. Built once per run for a fixed batch shape; inputs are rebound.
///
/// All `term_*` nodes are in maximize sense; `loss_*` nodes are their
/// negations and are what gradient descent sees.
struct TrainGraph {
    GradTape tape;
    std::size_t ns = 0;
    std::size_t nt = 0;
    bool joint = false;

    // Input slots.
    GradTape::NodeId x_s = 0;
    GradTape::NodeId y_s = 0;       // source labels, 0-based
    GradTape::NodeId w_cls = 0;     // ns x 1 per-sample class-term weights (gamma_y or ones)
    GradTape::NodeId w_dis = 0;     // ns x 1 discriminator source weights (split graphs)
    GradTape::NodeId x_t = 0;

    // Parameter slots.
    MlpGraph extractor;
    MlpGraph head;  // joint head, or the classifier when split
    MlpGraph dis;   // split discriminator

    // Objective terms (maximize sense).
    GradTape::NodeId term_cls = 0;    // weighted class term
    GradTape::NodeId term_adv_d = 0;  // discriminator objective (both domains)
    GradTape::NodeId term_adv_f = 0;  // extractor's target-side adversarial term (unscaled)

    // Descent losses.
    GradTape::NodeId loss_head = 0;  // head step: classifier (+ discriminator) params
    GradTape::NodeId loss_ext = 0;   // extractor step
};

/// Joint c+1 parameterization. The head objective is the weighted conditional
/// class score plus both domain terms; the extractor objective is the weighted
/// conditional score plus lambda times the target "looks source-like" term.
TrainGraph build_joint_graph(const ModelArch& arch, std::size_t ns, std::size_t nt, double lambda);

/// Split classifier + discriminator. `weighted_dis` additionally applies the
/// per-sample class weights to the discriminator's source term so the
/// alignment target is the reweighted source feature distribution.
TrainGraph build_split_graph(const ModelArch& arch, std::size_t ns, std::size_t nt, double lambda,
                             bool weighted_dis);

/// Binds every parameter slot in the graph from the bundle.
void bind_model(TrainGraph& graph, const ModelBundle& model);

}  // namespace shiftadapt
