#include "shiftadapt/model_graph.hpp"

#include <stdexcept>

namespace shiftadapt {

MlpGraph add_mlp_params(GradTape& tape, std::size_t input_dim,
                        const std::vector<std::size_t>& hidden, std::size_t output_dim) {
    MlpGraph g;
    std::size_t in = input_dim;
    for (std::size_t h : hidden) {
        g.weights.push_back(tape.parameter(in, h));
        g.biases.push_back(tape.parameter(1, h));
        in = h;
    }
    g.weights.push_back(tape.parameter(in, output_dim));
    g.biases.push_back(tape.parameter(1, output_dim));
    return g;
}

GradTape::NodeId mlp_forward_graph(GradTape& tape, const MlpGraph& mlp, GradTape::NodeId x) {
    GradTape::NodeId h = x;
    for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
        h = tape.add_bias(tape.matmul(h, mlp.weights[l]), mlp.biases[l]);
        if (l + 1 < mlp.weights.size()) {
            h = tape.relu(h);
        }
    }
    return h;
}

void bind_mlp(GradTape& tape, const MlpGraph& slots, const MlpParams& params) {
    if (slots.weights.size() != params.weights.size()) {
        throw std::invalid_argument("bind_mlp: layer count mismatch");
    }
    for (std::size_t l = 0; l < slots.weights.size(); ++l) {
        tape.bind(slots.weights[l], params.weights[l]);
        tape.bind(slots.biases[l], params.biases[l]);
    }
}

namespace {

GradTape::NodeId ones_input(GradTape& tape, std::size_t n) {
    const GradTape::NodeId id = tape.input(n, 1);
    tape.bind(id, DenseMatrix::filled(n, 1, 1.0));
    return id;
}

}  // namespace

TrainGraph build_joint_graph(const ModelArch& arch, std::size_t ns, std::size_t nt, double lambda) {
    if (arch.head != HeadKind::Joint) {
        throw std::invalid_argument("build_joint_graph: arch must use the joint head");
    }
    const std::size_t c = arch.class_count;
    TrainGraph g;
    g.ns = ns;
    g.nt = nt;
    g.joint = true;
    GradTape& t = g.tape;

    g.x_s = t.input(ns, arch.input_dim);
    g.y_s = t.index_input(ns);
    g.w_cls = t.input(ns, 1);
    g.x_t = t.input(nt, arch.input_dim);
    const GradTape::NodeId ones_s = ones_input(t, ns);
    const GradTape::NodeId ones_t = ones_input(t, nt);

    g.extractor = add_mlp_params(t, arch.input_dim, arch.extractor_widths, arch.feature_dim);
    g.head = add_mlp_params(t, arch.feature_dim, {arch.head_width}, c + 1);

    const auto f_s = mlp_forward_graph(t, g.extractor, g.x_s);
    const auto f_t = mlp_forward_graph(t, g.extractor, g.x_t);
    const auto logits_s = mlp_forward_graph(t, g.head, f_s);
    const auto logits_t = mlp_forward_graph(t, g.head, f_t);

    // log of the conditional class score: log p_y - log(1 - p_{c+1}).
    const auto log_py = t.log_softmax_pick(logits_s, g.y_s);
    const auto p_s = t.softmax(logits_s);
    const auto log_not_dom_s = t.log_clamped(t.one_minus(t.select_col(p_s, c)));
    const auto cond_log = t.sub(log_py, log_not_dom_s);
    g.term_cls = t.mean_weighted(cond_log, g.w_cls);

    // Domain terms: source rows should score "not target", target rows "target".
    const auto term_src_dom = t.mean_weighted(log_not_dom_s, ones_s);
    GradTape::NodeId all_dom = t.index_input(nt);
    t.bind_indices(all_dom, std::vector<int>(nt, static_cast<int>(c)));
    const auto log_dom_t = t.log_softmax_pick(logits_t, all_dom);
    const auto term_tgt_dom = t.mean_weighted(log_dom_t, ones_t);
    g.term_adv_d = t.add(term_src_dom, term_tgt_dom);

    g.loss_head = t.scale(t.add(g.term_cls, g.term_adv_d), -1.0);

    const auto p_t_probs = t.softmax(logits_t);
    const auto log_not_dom_t = t.log_clamped(t.one_minus(t.select_col(p_t_probs, c)));
    g.term_adv_f = t.mean_weighted(log_not_dom_t, ones_t);
    g.loss_ext = t.scale(t.add(g.term_cls, t.scale(g.term_adv_f, lambda)), -1.0);
    return g;
}

TrainGraph build_split_graph(const ModelArch& arch, std::size_t ns, std::size_t nt, double lambda,
                             bool weighted_dis) {
    if (arch.head != HeadKind::Split) {
        throw std::invalid_argument("build_split_graph: arch must use the split head");
    }
    TrainGraph g;
    g.ns = ns;
    g.nt = nt;
    g.joint = false;
    GradTape& t = g.tape;

    g.x_s = t.input(ns, arch.input_dim);
    g.y_s = t.index_input(ns);
    g.w_cls = t.input(ns, 1);
    g.x_t = t.input(nt, arch.input_dim);
    const GradTape::NodeId ones_t = ones_input(t, nt);
    g.w_dis = weighted_dis ? t.input(ns, 1) : ones_input(t, ns);

    g.extractor = add_mlp_params(t, arch.input_dim, arch.extractor_widths, arch.feature_dim);
    g.head = add_mlp_params(t, arch.feature_dim, {arch.head_width}, arch.class_count);
    g.dis = add_mlp_params(t, arch.feature_dim, {arch.head_width}, 1);

    const auto f_s = mlp_forward_graph(t, g.extractor, g.x_s);
    const auto f_t = mlp_forward_graph(t, g.extractor, g.x_t);

    const auto log_py = t.log_softmax_pick(mlp_forward_graph(t, g.head, f_s), g.y_s);
    g.term_cls = t.mean_weighted(log_py, g.w_cls);

    const auto d_s = t.sigmoid(mlp_forward_graph(t, g.dis, f_s));
    const auto d_t = t.sigmoid(mlp_forward_graph(t, g.dis, f_t));
    const auto term_dis_s = t.mean_weighted(t.log_clamped(t.one_minus(d_s)), g.w_dis);
    const auto term_dis_t = t.mean_weighted(t.log_clamped(d_t), ones_t);
    g.term_adv_d = t.add(term_dis_s, term_dis_t);

    g.loss_head = t.scale(t.add(g.term_cls, g.term_adv_d), -1.0);

    g.term_adv_f = t.mean_weighted(t.log_clamped(t.one_minus(d_t)), ones_t);
    g.loss_ext = t.scale(t.add(g.term_cls, t.scale(g.term_adv_f, lambda)), -1.0);
    return g;
}

void bind_model(TrainGraph& graph, const ModelBundle& model) {
    bind_mlp(graph.tape, graph.extractor, model.extractor);
    if (graph.joint) {
        bind_mlp(graph.tape, graph.head, model.joint_head);
    } else {
        bind_mlp(graph.tape, graph.head, model.cls_head);
        bind_mlp(graph.tape, graph.dis, model.dis_head);
    }
}

}  // namespace shiftadapt
