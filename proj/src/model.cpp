#include "shiftadapt/model.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "shiftadapt/autodiff.hpp"
#include "shiftadapt/rng.hpp"

namespace shiftadapt {

namespace {

std::vector<std::size_t> layer_sizes(std::size_t in, const std::vector<std::size_t>& hidden,
                                     std::size_t out) {
    std::vector<std::size_t> sizes;
    sizes.push_back(in);
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(out);
    return sizes;
}

MlpParams init_mlp(const std::vector<std::size_t>& sizes, Rng& rng) {
    MlpParams p;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const std::size_t fan_in = sizes[l];
        const std::size_t fan_out = sizes[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        DenseMatrix w(fan_in, fan_out);
        for (double& v : w.data) v = (2.0 * rng.uniform() - 1.0) * bound;
        p.weights.push_back(std::move(w));
        p.biases.push_back(DenseMatrix(1, fan_out));
    }
    return p;
}

DenseMatrix mlp_forward(const MlpParams& p, const DenseMatrix& x) {
    DenseMatrix h = x;
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        h = add_row_broadcast(matmul(h, p.weights[l]), p.biases[l]);
        if (l + 1 < p.weights.size()) {
            for (double& v : h.data) v = v > 0.0 ? v : 0.0;
        }
    }
    return h;
}

void collect(std::vector<DenseMatrix*>& out, MlpParams& p) {
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        out.push_back(&p.weights[l]);
        out.push_back(&p.biases[l]);
    }
}

void collect_names(std::vector<std::string>& out, const std::string& prefix, const MlpParams& p) {
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        out.push_back(prefix + ".w" + std::to_string(l));
        out.push_back(prefix + ".b" + std::to_string(l));
    }
}

DenseMatrix softmax_rows(const DenseMatrix& logits) {
    DenseMatrix out(logits.rows, logits.cols);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        double mx = logits.at(i, 0);
        for (std::size_t j = 1; j < logits.cols; ++j) mx = std::max(mx, logits.at(i, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < logits.cols; ++j) {
            const double e = std::exp(logits.at(i, j) - mx);
            out.at(i, j) = e;
            sum += e;
        }
        for (std::size_t j = 0; j < logits.cols; ++j) out.at(i, j) /= sum;
    }
    return out;
}

}  // namespace

std::vector<DenseMatrix*> ModelBundle::all_params() {
    std::vector<DenseMatrix*> out;
    collect(out, extractor);
    if (arch.head == HeadKind::Joint) {
        collect(out, joint_head);
    } else {
        collect(out, cls_head);
        collect(out, dis_head);
    }
    return out;
}

std::vector<const DenseMatrix*> ModelBundle::all_params() const {
    auto mut = const_cast<ModelBundle*>(this)->all_params();
    return std::vector<const DenseMatrix*>(mut.begin(), mut.end());
}

std::vector<std::string> ModelBundle::param_names() const {
    std::vector<std::string> names;
    collect_names(names, "extractor", extractor);
    if (arch.head == HeadKind::Joint) {
        collect_names(names, "joint_head", joint_head);
    } else {
        collect_names(names, "cls_head", cls_head);
        collect_names(names, "dis_head", dis_head);
    }
    return names;
}

ModelBundle make_model(const ModelArch& arch, std::uint64_t seed) {
    if (arch.class_count < 2) {
        throw std::invalid_argument("make_model: need at least two classes");
    }
    Rng rng(seed);
    ModelBundle m;
    m.arch = arch;
    m.extractor = init_mlp(layer_sizes(arch.input_dim, arch.extractor_widths, arch.feature_dim), rng);
    if (arch.head == HeadKind::Joint) {
        m.joint_head = init_mlp(layer_sizes(arch.feature_dim, {arch.head_width}, arch.class_count + 1), rng);
    } else {
        m.cls_head = init_mlp(layer_sizes(arch.feature_dim, {arch.head_width}, arch.class_count), rng);
        m.dis_head = init_mlp(layer_sizes(arch.feature_dim, {arch.head_width}, 1), rng);
    }
    return m;
}

DenseMatrix extract(const ModelBundle& model, const DenseMatrix& x) {
    if (x.cols != model.arch.input_dim) {
        throw std::invalid_argument("extract: input dimension mismatch");
    }
    return mlp_forward(model.extractor, x);
}

std::vector<double> conditional_from_joint(const std::vector<double>& joint_probs) {
    if (joint_probs.size() < 2) {
        throw std::invalid_argument("conditional_from_joint: need c+1 entries");
    }
    const std::size_t c = joint_probs.size() - 1;
    const double denom = std::max(1.0 - joint_probs[c], kProbEps);
    std::vector<double> cond(joint_probs.size(), 0.0);
    for (std::size_t y = 0; y < c; ++y) {
        cond[y] = joint_probs[y] / denom;
    }
    return cond;
}

JointScores joint_scores(const ModelBundle& model, const DenseMatrix& features) {
    if (model.arch.head != HeadKind::Joint) {
        throw std::invalid_argument("joint_scores: model has a split head");
    }
    const std::size_t c = model.arch.class_count;
    JointScores s;
    s.joint_probs = softmax_rows(mlp_forward(model.joint_head, features));
    s.conditional_probs = DenseMatrix(features.rows, c + 1);
    for (std::size_t i = 0; i < features.rows; ++i) {
        const double pdom = s.joint_probs.at(i, c);
        if (1.0 - pdom < kProbEps) ++s.clamped_rows;
        const double denom = std::max(1.0 - pdom, kProbEps);
        for (std::size_t y = 0; y < c; ++y) {
            s.conditional_probs.at(i, y) = s.joint_probs.at(i, y) / denom;
        }
    }
    return s;
}

SplitScores split_scores(const ModelBundle& model, const DenseMatrix& features) {
    if (model.arch.head != HeadKind::Split) {
        throw std::invalid_argument("split_scores: model has a joint head");
    }
    SplitScores s;
    s.class_probs = softmax_rows(mlp_forward(model.cls_head, features));
    s.domain_prob = mlp_forward(model.dis_head, features);
    for (double& v : s.domain_prob.data) v = 1.0 / (1.0 + std::exp(-v));
    return s;
}

DenseMatrix class_posteriors(const ModelBundle& model, const DenseMatrix& x) {
    const DenseMatrix f = extract(model, x);
    const std::size_t c = model.arch.class_count;
    if (model.arch.head == HeadKind::Split) {
        return split_scores(model, f).class_probs;
    }
    const JointScores s = joint_scores(model, f);
    DenseMatrix out(x.rows, c);
    for (std::size_t i = 0; i < x.rows; ++i) {
        // Renormalize over the first c units so each row is a distribution
        // even on clamped rows.
        double sum = 0.0;
        for (std::size_t y = 0; y < c; ++y) sum += s.conditional_probs.at(i, y);
        for (std::size_t y = 0; y < c; ++y) {
            out.at(i, y) = sum > 0.0 ? s.conditional_probs.at(i, y) / sum : 1.0 / static_cast<double>(c);
        }
    }
    return out;
}

void save_checkpoint(const ModelBundle& model, const std::string& path) {
    nlohmann::json j;
    j["architecture"] = {
        {"input_dim", model.arch.input_dim},
        {"class_count", model.arch.class_count},
        {"extractor_widths", model.arch.extractor_widths},
        {"feature_dim", model.arch.feature_dim},
        {"head_width", model.arch.head_width},
        {"head", model.arch.head == HeadKind::Joint ? "joint" : "split"},
    };
    const auto names = model.param_names();
    const auto params = model.all_params();
    nlohmann::json tensors = nlohmann::json::object();
    for (std::size_t i = 0; i < params.size(); ++i) {
        tensors[names[i]] = {
            {"shape", {params[i]->rows, params[i]->cols}},
            {"data", params[i]->data},
        };
    }
    j["parameters"] = std::move(tensors);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("save_checkpoint: cannot open " + path);
    }
    out << j.dump(2) << '\n';
}

ModelBundle load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("load_checkpoint: cannot open " + path);
    }
    nlohmann::json j;
    in >> j;
    const auto& a = j.at("architecture");
    ModelArch arch;
    arch.input_dim = a.at("input_dim").get<std::size_t>();
    arch.class_count = a.at("class_count").get<std::size_t>();
    arch.extractor_widths = a.at("extractor_widths").get<std::vector<std::size_t>>();
    arch.feature_dim = a.at("feature_dim").get<std::size_t>();
    arch.head_width = a.at("head_width").get<std::size_t>();
    arch.head = a.at("head").get<std::string>() == "joint" ? HeadKind::Joint : HeadKind::Split;

    ModelBundle m = make_model(arch, 0);
    const auto names = m.param_names();
    const auto params = m.all_params();
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& t = j.at("parameters").at(names[i]);
        const auto shape = t.at("shape").get<std::vector<std::size_t>>();
        if (shape.size() != 2 || shape[0] != params[i]->rows || shape[1] != params[i]->cols) {
            throw std::runtime_error("load_checkpoint: shape mismatch for " + names[i]);
        }
        params[i]->data = t.at("data").get<std::vector<double>>();
        if (params[i]->data.size() != shape[0] * shape[1]) {
            throw std::runtime_error("load_checkpoint: data length mismatch for " + names[i]);
        }
    }
    return m;
}

}  // namespace shiftadapt
