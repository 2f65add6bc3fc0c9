#include "shiftadapt/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "shiftadapt/linalg.hpp"
#include "shiftadapt/rng.hpp"

namespace shiftadapt {

AffineTransform AffineTransform::identity(std::size_t dim) {
    return AffineTransform{DenseMatrix::identity(dim), DenseMatrix(1, dim)};
}

ShiftSpec ShiftSpec::basic(std::size_t classes, std::size_t dim, double separation,
                           SimplexVector source_prior, SimplexVector target_prior,
                           std::size_t n_source, std::size_t n_target, std::uint64_t seed) {
    ShiftSpec spec;
    spec.classes = classes;
    spec.dim = dim;
    spec.source_prior = std::move(source_prior);
    spec.target_prior = std::move(target_prior);
    spec.n_source = n_source;
    spec.n_target = n_target;
    spec.seed = seed;
    spec.conditionals.reserve(classes);
    // Class means cycle through coordinate axes, flipping sign and growing on
    // each wrap, so any c stays distinguishable in any d.
    for (std::size_t i = 0; i < classes; ++i) {
        ClassConditional cc;
        cc.mean = DenseMatrix(1, dim);
        const std::size_t axis = i % dim;
        const double sign = (i / dim) % 2 == 0 ? 1.0 : -1.0;
        cc.mean.at(0, axis) = sign * separation * (1.0 + static_cast<double>(i / (2 * dim)));
        cc.cov = DenseMatrix::identity(dim);
        spec.conditionals.push_back(std::move(cc));
    }
    return spec;
}

DomainPair::DomainPair(DenseMatrix source_x, std::vector<int> source_y, DenseMatrix target_x,
                       SealedTruth truth)
    : source_x_(std::move(source_x)),
      source_y_(std::move(source_y)),
      target_x_(std::move(target_x)),
      truth_(std::move(truth)) {
    if (source_x_.rows != source_y_.size()) {
        throw std::invalid_argument("DomainPair: source label count mismatch");
    }
    if (target_x_.rows != truth_.target_labels.size()) {
        throw std::invalid_argument("DomainPair: target label count mismatch");
    }
}

SimplexVector DomainPair::empirical_source_prior() const {
    std::vector<double> counts(classes(), 0.0);
    for (int y : source_y_) {
        if (y < 0 || static_cast<std::size_t>(y) >= counts.size()) {
            throw std::invalid_argument("DomainPair: source label out of range");
        }
        counts[static_cast<std::size_t>(y)] += 1.0;
    }
    for (double& c : counts) c /= static_cast<double>(source_y_.size());
    return SimplexVector(std::move(counts));
}

namespace {

struct PreparedConditional {
    DenseMatrix mean;  // 1 x d
    DenseMatrix chol;  // d x d lower triangular
};

PreparedConditional prepare(const ClassConditional& cc) {
    if (cc.cov.rows != cc.cov.cols || cc.cov.rows != cc.mean.cols) {
        throw std::invalid_argument("generate: conditional shapes inconsistent");
    }
    return PreparedConditional{cc.mean, cholesky(cc.cov)};
}

int sample_class(const SimplexVector& prior, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < prior.size(); ++i) {
        acc += prior[i];
        if (u < acc) return static_cast<int>(i);
    }
    // Residual rounding: fall back to the last class with positive mass.
    for (std::size_t i = prior.size(); i-- > 0;) {
        if (prior[i] > 0.0) return static_cast<int>(i);
    }
    throw std::invalid_argument("generate: prior has no positive mass");
}

void sample_row(const PreparedConditional& pc, Rng& rng, double* out, std::size_t d) {
    std::vector<double> z(d);
    for (std::size_t k = 0; k < d; ++k) z[k] = rng.normal();
    for (std::size_t j = 0; j < d; ++j) {
        double v = pc.mean.at(0, j);
        for (std::size_t k = 0; k <= j; ++k) {
            v += pc.chol.at(j, k) * z[k];
        }
        out[j] = v;
    }
}

void apply_affine(const AffineTransform& t, double* row, std::size_t d) {
    std::vector<double> x(row, row + d);
    for (std::size_t j = 0; j < d; ++j) {
        double v = t.b.at(0, j);
        for (std::size_t k = 0; k < d; ++k) {
            v += t.a.at(j, k) * x[k];
        }
        row[j] = v;
    }
}

}  // namespace

DomainPair generate(const ShiftSpec& spec) {
    if (spec.conditionals.size() != spec.classes) {
        throw std::invalid_argument("generate: one conditional per class required");
    }
    if (spec.source_prior.size() != spec.classes || spec.target_prior.size() != spec.classes) {
        throw std::invalid_argument("generate: prior length must equal class count");
    }
    if (!spec.target_transforms.empty() && spec.target_transforms.size() != spec.classes) {
        throw std::invalid_argument("generate: one transform per class (or none)");
    }
    std::vector<PreparedConditional> prepared;
    prepared.reserve(spec.classes);
    for (const auto& cc : spec.conditionals) {
        if (cc.mean.cols != spec.dim) {
            throw std::invalid_argument("generate: conditional dimension mismatch");
        }
        prepared.push_back(prepare(cc));
    }

    Rng rng(spec.seed);
    DenseMatrix source_x(spec.n_source, spec.dim);
    std::vector<int> source_y(spec.n_source);
    for (std::size_t i = 0; i < spec.n_source; ++i) {
        const int y = sample_class(spec.source_prior, rng);
        source_y[i] = y;
        sample_row(prepared[static_cast<std::size_t>(y)], rng, &source_x.data[i * spec.dim], spec.dim);
    }

    DenseMatrix target_x(spec.n_target, spec.dim);
    std::vector<int> target_y(spec.n_target);
    for (std::size_t i = 0; i < spec.n_target; ++i) {
        const int y = sample_class(spec.target_prior, rng);
        target_y[i] = y;
        double* row = &target_x.data[i * spec.dim];
        sample_row(prepared[static_cast<std::size_t>(y)], rng, row, spec.dim);
        if (!spec.target_transforms.empty()) {
            apply_affine(spec.target_transforms[static_cast<std::size_t>(y)], row, spec.dim);
        }
    }

    SealedTruth truth{std::move(target_y), spec.source_prior, spec.target_prior};
    return DomainPair(std::move(source_x), std::move(source_y), std::move(target_x), std::move(truth));
}

std::vector<DomainPair> shift_sweep(const ShiftSpec& base, const std::vector<SimplexVector>& levels) {
    if (levels.empty()) {
        throw std::invalid_argument("shift_sweep: empty level list");
    }
    std::vector<DomainPair> out;
    out.reserve(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) {
        ShiftSpec spec = base;
        spec.target_prior = levels[i];
        spec.seed = mix_seed(base.seed, i);
        out.push_back(generate(spec));
    }
    return out;
}

namespace {

void append_double(std::string& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

double parse_double(const std::string& field) {
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
        throw std::invalid_argument("read_dataset: bad numeric field '" + field + "'");
    }
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

void write_dataset(const DomainPair& pair, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("write_dataset: cannot open " + path);
    }
    const std::size_t n = pair.source_x().rows + pair.target_x().rows;
    std::string buf;
    buf += std::to_string(pair.classes());
    buf += ',';
    buf += std::to_string(pair.dim());
    buf += ',';
    buf += std::to_string(n);
    buf += '\n';
    auto write_rows = [&](const DenseMatrix& x, const std::vector<int>* labels) {
        for (std::size_t i = 0; i < x.rows; ++i) {
            // 1-based class labels on source rows, -1 marks unlabeled target rows.
            buf += labels ? std::to_string((*labels)[i] + 1) : std::string("-1");
            for (std::size_t j = 0; j < x.cols; ++j) {
                buf += ',';
                append_double(buf, x.at(i, j));
            }
            buf += '\n';
        }
    };
    write_rows(pair.source_x(), &pair.source_y());
    write_rows(pair.target_x(), nullptr);
    out << buf;

    nlohmann::json sidecar;
    sidecar["source_prior"] = pair.eval_truth().source_prior.probs();
    sidecar["target_prior"] = pair.eval_truth().target_prior.probs();
    sidecar["target_labels"] = pair.eval_truth().target_labels;
    std::ofstream side(path + ".truth.json", std::ios::binary);
    if (!side) {
        throw std::runtime_error("write_dataset: cannot open " + path + ".truth.json");
    }
    side << sidecar.dump(2) << '\n';
}

DomainPair read_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("read_dataset: cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("read_dataset: missing header");
    }
    const auto header = split_csv(line);
    if (header.size() != 3) {
        throw std::runtime_error("read_dataset: header must be c,d,n");
    }
    const std::size_t c = static_cast<std::size_t>(std::stoul(header[0]));
    const std::size_t d = static_cast<std::size_t>(std::stoul(header[1]));
    const std::size_t n = static_cast<std::size_t>(std::stoul(header[2]));

    std::vector<double> source_rows;
    std::vector<double> target_rows;
    std::vector<int> source_y;
    std::size_t seen = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != d + 1) {
            throw std::runtime_error("read_dataset: bad row width");
        }
        const int label = std::stoi(fields[0]);
        const bool is_target = label == -1;
        auto& rows = is_target ? target_rows : source_rows;
        for (std::size_t j = 0; j < d; ++j) {
            rows.push_back(parse_double(fields[j + 1]));
        }
        if (!is_target) {
            if (label < 1 || static_cast<std::size_t>(label) > c) {
                throw std::runtime_error("read_dataset: label out of range");
            }
            source_y.push_back(label - 1);
        }
        ++seen;
    }
    if (seen != n) {
        throw std::runtime_error("read_dataset: row count does not match header");
    }

    nlohmann::json sidecar;
    std::ifstream side(path + ".truth.json", std::ios::binary);
    if (!side) {
        throw std::runtime_error("read_dataset: missing truth sidecar for " + path);
    }
    side >> sidecar;
    SealedTruth truth{sidecar.at("target_labels").get<std::vector<int>>(),
                      SimplexVector(sidecar.at("source_prior").get<std::vector<double>>()),
                      SimplexVector(sidecar.at("target_prior").get<std::vector<double>>())};

    DenseMatrix sx(source_y.size(), d, std::move(source_rows));
    DenseMatrix tx(target_rows.size() / d, d, std::move(target_rows));
    return DomainPair(std::move(sx), std::move(source_y), std::move(tx), std::move(truth));
}

}  // namespace shiftadapt
