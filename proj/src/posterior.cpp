#include "shiftadapt/posterior.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace shiftadapt {

namespace {

std::size_t argmax(const double* row, std::size_t n) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < n; ++j) {
        if (row[j] > row[best]) best = j;
    }
    return best;
}

void check_inputs(std::size_t row_len, const GammaWeights& gamma) {
    if (row_len != gamma.gamma.size()) {
        throw std::invalid_argument("align_posterior: posterior/gamma length mismatch");
    }
    bool any_positive = false;
    for (double g : gamma.gamma) {
        if (g < 0.0 || !std::isfinite(g)) {
            throw std::invalid_argument("align_posterior: gamma must be finite and >= 0");
        }
        if (g > 0.0) any_positive = true;
    }
    if (!any_positive) {
        throw std::invalid_argument("align_posterior: gamma must not be all zero");
    }
}

void append_double(std::string& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

}  // namespace

std::vector<double> align_posterior(const std::vector<double>& posterior_row,
                                    const GammaWeights& gamma) {
    check_inputs(posterior_row.size(), gamma);
    std::vector<double> out(posterior_row.size());
    double denom = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = gamma.gamma[i] * posterior_row[i];
        denom += out[i];
    }
    if (denom == 0.0) {
        throw UndefinedPrediction("align_posterior: all posterior mass on zero-weight classes");
    }
    for (double& v : out) v /= denom;
    return out;
}

std::vector<double> align_posterior_literal(const std::vector<double>& posterior_row,
                                            const GammaWeights& gamma) {
    check_inputs(posterior_row.size(), gamma);
    double gamma_l1 = 0.0;
    for (double g : gamma.gamma) gamma_l1 += g;
    double row_sum = 0.0;
    for (double p : posterior_row) row_sum += p;
    std::vector<double> out(posterior_row.size());
    const double denom = gamma_l1 * row_sum;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = denom > 0.0 ? gamma.gamma[i] * posterior_row[i] / denom : 0.0;
    }
    return out;
}

PosteriorBatch align_posterior_batch(const DenseMatrix& posteriors, const GammaWeights& gamma) {
    check_inputs(posteriors.cols, gamma);
    PosteriorBatch batch;
    batch.source_posterior = posteriors;
    batch.corrected = DenseMatrix(posteriors.rows, posteriors.cols);
    for (std::size_t i = 0; i < posteriors.rows; ++i) {
        double denom = 0.0;
        for (std::size_t j = 0; j < posteriors.cols; ++j) {
            const double v = gamma.gamma[j] * posteriors.at(i, j);
            batch.corrected.at(i, j) = v;
            denom += v;
        }
        if (denom == 0.0) {
            batch.undefined_rows.push_back(i);
            for (std::size_t j = 0; j < posteriors.cols; ++j) batch.corrected.at(i, j) = 0.0;
            continue;
        }
        for (std::size_t j = 0; j < posteriors.cols; ++j) batch.corrected.at(i, j) /= denom;
    }
    return batch;
}

CorrectionReport evaluate_corrected(const ModelBundle& model, const DomainPair& pair,
                                    const GammaWeights& gamma) {
    const DenseMatrix posteriors = class_posteriors(model, pair.target_x());
    const PosteriorBatch batch = align_posterior_batch(posteriors, gamma);
    const std::vector<int>& labels = pair.eval_truth().target_labels;
    const std::size_t c = posteriors.cols;

    CorrectionReport report;
    report.per_class_recall.assign(c, 0.0);
    report.undefined_rows = batch.undefined_rows.size();
    std::vector<double> class_total(c, 0.0);
    std::vector<bool> undefined(posteriors.rows, false);
    for (std::size_t i : batch.undefined_rows) undefined[i] = true;

    std::size_t correct_raw = 0;
    std::size_t correct_fixed = 0;
    for (std::size_t i = 0; i < posteriors.rows; ++i) {
        const std::size_t truth = static_cast<std::size_t>(labels[i]);
        class_total[truth] += 1.0;
        if (argmax(&posteriors.data[i * c], c) == truth) ++correct_raw;
        if (undefined[i]) continue;  // no prediction counts as an error
        if (argmax(&batch.corrected.data[i * c], c) == truth) {
            ++correct_fixed;
            report.per_class_recall[truth] += 1.0;
        }
    }
    const double n = static_cast<double>(posteriors.rows);
    report.uncorrected_accuracy = static_cast<double>(correct_raw) / n;
    report.corrected_accuracy = static_cast<double>(correct_fixed) / n;
    for (std::size_t y = 0; y < c; ++y) {
        if (class_total[y] > 0.0) report.per_class_recall[y] /= class_total[y];
    }
    return report;
}

void write_prediction_dump(const std::string& path, const DenseMatrix& uncorrected,
                           const PosteriorBatch& batch) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("write_prediction_dump: cannot open " + path);
    }
    const std::size_t c = uncorrected.cols;
    std::string buf = "row_id,argmax_uncorrected,argmax_corrected";
    for (std::size_t j = 1; j <= c; ++j) buf += ",p_corrected_" + std::to_string(j);
    buf += '\n';
    std::vector<bool> undefined(uncorrected.rows, false);
    for (std::size_t i : batch.undefined_rows) undefined[i] = true;
    for (std::size_t i = 0; i < uncorrected.rows; ++i) {
        buf += std::to_string(i);
        buf += ',';
        buf += std::to_string(argmax(&uncorrected.data[i * c], c) + 1);
        buf += ',';
        buf += undefined[i] ? std::string("0")
                            : std::to_string(argmax(&batch.corrected.data[i * c], c) + 1);
        for (std::size_t j = 0; j < c; ++j) {
            buf += ',';
            append_double(buf, batch.corrected.at(i, j));
        }
        buf += '\n';
    }
    out << buf;
}

void write_posterior_debug(const std::string& path, const DenseMatrix& posteriors,
                           const GammaWeights& gamma) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("write_posterior_debug: cannot open " + path);
    }
    const std::size_t c = posteriors.cols;
    std::string buf = "row_id";
    for (std::size_t j = 1; j <= c; ++j) buf += ",literal_" + std::to_string(j);
    for (std::size_t j = 1; j <= c; ++j) buf += ",renormalized_" + std::to_string(j);
    buf += '\n';
    for (std::size_t i = 0; i < posteriors.rows; ++i) {
        std::vector<double> row(posteriors.data.begin() + static_cast<long>(i * c),
                                posteriors.data.begin() + static_cast<long>((i + 1) * c));
        const auto literal = align_posterior_literal(row, gamma);
        std::vector<double> renorm;
        try {
            renorm = align_posterior(row, gamma);
        } catch (const UndefinedPrediction&) {
            renorm.assign(c, 0.0);
        }
        buf += std::to_string(i);
        for (double v : literal) {
            buf += ',';
            append_double(buf, v);
        }
        for (double v : renorm) {
            buf += ',';
            append_double(buf, v);
        }
        buf += '\n';
    }
    out << buf;
}

}  // namespace shiftadapt
