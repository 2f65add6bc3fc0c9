#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "shiftadapt/matrix.hpp"
#include "shiftadapt/model.hpp"
#include "shiftadapt/simplex.hpp"
#include "shiftadapt/synth.hpp"

namespace shiftadapt {

/// All source-posterior mass sits on classes the weights zero out, so no
/// corrected prediction exists for the row.
struct UndefinedPrediction : std::domain_error {
    using std::domain_error::domain_error;
};

/// Test-time correction of one posterior row:
///   corrected_i = gamma_i * p_i / sum_j gamma_j * p_j.
/// The output is a distribution and its argmax equals the argmax of the
/// unnormalized weighted scores. Throws UndefinedPrediction when the
/// denominator is zero.
std::vector<double> align_posterior(const std::vector<double>& posterior_row,
                                    const GammaWeights& gamma);

/// The uncorrected ratio form gamma_i * p_i / (|gamma|_1 * sum_j p_j); same
/// argmax as align_posterior but not normalized. Emitted in debug dumps only.
std::vector<double> align_posterior_literal(const std::vector<double>& posterior_row,
                                            const GammaWeights& gamma);

struct PosteriorBatch {
    DenseMatrix source_posterior;        // n x c
    DenseMatrix corrected;               // n x c, zero rows where undefined
    std::vector<std::size_t> undefined_rows;
};

PosteriorBatch align_posterior_batch(const DenseMatrix& posteriors, const GammaWeights& gamma);

struct CorrectionReport {
    double uncorrected_accuracy = 0.0;
    double corrected_accuracy = 0.0;
    std::vector<double> per_class_recall;  // of the corrected predictions
    std::size_t undefined_rows = 0;        // counted as errors
};

/// Target-domain accuracy before and after the correction, judged against
/// the sealed labels. Evaluation-only code path.
CorrectionReport evaluate_corrected(const ModelBundle& model, const DomainPair& pair,
                                    const GammaWeights& gamma);

/// CSV dump `row_id, argmax_uncorrected, argmax_corrected, p_corrected_1..c`
/// with 1-based class labels and 0 for undefined rows.
void write_prediction_dump(const std::string& path, const DenseMatrix& uncorrected,
                           const PosteriorBatch& batch);

/// Debug CSV with both the literal ratio and the renormalized correction.
void write_posterior_debug(const std::string& path, const DenseMatrix& posteriors,
                           const GammaWeights& gamma);

}  // namespace shiftadapt
