#pragma once

#include <stdexcept>
#include <vector>

#include "shiftadapt/matrix.hpp"
#include "shiftadapt/simplex.hpp"

namespace shiftadapt {

/// Raised when a prior estimate is requested before every class has been
/// seen at least once; callers fall back to uniform weights and try again
/// on a later round.
struct EstimatorWarmup : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Running feature statistics for the mean-matching prior estimate.
/// class_means is K x c (column i = mean of class-i source features),
/// target_mean is the mean of target features; both are exponential moving
/// averages refreshed batch by batch as the feature space evolves.
struct MeanMatchState {
    std::size_t classes = 0;
    std::size_t feature_dim = 0;
    DenseMatrix class_means;            // K x c
    std::vector<double> class_counts;   // samples seen per class
    std::vector<double> target_mean;    // K
    double target_count = 0.0;
    SimplexVector estimate = SimplexVector::uniform(2);
    double ema_decay = 0.9;
    bool degenerate = false;  // last estimate skipped: Gram matrix singular
};

MeanMatchState make_mean_match_state(std::size_t classes, std::size_t feature_dim,
                                     double ema_decay);

/// Folds one batch of extracted features into the running means. ema_decay 0
/// replaces the means with the batch means (per-minibatch mode).
void update_means(MeanMatchState& state, const DenseMatrix& source_features,
                  const std::vector<int>& source_labels, const DenseMatrix& target_features);

bool warmed_up(const MeanMatchState& state);

/// || class_means * p - target_mean ||^2, the quantity the estimator descends.
double mean_match_objective(const DenseMatrix& class_means, const std::vector<double>& target_mean,
                            const SimplexVector& p);

/// Projected gradient descent on the mean-matching objective over the
/// simplex, warm-started from the previous estimate. Each step backtracks
/// (halving the rate up to 20 times) until the objective does not increase,
/// so the objective is non-increasing across the whole call. If the Gram
/// matrix of the class means is numerically singular the previous estimate
/// is returned and `state.degenerate` is set.
///
/// Throws EstimatorWarmup before all classes have been seen and
/// std::runtime_error on a non-finite gradient.
SimplexVector estimate_prior(MeanMatchState& state, int steps, double lr);

}  // namespace shiftadapt
