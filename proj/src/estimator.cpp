#include "shiftadapt/estimator.hpp"

#include <cmath>

#include "shiftadapt/linalg.hpp"

namespace shiftadapt {

MeanMatchState make_mean_match_state(std::size_t classes, std::size_t feature_dim,
                                     double ema_decay) {
    if (classes < 2) {
        throw std::invalid_argument("make_mean_match_state: need at least two classes");
    }
    if (ema_decay < 0.0 || ema_decay >= 1.0) {
        throw std::invalid_argument("make_mean_match_state: ema_decay must be in [0, 1)");
    }
    MeanMatchState s;
    s.classes = classes;
    s.feature_dim = feature_dim;
    s.class_means = DenseMatrix(feature_dim, classes);
    s.class_counts.assign(classes, 0.0);
    s.target_mean.assign(feature_dim, 0.0);
    s.estimate = SimplexVector::uniform(classes);
    s.ema_decay = ema_decay;
    return s;
}

void update_means(MeanMatchState& state, const DenseMatrix& source_features,
                  const std::vector<int>& source_labels, const DenseMatrix& target_features) {
    if (source_features.cols != state.feature_dim || target_features.cols != state.feature_dim) {
        throw std::invalid_argument("update_means: feature dimension mismatch");
    }
    if (source_features.rows != source_labels.size()) {
        throw std::invalid_argument("update_means: label count mismatch");
    }
    const double decay = state.ema_decay;

    std::vector<double> sums(state.feature_dim * state.classes, 0.0);
    std::vector<std::size_t> counts(state.classes, 0);
    for (std::size_t i = 0; i < source_features.rows; ++i) {
        const int y = source_labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= state.classes) {
            throw std::invalid_argument("update_means: label out of range");
        }
        ++counts[static_cast<std::size_t>(y)];
        for (std::size_t k = 0; k < state.feature_dim; ++k) {
            sums[k * state.classes + static_cast<std::size_t>(y)] += source_features.at(i, k);
        }
    }
    for (std::size_t y = 0; y < state.classes; ++y) {
        if (counts[y] == 0) continue;
        for (std::size_t k = 0; k < state.feature_dim; ++k) {
            const double batch_mean = sums[k * state.classes + y] / static_cast<double>(counts[y]);
            double& cell = state.class_means.at(k, y);
            cell = state.class_counts[y] == 0.0 ? batch_mean : decay * cell + (1.0 - decay) * batch_mean;
        }
        state.class_counts[y] += static_cast<double>(counts[y]);
    }

    if (target_features.rows > 0) {
        for (std::size_t k = 0; k < state.feature_dim; ++k) {
            double batch_mean = 0.0;
            for (std::size_t i = 0; i < target_features.rows; ++i) {
                batch_mean += target_features.at(i, k);
            }
            batch_mean /= static_cast<double>(target_features.rows);
            double& cell = state.target_mean[k];
            cell = state.target_count == 0.0 ? batch_mean : decay * cell + (1.0 - decay) * batch_mean;
        }
        state.target_count += static_cast<double>(target_features.rows);
    }
}

bool warmed_up(const MeanMatchState& state) {
    if (state.target_count == 0.0) return false;
    for (double c : state.class_counts) {
        if (c == 0.0) return false;
    }
    return true;
}

double mean_match_objective(const DenseMatrix& class_means, const std::vector<double>& target_mean,
                            const SimplexVector& p) {
    double obj = 0.0;
    for (std::size_t k = 0; k < class_means.rows; ++k) {
        double r = -target_mean[k];
        for (std::size_t y = 0; y < class_means.cols; ++y) {
            r += class_means.at(k, y) * p[y];
        }
        obj += r * r;
    }
    return obj;
}

SimplexVector estimate_prior(MeanMatchState& state, int steps, double lr) {
    if (!warmed_up(state)) {
        throw EstimatorWarmup("estimate_prior: not every class has been observed yet");
    }
    if (steps <= 0 || lr <= 0.0) {
        throw std::invalid_argument("estimate_prior: steps and lr must be positive");
    }
    const DenseMatrix& m = state.class_means;

    // Unidentifiable geometry: bail out on a singular Gram matrix.
    const DenseMatrix gram = matmul(transpose(m), m);
    const auto eig = symmetric_eigenvalues(gram);
    if (eig.back() <= 0.0 || eig.front() <= eig.back() * 1e-12) {
        state.degenerate = true;
        return state.estimate;
    }
    state.degenerate = false;

    SimplexVector p = state.estimate;
    double obj = mean_match_objective(m, state.target_mean, p);
    for (int step = 0; step < steps; ++step) {
        // grad = 2 M^T (M p - mu_t)
        std::vector<double> residual(state.feature_dim);
        for (std::size_t k = 0; k < state.feature_dim; ++k) {
            double r = -state.target_mean[k];
            for (std::size_t y = 0; y < state.classes; ++y) {
                r += m.at(k, y) * p[y];
            }
            residual[k] = r;
        }
        std::vector<double> grad(state.classes, 0.0);
        for (std::size_t y = 0; y < state.classes; ++y) {
            for (std::size_t k = 0; k < state.feature_dim; ++k) {
                grad[y] += 2.0 * m.at(k, y) * residual[k];
            }
            if (!std::isfinite(grad[y])) {
                throw std::runtime_error("estimate_prior: non-finite gradient");
            }
        }

        double rate = lr;
        bool moved = false;
        for (int halving = 0; halving <= 20; ++halving) {
            std::vector<double> cand(state.classes);
            for (std::size_t y = 0; y < state.classes; ++y) {
                cand[y] = p[y] - rate * grad[y];
            }
            SimplexVector proj = project_to_simplex(cand);
            const double cand_obj = mean_match_objective(m, state.target_mean, proj);
            if (cand_obj <= obj) {
                p = std::move(proj);
                obj = cand_obj;
                moved = true;
                break;
            }
            rate *= 0.5;
        }
        if (!moved) break;  // no descent direction at any tried rate
    }
    state.estimate = p;
    return p;
}

}  // namespace shiftadapt
