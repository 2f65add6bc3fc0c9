#pragma once

#include <cstddef>
#include <vector>

namespace shiftadapt {

/// Probability vector over c classes: entries >= 0, sum 1 within 1e-9.
/// Zero entries are legal (a class can be absent from a domain).
class SimplexVector {
  public:
    explicit SimplexVector(std::vector<double> probs);
    static SimplexVector uniform(std::size_t classes);

    std::size_t size() const { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }
    const std::vector<double>& probs() const { return probs_; }

  private:
    std::vector<double> probs_;
};

/// Euclidean projection onto the probability simplex (sort-and-threshold).
/// Entries pushed below the threshold come out exactly 0.
SimplexVector project_to_simplex(const std::vector<double>& v);

/// Smoothed KL divergence sum_i p_i * log((p_i + eps) / (q_i + eps)), eps = 1e-8.
double kl_divergence(const SimplexVector& p, const SimplexVector& q);

/// L1 distance between two distributions of equal length.
double l1_distance(const SimplexVector& p, const SimplexVector& q);

/// Per-class balancing weights gamma_i = estimate_i / source_prior_i.
/// Requires a strictly positive source prior; gamma_i is exactly 0 wherever
/// the estimate is exactly 0.
struct GammaWeights {
    std::vector<double> gamma;
};

GammaWeights compute_gamma(const SimplexVector& source_prior, const SimplexVector& estimate);

/// Early-training blend coefficient: 1/(1+N) for epoch N <= 5, then 0.
double fade_in_alpha(int epoch);

struct FadeInSchedule {
    int epoch = 0;
    double alpha() const { return fade_in_alpha(epoch); }
};

/// (1/(1+alpha)) * (estimate + alpha * source_prior).
SimplexVector fade_in_blend(const SimplexVector& estimate, const SimplexVector& source_prior,
                            const FadeInSchedule& schedule);

}  // namespace shiftadapt
