#include "shiftadapt/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace shiftadapt {

namespace {
constexpr double kSumTolerance = 1e-9;
constexpr double kKlEps = 1e-8;
}  // namespace

SimplexVector::SimplexVector(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) {
        throw std::invalid_argument("SimplexVector: empty");
    }
    double sum = 0.0;
    for (double p : probs_) {
        if (!std::isfinite(p) || p < 0.0) {
            throw std::invalid_argument("SimplexVector: entries must be finite and >= 0");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
        throw std::invalid_argument("SimplexVector: entries must sum to 1");
    }
}

SimplexVector SimplexVector::uniform(std::size_t classes) {
    if (classes == 0) {
        throw std::invalid_argument("SimplexVector::uniform: zero classes");
    }
    return SimplexVector(std::vector<double>(classes, 1.0 / static_cast<double>(classes)));
}

SimplexVector project_to_simplex(const std::vector<double>& v) {
    if (v.empty()) {
        throw std::invalid_argument("project_to_simplex: empty vector");
    }
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw std::invalid_argument("project_to_simplex: non-finite entry");
        }
    }
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cumsum = 0.0;
    double tau = 0.0;
    std::size_t support = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cumsum += u[j];
        const double candidate = (cumsum - 1.0) / static_cast<double>(j + 1);
        if (u[j] - candidate > 0.0) {
            tau = candidate;
            support = j + 1;
        }
    }
    (void)support;
    std::vector<double> p(v.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        p[i] = std::max(v[i] - tau, 0.0);
        sum += p[i];
    }
    // Remove the residual floating point drift; exact zeros stay exact.
    for (double& x : p) x /= sum;
    return SimplexVector(std::move(p));
}

double kl_divergence(const SimplexVector& p, const SimplexVector& q) {
    if (p.size() != q.size()) {
        throw std::invalid_argument("kl_divergence: length mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i] * std::log((p[i] + kKlEps) / (q[i] + kKlEps));
    }
    return acc;
}

double l1_distance(const SimplexVector& p, const SimplexVector& q) {
    if (p.size() != q.size()) {
        throw std::invalid_argument("l1_distance: length mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += std::abs(p[i] - q[i]);
    }
    return acc;
}

GammaWeights compute_gamma(const SimplexVector& source_prior, const SimplexVector& estimate) {
    if (source_prior.size() != estimate.size()) {
        throw std::invalid_argument("compute_gamma: length mismatch");
    }
    GammaWeights w;
    w.gamma.resize(source_prior.size());
    for (std::size_t i = 0; i < source_prior.size(); ++i) {
        if (source_prior[i] <= 0.0) {
            throw std::invalid_argument("compute_gamma: source prior must be strictly positive");
        }
        w.gamma[i] = estimate[i] == 0.0 ? 0.0 : estimate[i] / source_prior[i];
    }
    return w;
}

double fade_in_alpha(int epoch) {
    if (epoch < 0) {
        throw std::invalid_argument("fade_in_alpha: negative epoch");
    }
    return epoch <= 5 ? 1.0 / (1.0 + static_cast<double>(epoch)) : 0.0;
}

SimplexVector fade_in_blend(const SimplexVector& estimate, const SimplexVector& source_prior,
                            const FadeInSchedule& schedule) {
    if (estimate.size() != source_prior.size()) {
        throw std::invalid_argument("fade_in_blend: length mismatch");
    }
    const double alpha = schedule.alpha();
    if (alpha == 0.0) {
        return estimate;
    }
    std::vector<double> out(estimate.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = (estimate[i] + alpha * source_prior[i]) / (1.0 + alpha);
    }
    return SimplexVector(std::move(out));
}

}  // namespace shiftadapt
