#include "shiftadapt/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace shiftadapt {

DenseMatrix cholesky(const DenseMatrix& a) {
    if (a.rows != a.cols) {
        throw std::invalid_argument("cholesky: matrix must be square");
    }
    const std::size_t n = a.rows;
    DenseMatrix l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = a.at(i, j);
            for (std::size_t k = 0; k < j; ++k) {
                sum -= l.at(i, k) * l.at(j, k);
            }
            if (i == j) {
                if (sum <= 0.0 || !std::isfinite(sum)) {
                    throw std::invalid_argument("cholesky: matrix is not positive definite");
                }
                l.at(i, i) = std::sqrt(sum);
            } else {
                l.at(i, j) = sum / l.at(j, j);
            }
        }
    }
    return l;
}

std::vector<double> symmetric_eigenvalues(const DenseMatrix& a) {
    if (a.rows != a.cols) {
        throw std::invalid_argument("symmetric_eigenvalues: matrix must be square");
    }
    const std::size_t n = a.rows;
    DenseMatrix m = a;
    // Cyclic Jacobi sweeps until the off-diagonal mass is negligible.
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                off += m.at(i, j) * m.at(i, j);
            }
        }
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = m.at(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double app = m.at(p, p);
                const double aqq = m.at(q, q);
                const double theta = 0.5 * (aqq - app) / apq;
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double mkp = m.at(k, p);
                    const double mkq = m.at(k, q);
                    m.at(k, p) = c * mkp - s * mkq;
                    m.at(k, q) = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double mpk = m.at(p, k);
                    const double mqk = m.at(q, k);
                    m.at(p, k) = c * mpk - s * mqk;
                    m.at(q, k) = s * mpk + c * mqk;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = m.at(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

double condition_number(const DenseMatrix& a) {
    const std::vector<double> eig = symmetric_eigenvalues(a);
    const double lo = eig.front();
    const double hi = eig.back();
    if (hi <= 0.0) return std::numeric_limits<double>::infinity();
    if (lo <= hi * 1e-15) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) {
        throw std::invalid_argument("quantile: empty sample");
    }
    if (q < 0.0 || q > 1.0) {
        throw std::invalid_argument("quantile: q outside [0, 1]");
    }
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace shiftadapt
