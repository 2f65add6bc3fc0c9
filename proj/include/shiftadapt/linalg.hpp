#pragma once

#include <vector>

#include "shiftadapt/matrix.hpp"

namespace shiftadapt {

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
/// Throws std::invalid_argument when the matrix is not PD.
DenseMatrix cholesky(const DenseMatrix& a);

/// Eigenvalues of a symmetric matrix via cyclic Jacobi rotations, ascending.
/// Intended for the small Gram matrices that show up here (c <= 10).
std::vector<double> symmetric_eigenvalues(const DenseMatrix& a);

/// Condition number lambda_max / lambda_min of a symmetric PSD matrix.
/// Returns +inf when the smallest eigenvalue is not meaningfully positive.
double condition_number(const DenseMatrix& a);

/// Linear-interpolation quantile of an unsorted sample, q in [0, 1].
double quantile(std::vector<double> values, double q);

inline double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

}  // namespace shiftadapt
