#include "shiftadapt/matrix.hpp"

#include <cmath>

namespace shiftadapt {

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.rows) {
        throw std::invalid_argument("matmul: inner dimensions do not match");
    }
    DenseMatrix out(a.rows, b.cols);
    // ikj order keeps the inner loop contiguous in both b and out.
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a.data[i * a.cols + k];
            if (aik == 0.0) continue;
            const double* brow = &b.data[k * b.cols];
            double* orow = &out.data[i * out.cols];
            for (std::size_t j = 0; j < b.cols; ++j) {
                orow[j] += aik * brow[j];
            }
        }
    }
    return out;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix out(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j < a.cols; ++j) {
            out.at(j, i) = a.at(i, j);
        }
    }
    return out;
}

DenseMatrix add_row_broadcast(const DenseMatrix& a, const DenseMatrix& b) {
    if (b.rows != 1 || b.cols != a.cols) {
        throw std::invalid_argument("add_row_broadcast: bias must be 1 x cols");
    }
    DenseMatrix out = a;
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j < a.cols; ++j) {
            out.data[i * a.cols + j] += b.data[j];
        }
    }
    return out;
}

bool all_finite(const DenseMatrix& m) {
    for (double v : m.data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

DenseMatrix column_means(const DenseMatrix& m) {
    if (m.rows == 0) {
        throw std::invalid_argument("column_means: empty matrix");
    }
    DenseMatrix out(1, m.cols);
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            out.data[j] += m.at(i, j);
        }
    }
    for (std::size_t j = 0; j < m.cols; ++j) {
        out.data[j] /= static_cast<double>(m.rows);
    }
    return out;
}

}  // namespace shiftadapt
