#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace shiftadapt {

/// Dense row-major matrix of doubles. The only tensor type in the project;
/// vectors are n x 1 (columns) or 1 x n (rows) as noted at each call site.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // rows * cols, row-major

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    DenseMatrix(std::size_t r, std::size_t c, std::vector<double> d)
        : rows(r), cols(c), data(std::move(d)) {
        if (data.size() != rows * cols) {
            throw std::invalid_argument("DenseMatrix: data length does not match rows*cols");
        }
    }
    DenseMatrix(std::initializer_list<std::initializer_list<double>> init) {
        rows = init.size();
        cols = rows == 0 ? 0 : init.begin()->size();
        data.reserve(rows * cols);
        for (const auto& row : init) {
            if (row.size() != cols) {
                throw std::invalid_argument("DenseMatrix: ragged initializer");
            }
            data.insert(data.end(), row.begin(), row.end());
        }
    }

    static DenseMatrix zeros(std::size_t r, std::size_t c) { return DenseMatrix(r, c); }
    static DenseMatrix filled(std::size_t r, std::size_t c, double v) {
        DenseMatrix m(r, c);
        for (auto& x : m.data) x = v;
        return m;
    }
    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const DenseMatrix& o) const { return rows == o.rows && cols == o.cols; }
};

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& a);

/// a + b where b is a 1 x cols row vector broadcast over rows of a.
DenseMatrix add_row_broadcast(const DenseMatrix& a, const DenseMatrix& b);

bool all_finite(const DenseMatrix& m);

/// Column means, returned as a 1 x cols row vector. Throws on empty input.
DenseMatrix column_means(const DenseMatrix& m);

}  // namespace shiftadapt
