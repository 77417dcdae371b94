#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace wast {

// Dense row-major matrix of doubles. Small and boring on purpose: the
// attention model and the retrieval scan are the only consumers.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
    const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }

    bool same_shape(const Matrix& other) const {
        return rows == other.rows && cols == other.cols;
    }

    bool operator==(const Matrix&) const = default;
};

// C = A * B. The parallel kernel splits work by output row; each element is
// accumulated in ascending-k order by exactly one thread, so the result is
// bitwise identical to the serial reference for any thread count.
void matmul_serial(const Matrix& a, const Matrix& b, Matrix& c);
void matmul(const Matrix& a, const Matrix& b, Matrix& c);

// C = A * B^T, same determinism contract.
void matmul_transb_serial(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_transb(const Matrix& a, const Matrix& b, Matrix& c);

// C = A^T * B (used for gradient accumulation).
void matmul_transa_serial(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_transa(const Matrix& a, const Matrix& b, Matrix& c);

// In-place row softmax over the first `active_cols` columns; the remaining
// columns are forced to exactly 0 (masked padding).
void softmax_rows(Matrix& m, int active_cols);

int max_threads();

}  // namespace wast
