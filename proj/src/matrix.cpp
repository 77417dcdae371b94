#include "wast/matrix.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace wast {

namespace {

inline void matmul_row(const Matrix& a, const Matrix& b, Matrix& c, int i) {
    double* out = c.row(i);
    std::fill(out, out + c.cols, 0.0);
    const double* arow = a.row(i);
    for (int k = 0; k < a.cols; ++k) {
        const double aik = arow[k];
        const double* brow = b.row(k);
        for (int j = 0; j < b.cols; ++j) out[j] += aik * brow[j];
    }
}

inline void matmul_transb_row(const Matrix& a, const Matrix& b, Matrix& c, int i) {
    const double* arow = a.row(i);
    double* out = c.row(i);
    for (int j = 0; j < b.rows; ++j) {
        const double* brow = b.row(j);
        double sum = 0.0;
        for (int k = 0; k < a.cols; ++k) sum += arow[k] * brow[k];
        out[j] = sum;
    }
}

inline void matmul_transa_row(const Matrix& a, const Matrix& b, Matrix& c, int i) {
    // c[i, j] = sum_k a[k, i] * b[k, j], k ascending
    double* out = c.row(i);
    for (int j = 0; j < b.cols; ++j) {
        double sum = 0.0;
        for (int k = 0; k < a.rows; ++k) sum += a.at(k, i) * b.at(k, j);
        out[j] = sum;
    }
}

}  // namespace

void matmul_serial(const Matrix& a, const Matrix& b, Matrix& c) {
    assert(a.cols == b.rows);
    c = Matrix(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) matmul_row(a, b, c, i);
}

void matmul(const Matrix& a, const Matrix& b, Matrix& c) {
    assert(a.cols == b.rows);
    c = Matrix(a.rows, b.cols);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (a.rows > 8)
#endif
    for (int i = 0; i < a.rows; ++i) matmul_row(a, b, c, i);
}

void matmul_transb_serial(const Matrix& a, const Matrix& b, Matrix& c) {
    assert(a.cols == b.cols);
    c = Matrix(a.rows, b.rows);
    for (int i = 0; i < a.rows; ++i) matmul_transb_row(a, b, c, i);
}

void matmul_transb(const Matrix& a, const Matrix& b, Matrix& c) {
    assert(a.cols == b.cols);
    c = Matrix(a.rows, b.rows);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (a.rows > 8)
#endif
    for (int i = 0; i < a.rows; ++i) matmul_transb_row(a, b, c, i);
}

void matmul_transa_serial(const Matrix& a, const Matrix& b, Matrix& c) {
    assert(a.rows == b.rows);
    c = Matrix(a.cols, b.cols);
    for (int i = 0; i < a.cols; ++i) matmul_transa_row(a, b, c, i);
}

void matmul_transa(const Matrix& a, const Matrix& b, Matrix& c) {
    assert(a.rows == b.rows);
    c = Matrix(a.cols, b.cols);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (a.cols > 8)
#endif
    for (int i = 0; i < a.cols; ++i) matmul_transa_row(a, b, c, i);
}

void softmax_rows(Matrix& m, int active_cols) {
    for (int i = 0; i < m.rows; ++i) {
        double* row = m.row(i);
        double peak = row[0];
        for (int j = 1; j < active_cols; ++j) peak = std::max(peak, row[j]);
        double denom = 0.0;
        for (int j = 0; j < active_cols; ++j) {
            row[j] = std::exp(row[j] - peak);
            denom += row[j];
        }
        for (int j = 0; j < active_cols; ++j) row[j] /= denom;
        for (int j = active_cols; j < m.cols; ++j) row[j] = 0.0;
    }
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace wast
