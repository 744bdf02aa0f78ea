#include "ctk/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>

namespace ctk {
namespace linalg {

namespace {
// Below this many multiply-adds the OpenMP fork/join overhead dominates.
constexpr std::size_t kParallelThreshold = 1u << 16;

inline void matmul_rows(const Matrix& a, const Matrix& b, Matrix& out,
                        std::size_t i0, std::size_t i1) {
    const std::size_t n = a.cols, m = b.cols;
    for (std::size_t i = i0; i < i1; ++i) {
        double* orow = out.row(i);
        std::fill(orow, orow + m, 0.0);
        const double* arow = a.row(i);
        for (std::size_t k = 0; k < n; ++k) {
            const double av = arow[k];
            const double* brow = b.row(k);
            for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
        }
    }
}
}  // namespace

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
    assert(a.cols == b.rows);
    out.rows = a.rows;
    out.cols = b.cols;
    out.data.assign(a.rows * b.cols, 0.0);
    const std::size_t work = a.rows * a.cols * b.cols;
    if (work >= kParallelThreshold) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(a.rows); ++i) {
            matmul_rows(a, b, out, static_cast<std::size_t>(i),
                        static_cast<std::size_t>(i) + 1);
        }
    } else {
        matmul_rows(a, b, out, 0, a.rows);
    }
}

void matmul_transb(const Matrix& a, const Matrix& b, Matrix& out) {
    assert(a.cols == b.cols);
    out.rows = a.rows;
    out.cols = b.rows;
    out.data.assign(a.rows * b.rows, 0.0);
    const std::size_t work = a.rows * a.cols * b.rows;
#pragma omp parallel for schedule(static) if (work >= kParallelThreshold)
    for (long long i = 0; i < static_cast<long long>(a.rows); ++i) {
        const double* arow = a.row(static_cast<std::size_t>(i));
        double* orow = out.row(static_cast<std::size_t>(i));
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* brow = b.row(j);
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) s += arow[k] * brow[k];
            orow[j] = s;
        }
    }
}

void matmul_transa(const Matrix& a, const Matrix& b, Matrix& out) {
    assert(a.rows == b.rows);
    out.rows = a.cols;
    out.cols = b.cols;
    out.data.assign(a.cols * b.cols, 0.0);
    add_matmul_transa(a, b, out);
}

void add_matmul_transa(const Matrix& a, const Matrix& b, Matrix& out) {
    assert(a.rows == b.rows && out.rows == a.cols && out.cols == b.cols);
    for (std::size_t k = 0; k < a.rows; ++k) {
        const double* arow = a.row(k);
        const double* brow = b.row(k);
        for (std::size_t i = 0; i < a.cols; ++i) {
            const double av = arow[i];
            double* orow = out.row(i);
            for (std::size_t j = 0; j < b.cols; ++j) orow[j] += av * brow[j];
        }
    }
}

void add_row_broadcast(Matrix& m, const Matrix& bias) {
    assert(bias.rows == 1 && bias.cols == m.cols);
    for (std::size_t i = 0; i < m.rows; ++i) {
        double* row = m.row(i);
        for (std::size_t j = 0; j < m.cols; ++j) row[j] += bias(0, j);
    }
}

namespace ref {

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
    assert(a.cols == b.rows);
    out.rows = a.rows;
    out.cols = b.cols;
    out.data.assign(a.rows * b.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < b.cols; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) s += a(i, k) * b(k, j);
            out(i, j) = s;
        }
}

void matmul_transb(const Matrix& a, const Matrix& b, Matrix& out) {
    assert(a.cols == b.cols);
    out.rows = a.rows;
    out.cols = b.rows;
    out.data.assign(a.rows * b.rows, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < b.rows; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) s += a(i, k) * b(j, k);
            out(i, j) = s;
        }
}

void matmul_transa(const Matrix& a, const Matrix& b, Matrix& out) {
    assert(a.rows == b.rows);
    out.rows = a.cols;
    out.cols = b.cols;
    out.data.assign(a.cols * b.cols, 0.0);
    for (std::size_t i = 0; i < a.cols; ++i)
        for (std::size_t j = 0; j < b.cols; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.rows; ++k) s += a(k, i) * b(k, j);
            out(i, j) = s;
        }
}

}  // namespace ref
}  // namespace linalg

void softmax_inplace(double* x, std::size_t n) {
    if (n == 0) return;
    double mx = x[0];
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, x[i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::exp(x[i] - mx);
        sum += x[i];
    }
    for (std::size_t i = 0; i < n; ++i) x[i] /= sum;
}

std::string format_fixed(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
    return buf;
}

}  // namespace ctk
