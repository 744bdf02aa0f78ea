#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ctk {

// Row-major dense matrix of doubles. All training-path arithmetic is 64-bit.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::size_t size() const { return data.size(); }

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }
};

namespace linalg {

// out = a * b. Parallelized over output rows; each output element is
// produced by exactly one thread with a fixed-order inner loop, so results
// are bit-identical regardless of thread count.
void matmul(const Matrix& a, const Matrix& b, Matrix& out);

// out = a * b^T and out = a^T * b, same determinism contract.
void matmul_transb(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_transa(const Matrix& a, const Matrix& b, Matrix& out);

// out += a^T * b (gradient accumulation form).
void add_matmul_transa(const Matrix& a, const Matrix& b, Matrix& out);

void add_row_broadcast(Matrix& m, const Matrix& bias);  // bias is 1 x cols

// Serial reference kernels, kept for equivalence tests and benchmarking.
namespace ref {
void matmul(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_transb(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_transa(const Matrix& a, const Matrix& b, Matrix& out);
}  // namespace ref

}  // namespace linalg

// Numerically stable softmax over a contiguous span; writes in place.
void softmax_inplace(double* x, std::size_t n);

std::string format_fixed(double value, int digits);  // printf %.Nf

}  // namespace ctk
