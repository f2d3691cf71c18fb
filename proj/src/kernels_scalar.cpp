// Scalar reference kernels. These define the semantics the SIMD variants
// are tested against; keep them simple and obviously correct.

#include <cmath>
#include <cstddef>

#include "r4/kernels.hpp"

namespace r4 {
namespace {

void gemm_nn_acc(size_t M, size_t N, size_t K, const double* A, size_t lda,
                 const double* B, size_t ldb, double* C, size_t ldc) {
  for (size_t m = 0; m < M; ++m) {
    double* c = C + m * ldc;
    const double* a = A + m * lda;
    for (size_t k = 0; k < K; ++k) {
      const double av = a[k];
      const double* b = B + k * ldb;
      for (size_t j = 0; j < N; ++j) c[j] += av * b[j];
    }
  }
}

void gemm_tn_acc(size_t I, size_t J, size_t M, const double* A, size_t lda,
                 const double* B, size_t ldb, double* C, size_t ldc) {
  for (size_t m = 0; m < M; ++m) {
    const double* a = A + m * lda;
    const double* b = B + m * ldb;
    for (size_t i = 0; i < I; ++i) {
      const double av = a[i];
      double* c = C + i * ldc;
      for (size_t j = 0; j < J; ++j) c[j] += av * b[j];
    }
  }
}

void gemm_nt_acc(size_t M, size_t N, size_t K, const double* A, size_t lda,
                 const double* B, size_t ldb, double* C, size_t ldc) {
  for (size_t m = 0; m < M; ++m) {
    const double* a = A + m * lda;
    double* c = C + m * ldc;
    for (size_t j = 0; j < N; ++j) {
      const double* b = B + j * ldb;
      double acc = 0.0;
      for (size_t k = 0; k < K; ++k) acc += a[k] * b[k];
      c[j] += acc;
    }
  }
}

void add_bias_rows(size_t M, size_t N, double* C, size_t ldc, const double* bias) {
  for (size_t m = 0; m < M; ++m) {
    double* c = C + m * ldc;
    for (size_t j = 0; j < N; ++j) c[j] += bias[j];
  }
}

void sum_rows_acc(size_t M, size_t N, const double* X, size_t ldx, double* out) {
  for (size_t m = 0; m < M; ++m) {
    const double* x = X + m * ldx;
    for (size_t j = 0; j < N; ++j) out[j] += x[j];
  }
}

void relu_forward(size_t n, const double* x, double* y) {
  for (size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_acc(size_t n, const double* x, const double* dy, double* dx) {
  for (size_t i = 0; i < n; ++i)
    if (x[i] > 0.0) dx[i] += dy[i];
}

void axpy(size_t n, double a, const double* x, double* y) {
  for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot(size_t n, const double* x, const double* y) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void scale(size_t n, double a, double* x) {
  for (size_t i = 0; i < n; ++i) x[i] *= a;
}

void adam_update(size_t n, double* p, const double* g, double* m, double* v,
                 double beta1, double beta2, double eps, double lr, double c1, double c2) {
  for (size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
    const double mhat = m[i] / c1;
    const double vhat = v[i] / c2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k = {gemm_nn_acc, gemm_tn_acc,  gemm_nt_acc, add_bias_rows,
                            sum_rows_acc, relu_forward, relu_backward_acc,
                            axpy,         dot,          scale,       adam_update,
                            "scalar"};
  return k;
}

}  // namespace r4
