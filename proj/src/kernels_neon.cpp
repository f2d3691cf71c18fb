// NEON kernels for aarch64 (float64x2). Structure mirrors the AVX2 TU at
// half the vector width; NEON is architecturally guaranteed on aarch64 so
// availability is a compile-time fact.

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>
#include <cstddef>

#include "r4/kernels.hpp"

namespace r4 {
namespace {

void gemm_nn_acc(size_t M, size_t N, size_t K, const double* A, size_t lda,
                 const double* B, size_t ldb, double* C, size_t ldc) {
  size_t j = 0;
  for (; j + 8 <= N; j += 8) {
    for (size_t m = 0; m < M; ++m) {
      double* c = C + m * ldc + j;
      const double* a = A + m * lda;
      float64x2_t c0 = vld1q_f64(c + 0);
      float64x2_t c1 = vld1q_f64(c + 2);
      float64x2_t c2 = vld1q_f64(c + 4);
      float64x2_t c3 = vld1q_f64(c + 6);
      for (size_t k = 0; k < K; ++k) {
        const float64x2_t av = vdupq_n_f64(a[k]);
        const double* b = B + k * ldb + j;
        c0 = vfmaq_f64(c0, av, vld1q_f64(b + 0));
        c1 = vfmaq_f64(c1, av, vld1q_f64(b + 2));
        c2 = vfmaq_f64(c2, av, vld1q_f64(b + 4));
        c3 = vfmaq_f64(c3, av, vld1q_f64(b + 6));
      }
      vst1q_f64(c + 0, c0);
      vst1q_f64(c + 2, c1);
      vst1q_f64(c + 4, c2);
      vst1q_f64(c + 6, c3);
    }
  }
  for (; j + 2 <= N; j += 2) {
    for (size_t m = 0; m < M; ++m) {
      double* c = C + m * ldc + j;
      const double* a = A + m * lda;
      float64x2_t c0 = vld1q_f64(c);
      for (size_t k = 0; k < K; ++k)
        c0 = vfmaq_f64(c0, vdupq_n_f64(a[k]), vld1q_f64(B + k * ldb + j));
      vst1q_f64(c, c0);
    }
  }
  if (j < N) {
    for (size_t m = 0; m < M; ++m) {
      double* c = C + m * ldc;
      const double* a = A + m * lda;
      for (size_t k = 0; k < K; ++k) {
        const double av = a[k];
        const double* b = B + k * ldb;
        for (size_t jj = j; jj < N; ++jj) c[jj] = std::fma(av, b[jj], c[jj]);
      }
    }
  }
}

void gemm_tn_acc(size_t I, size_t J, size_t M, const double* A, size_t lda,
                 const double* B, size_t ldb, double* C, size_t ldc) {
  for (size_t m = 0; m < M; ++m) {
    const double* a = A + m * lda;
    const double* b = B + m * ldb;
    for (size_t i = 0; i < I; ++i) {
      const float64x2_t av = vdupq_n_f64(a[i]);
      double* c = C + i * ldc;
      size_t jj = 0;
      for (; jj + 2 <= J; jj += 2)
        vst1q_f64(c + jj, vfmaq_f64(vld1q_f64(c + jj), av, vld1q_f64(b + jj)));
      for (; jj < J; ++jj) c[jj] = std::fma(a[i], b[jj], c[jj]);
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
      float64x2_t acc = vdupq_n_f64(0.0);
      size_t k = 0;
      for (; k + 2 <= K; k += 2) acc = vfmaq_f64(acc, vld1q_f64(a + k), vld1q_f64(b + k));
      double s = vaddvq_f64(acc);
      for (; k < K; ++k) s = std::fma(a[k], b[k], s);
      c[j] += s;
    }
  }
}

void add_bias_rows(size_t M, size_t N, double* C, size_t ldc, const double* bias) {
  for (size_t m = 0; m < M; ++m) {
    double* c = C + m * ldc;
    size_t j = 0;
    for (; j + 2 <= N; j += 2) vst1q_f64(c + j, vaddq_f64(vld1q_f64(c + j), vld1q_f64(bias + j)));
    for (; j < N; ++j) c[j] += bias[j];
  }
}

void sum_rows_acc(size_t M, size_t N, const double* X, size_t ldx, double* out) {
  for (size_t m = 0; m < M; ++m) {
    const double* x = X + m * ldx;
    size_t j = 0;
    for (; j + 2 <= N; j += 2) vst1q_f64(out + j, vaddq_f64(vld1q_f64(out + j), vld1q_f64(x + j)));
    for (; j < N; ++j) out[j] += x[j];
  }
}

void relu_forward(size_t n, const double* x, double* y) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vmaxq_f64(zero, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_acc(size_t n, const double* x, const double* dy, double* dx) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const uint64x2_t mask = vcgtq_f64(vld1q_f64(x + i), zero);
    const float64x2_t g =
        vreinterpretq_f64_u64(vandq_u64(mask, vreinterpretq_u64_f64(vld1q_f64(dy + i))));
    vst1q_f64(dx + i, vaddq_f64(vld1q_f64(dx + i), g));
  }
  for (; i < n; ++i)
    if (x[i] > 0.0) dx[i] += dy[i];
}

void axpy(size_t n, double a, const double* x, double* y) {
  const float64x2_t av = vdupq_n_f64(a);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), av, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

double dot(size_t n, const double* x, const double* y) {
  float64x2_t acc = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(x + i), vld1q_f64(y + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s = std::fma(x[i], y[i], s);
  return s;
}

void scale(size_t n, double a, double* x) {
  const float64x2_t av = vdupq_n_f64(a);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(av, vld1q_f64(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

void adam_update(size_t n, double* p, const double* g, double* m, double* v,
                 double beta1, double beta2, double eps, double lr, double c1, double c2) {
  for (size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
    p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
  }
}

}  // namespace

const Kernels* neon_kernels_or_null() {
  static const Kernels k = {gemm_nn_acc, gemm_tn_acc,  gemm_nt_acc, add_bias_rows,
                            sum_rows_acc, relu_forward, relu_backward_acc,
                            axpy,         dot,          scale,       adam_update,
                            "neon"};
  return &k;
}

}  // namespace r4

#else

#include "r4/kernels.hpp"

namespace r4 {
const Kernels* neon_kernels_or_null() { return nullptr; }
}  // namespace r4

#endif
