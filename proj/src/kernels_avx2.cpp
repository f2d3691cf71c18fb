// AVX2+FMA kernels. Compiled only on x86-64 (this TU gets -mavx2 -mfma);
// selection happens at runtime in kernels_dispatch.cpp, so the binary
// still runs on non-AVX2 hosts via the scalar table.
//
// Vector lanes always map to independent output columns; the k-loop order
// matches the scalar reference, so differences against it are confined to
// FMA contraction rounding.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "r4/kernels.hpp"

namespace r4 {
namespace {

// C[MxN] += A[MxK] * B[KxN]. Broadcast-A microkernel: rows of B stay hot in
// L1 across the m loop; j is tiled 16/8/4 wide with a scalar tail.
void gemm_nn_acc(size_t M, size_t N, size_t K, const double* A, size_t lda,
                 const double* B, size_t ldb, double* C, size_t ldc) {
  size_t j = 0;
  for (; j + 16 <= N; j += 16) {
    for (size_t m = 0; m < M; ++m) {
      double* c = C + m * ldc + j;
      const double* a = A + m * lda;
      __m256d c0 = _mm256_loadu_pd(c + 0);
      __m256d c1 = _mm256_loadu_pd(c + 4);
      __m256d c2 = _mm256_loadu_pd(c + 8);
      __m256d c3 = _mm256_loadu_pd(c + 12);
      for (size_t k = 0; k < K; ++k) {
        const __m256d av = _mm256_set1_pd(a[k]);
        const double* b = B + k * ldb + j;
        c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b + 0), c0);
        c1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b + 4), c1);
        c2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b + 8), c2);
        c3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b + 12), c3);
      }
      _mm256_storeu_pd(c + 0, c0);
      _mm256_storeu_pd(c + 4, c1);
      _mm256_storeu_pd(c + 8, c2);
      _mm256_storeu_pd(c + 12, c3);
    }
  }
  for (; j + 8 <= N; j += 8) {
    for (size_t m = 0; m < M; ++m) {
      double* c = C + m * ldc + j;
      const double* a = A + m * lda;
      __m256d c0 = _mm256_loadu_pd(c + 0);
      __m256d c1 = _mm256_loadu_pd(c + 4);
      for (size_t k = 0; k < K; ++k) {
        const __m256d av = _mm256_set1_pd(a[k]);
        const double* b = B + k * ldb + j;
        c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b + 0), c0);
        c1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b + 4), c1);
      }
      _mm256_storeu_pd(c + 0, c0);
      _mm256_storeu_pd(c + 4, c1);
    }
  }
  for (; j + 4 <= N; j += 4) {
    for (size_t m = 0; m < M; ++m) {
      double* c = C + m * ldc + j;
      const double* a = A + m * lda;
      __m256d c0 = _mm256_loadu_pd(c);
      for (size_t k = 0; k < K; ++k)
        c0 = _mm256_fmadd_pd(_mm256_set1_pd(a[k]), _mm256_loadu_pd(B + k * ldb + j), c0);
      _mm256_storeu_pd(c, c0);
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

// C[IxJ] += A^T B with A: MxI, B: MxJ. Same broadcast structure; the m loop
// is outermost to keep the accumulation order identical to the reference.
void gemm_tn_acc(size_t I, size_t J, size_t M, const double* A, size_t lda,
                 const double* B, size_t ldb, double* C, size_t ldc) {
  for (size_t m = 0; m < M; ++m) {
    const double* a = A + m * lda;
    const double* b = B + m * ldb;
    for (size_t i = 0; i < I; ++i) {
      const __m256d av = _mm256_set1_pd(a[i]);
      double* c = C + i * ldc;
      size_t jj = 0;
      for (; jj + 8 <= J; jj += 8) {
        _mm256_storeu_pd(c + jj,
                         _mm256_fmadd_pd(av, _mm256_loadu_pd(b + jj), _mm256_loadu_pd(c + jj)));
        _mm256_storeu_pd(
            c + jj + 4,
            _mm256_fmadd_pd(av, _mm256_loadu_pd(b + jj + 4), _mm256_loadu_pd(c + jj + 4)));
      }
      for (; jj + 4 <= J; jj += 4)
        _mm256_storeu_pd(c + jj,
                         _mm256_fmadd_pd(av, _mm256_loadu_pd(b + jj), _mm256_loadu_pd(c + jj)));
      for (; jj < J; ++jj) c[jj] = std::fma(a[i], b[jj], c[jj]);
    }
  }
}

// C[MxN] += A[MxK] * B^T (B: NxK). Row-dot kernel with 4 column lanes.
void gemm_nt_acc(size_t M, size_t N, size_t K, const double* A, size_t lda,
                 const double* B, size_t ldb, double* C, size_t ldc) {
  for (size_t m = 0; m < M; ++m) {
    const double* a = A + m * lda;
    double* c = C + m * ldc;
    for (size_t j = 0; j < N; ++j) {
      const double* b = B + j * ldb;
      __m256d acc = _mm256_setzero_pd();
      size_t k = 0;
      for (; k + 4 <= K; k += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc);
      __m128d lo = _mm256_castpd256_pd128(acc);
      __m128d hi = _mm256_extractf128_pd(acc, 1);
      lo = _mm_add_pd(lo, hi);
      double s = _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
      for (; k < K; ++k) s = std::fma(a[k], b[k], s);
      c[j] += s;
    }
  }
}

void add_bias_rows(size_t M, size_t N, double* C, size_t ldc, const double* bias) {
  for (size_t m = 0; m < M; ++m) {
    double* c = C + m * ldc;
    size_t j = 0;
    for (; j + 4 <= N; j += 4)
      _mm256_storeu_pd(c + j, _mm256_add_pd(_mm256_loadu_pd(c + j), _mm256_loadu_pd(bias + j)));
    for (; j < N; ++j) c[j] += bias[j];
  }
}

void sum_rows_acc(size_t M, size_t N, const double* X, size_t ldx, double* out) {
  for (size_t m = 0; m < M; ++m) {
    const double* x = X + m * ldx;
    size_t j = 0;
    for (; j + 4 <= N; j += 4)
      _mm256_storeu_pd(out + j, _mm256_add_pd(_mm256_loadu_pd(out + j), _mm256_loadu_pd(x + j)));
    for (; j < N; ++j) out[j] += x[j];
  }
}

void relu_forward(size_t n, const double* x, double* y) {
  const __m256d zero = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, _mm256_max_pd(zero, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_acc(size_t n, const double* x, const double* dy, double* dx) {
  const __m256d zero = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
    const __m256d g = _mm256_and_pd(mask, _mm256_loadu_pd(dy + i));
    _mm256_storeu_pd(dx + i, _mm256_add_pd(_mm256_loadu_pd(dx + i), g));
  }
  for (; i < n; ++i)
    if (x[i] > 0.0) dx[i] += dy[i];
}

void axpy(size_t n, double a, const double* x, double* y) {
  const __m256d av = _mm256_set1_pd(a);
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

double dot(size_t n, const double* x, const double* y) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  __m128d lo = _mm256_castpd256_pd128(acc);
  __m128d hi = _mm256_extractf128_pd(acc, 1);
  lo = _mm_add_pd(lo, hi);
  double s = _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
  for (; i < n; ++i) s = std::fma(x[i], y[i], s);
  return s;
}

void scale(size_t n, double a, double* x) {
  const __m256d av = _mm256_set1_pd(a);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

void adam_update(size_t n, double* p, const double* g, double* m, double* v,
                 double beta1, double beta2, double eps, double lr, double c1, double c2) {
  const __m256d b1 = _mm256_set1_pd(beta1), ob1 = _mm256_set1_pd(1.0 - beta1);
  const __m256d b2 = _mm256_set1_pd(beta2), ob2 = _mm256_set1_pd(1.0 - beta2);
  const __m256d ic1 = _mm256_set1_pd(1.0 / c1), ic2 = _mm256_set1_pd(1.0 / c2);
  const __m256d lrv = _mm256_set1_pd(lr), epsv = _mm256_set1_pd(eps);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gi = _mm256_loadu_pd(g + i);
    __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(ob1, gi));
    __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                               _mm256_mul_pd(ob2, _mm256_mul_pd(gi, gi)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d mhat = _mm256_mul_pd(mi, ic1);
    const __m256d vhat = _mm256_mul_pd(vi, ic2);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), epsv);
    const __m256d step = _mm256_div_pd(_mm256_mul_pd(lrv, mhat), denom);
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
    p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
  }
}

}  // namespace

const Kernels* avx2_kernels_or_null() {
  static const Kernels k = {gemm_nn_acc, gemm_tn_acc,  gemm_nt_acc, add_bias_rows,
                            sum_rows_acc, relu_forward, relu_backward_acc,
                            axpy,         dot,          scale,       adam_update,
                            "avx2"};
  return &k;
}

}  // namespace r4

#else

#include "r4/kernels.hpp"

namespace r4 {
const Kernels* avx2_kernels_or_null() { return nullptr; }
}  // namespace r4

#endif
