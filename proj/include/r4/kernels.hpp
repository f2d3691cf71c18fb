#pragma once

// Double-precision arithmetic kernels behind the layer implementations.
// Every kernel has a scalar reference implementation plus SIMD variants
// (AVX2+FMA on x86-64, NEON on aarch64) selected once at startup; the
// active table is process-global. Equivalence between backends is
// tolerance-tested (FMA contraction changes rounding, not semantics).
//
// All matrices are row-major with an explicit row stride (leading
// dimension). GEMM kernels accumulate into C; callers zero C when they
// need a plain product. Accumulation over k runs in index order in every
// backend, so each backend is bit-deterministic run to run.

#include <cstddef>
#include <string>

namespace r4 {

struct Kernels {
  // C[MxN] += A[MxK] * B[KxN]
  void (*gemm_nn_acc)(size_t M, size_t N, size_t K, const double* A, size_t lda,
                      const double* B, size_t ldb, double* C, size_t ldc);
  // C[IxJ] += sum_m A[m][i] * B[m][j]   (A is MxI, B is MxJ; C += A^T B)
  void (*gemm_tn_acc)(size_t I, size_t J, size_t M, const double* A, size_t lda,
                      const double* B, size_t ldb, double* C, size_t ldc);
  // C[MxN] += A[MxK] * B^T  (B is NxK)
  void (*gemm_nt_acc)(size_t M, size_t N, size_t K, const double* A, size_t lda,
                      const double* B, size_t ldb, double* C, size_t ldc);
  // rows of C[MxN] += bias[N]
  void (*add_bias_rows)(size_t M, size_t N, double* C, size_t ldc, const double* bias);
  // out[N] += column sums of X[MxN]
  void (*sum_rows_acc)(size_t M, size_t N, const double* X, size_t ldx, double* out);
  void (*relu_forward)(size_t n, const double* x, double* y);
  // dx[i] += dy[i] * (x[i] > 0)
  void (*relu_backward_acc)(size_t n, const double* x, const double* dy, double* dx);
  void (*axpy)(size_t n, double a, const double* x, double* y);  // y += a*x
  double (*dot)(size_t n, const double* x, const double* y);
  void (*scale)(size_t n, double a, double* x);  // x *= a
  // One Adam step over a flat span; m, v are first/second moment buffers,
  // c1 = 1-beta1^t and c2 = 1-beta2^t are the bias corrections.
  void (*adam_update)(size_t n, double* p, const double* g, double* m, double* v,
                      double beta1, double beta2, double eps, double lr, double c1, double c2);
  const char* name;
};

// Active table. Selected at first use: R4_KERNELS env var (scalar|avx2|neon)
// overrides, otherwise the best variant the CPU supports.
const Kernels& kernels();

// Force a backend (primarily for equivalence tests). Throws on unknown or
// unsupported names.
void set_kernel_backend(const std::string& name);

const Kernels& scalar_kernels();
bool avx2_available();
const Kernels* avx2_kernels_or_null();
bool neon_available();
const Kernels* neon_kernels_or_null();

}  // namespace r4
