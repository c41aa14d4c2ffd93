// AVX2+FMA variants. This translation unit is compiled with -mavx2 -mfma;
// nothing here may be called unless avx2_supported() returned true.
#include "editsql/kernels.hpp"

#if defined(__x86_64__)

#include <immintrin.h>

namespace editsql::kernels {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_v(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return hsum(_mm256_add_pd(acc0, acc1)) + tail;
}

void axpy_v(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_v(double alpha, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

void add_v(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i,
                     _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void hadamard_v(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i,
                     _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void matvec_v(const double* a, const double* x, double* y, std::size_t rows,
              std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_v(a + r * cols, x, cols);
}

void matvec_t_acc_v(const double* a, const double* x, double* y,
                    std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy_v(x[r], a + r * cols, y, cols);
}

void outer_acc_v(const double* u, const double* v, double* a, std::size_t rows,
                 std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy_v(u[r], v, a + r * cols, cols);
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops ops = {dot_v,      axpy_v,   scale_v,        add_v,
                          hadamard_v, matvec_v, matvec_t_acc_v, outer_acc_v,
                          "avx2"};
  return ops;
}

bool avx2_supported() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

}  // namespace editsql::kernels

#endif  // __x86_64__
