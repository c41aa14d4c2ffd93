#pragma once

#include <cstddef>
#include <string>

namespace editsql::kernels {

// Double-precision kernels behind the tensor ops. Two implementations:
// portable scalar reference and AVX2+FMA, selected once at startup by
// cpuid. Set EDITSQL_FORCE_SCALAR=1 in the environment to pin the
// scalar path (used by the equivalence tests).
struct Ops {
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  void (*scale)(double alpha, double* x, std::size_t n);
  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  void (*hadamard)(const double* a, const double* b, double* out, std::size_t n);
  // y = A x, A row-major (rows x cols), x has cols entries
  void (*matvec)(const double* a, const double* x, double* y, std::size_t rows,
                 std::size_t cols);
  // y += A^T x, x has rows entries, y has cols entries
  void (*matvec_t_acc)(const double* a, const double* x, double* y,
                       std::size_t rows, std::size_t cols);
  // A += u v^T (rows = |u|, cols = |v|)
  void (*outer_acc)(const double* u, const double* v, double* a,
                    std::size_t rows, std::size_t cols);
  const char* name;
};

const Ops& scalar_ops();
#if defined(__x86_64__)
const Ops& avx2_ops();
bool avx2_supported();
#endif

// Active implementation for this process.
const Ops& active();
std::string active_name();

}  // namespace editsql::kernels
