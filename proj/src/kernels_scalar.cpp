#include "editsql/kernels.hpp"

#include <cstdlib>

namespace editsql::kernels {

namespace {

double dot_s(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_s(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_s(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void add_s(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void hadamard_s(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void matvec_s(const double* a, const double* x, double* y, std::size_t rows,
              std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_s(a + r * cols, x, cols);
}

void matvec_t_acc_s(const double* a, const double* x, double* y,
                    std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy_s(x[r], a + r * cols, y, cols);
}

void outer_acc_s(const double* u, const double* v, double* a, std::size_t rows,
                 std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy_s(u[r], v, a + r * cols, cols);
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops = {dot_s,    axpy_s,   scale_s,        add_s,
                          hadamard_s, matvec_s, matvec_t_acc_s, outer_acc_s,
                          "scalar"};
  return ops;
}

const Ops& active() {
  static const Ops& ops = []() -> const Ops& {
    const char* force = std::getenv("EDITSQL_FORCE_SCALAR");
    if (force && force[0] == '1') return scalar_ops();
#if defined(__x86_64__)
    if (avx2_supported()) return avx2_ops();
#endif
    return scalar_ops();
  }();
  return ops;
}

std::string active_name() { return active().name; }

}  // namespace editsql::kernels
