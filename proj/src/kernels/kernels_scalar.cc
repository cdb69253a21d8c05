#include "mner/kernels.h"

namespace mner::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double sum_squares_scalar(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}

void gemv_scalar(const double* w, const double* x, const double* b, double* y,
                 std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double acc = dot_scalar(w + r * cols, x, cols);
    y[r] = b ? acc + b[r] : acc;
  }
}

void gemv_t_acc_scalar(const double* w, const double* x, double* y,
                       std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (x[r] != 0.0) axpy_scalar(x[r], w + r * cols, y, cols);
  }
}

void ger_acc_scalar(const double* u, const double* v, double* g,
                    std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (u[r] != 0.0) axpy_scalar(u[r], v, g + r * cols, cols);
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Backend::kScalar, dot_scalar,  axpy_scalar,
                                 scale_scalar,     sum_squares_scalar,
                                 gemv_scalar,      gemv_t_acc_scalar,
                                 ger_acc_scalar};
  return table;
}

}  // namespace mner::kernels
