#include <arm_neon.h>

#include "mner/kernels.h"

namespace mner::kernels {
namespace {

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale_neon(double a, double* x, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

double sum_squares_neon(const double* x, std::size_t n) {
  return dot_neon(x, x, n);
}

void gemv_neon(const double* w, const double* x, const double* b, double* y,
               std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double acc = dot_neon(w + r * cols, x, cols);
    y[r] = b ? acc + b[r] : acc;
  }
}

void gemv_t_acc_neon(const double* w, const double* x, double* y,
                     std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (x[r] != 0.0) axpy_neon(x[r], w + r * cols, y, cols);
  }
}

void ger_acc_neon(const double* u, const double* v, double* g,
                  std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (u[r] != 0.0) axpy_neon(u[r], v, g + r * cols, cols);
  }
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable table{Backend::kNeon, dot_neon,  axpy_neon,
                                 scale_neon,     sum_squares_neon,
                                 gemv_neon,      gemv_t_acc_neon,
                                 ger_acc_neon};
  return table;
}

}  // namespace mner::kernels
