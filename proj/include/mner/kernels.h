#pragma once
// Dense double-precision inner loops used by the numeric core.
//
// Every kernel has a portable scalar reference implementation. On x86-64 an
// AVX2+FMA variant and on AArch64 a NEON variant are compiled in and picked
// at runtime when the CPU supports them. Vector variants may differ from the
// scalar reference in the last few ulps (FMA, reassociated sums); within one
// process the selected backend is fixed, so results are reproducible.

#include <cstddef>
#include <span>
#include <string_view>

namespace mner::kernels {

enum class Backend { kScalar, kAvx2, kNeon };

struct KernelTable {
  Backend backend;
  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // x[i] *= a
  void (*scale)(double a, double* x, std::size_t n);
  // sum_i x[i]^2
  double (*sum_squares)(const double* x, std::size_t n);
  // y = W x + b, W row-major rows x cols; b may be null.
  void (*gemv)(const double* w, const double* x, const double* b, double* y,
               std::size_t rows, std::size_t cols);
  // y += W^T x, W row-major rows x cols.
  void (*gemv_t_acc)(const double* w, const double* x, double* y,
                     std::size_t rows, std::size_t cols);
  // G += u v^T, G row-major rows x cols.
  void (*ger_acc)(const double* u, const double* v, double* g,
                  std::size_t rows, std::size_t cols);
};

const KernelTable& scalar_table();
#if defined(MNER_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(MNER_HAVE_NEON)
const KernelTable& neon_table();
#endif

// Best backend supported by this CPU, unless overridden via select() or the
// MNER_KERNELS environment variable ("scalar", "avx2", "neon").
const KernelTable& active();

// Returns false when the requested backend is unavailable on this build/CPU.
bool select(Backend b);
bool available(Backend b);
std::string_view backend_name(Backend b);

// Convenience wrappers over active().
inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}
inline void scale(double a, std::span<double> x) {
  active().scale(a, x.data(), x.size());
}
inline double sum_squares(std::span<const double> x) {
  return active().sum_squares(x.data(), x.size());
}

}  // namespace mner::kernels
