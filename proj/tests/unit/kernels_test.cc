#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "mner/kernels.h"
#include "mner/rng.h"

namespace mner::kernels {
namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

// Vector backends may reassociate sums; bound the difference relative to
// the magnitude of the terms.
void expect_close(double a, double b, double scale) {
  EXPECT_LE(std::abs(a - b), 1e-13 * std::max(1.0, scale));
}

std::vector<const KernelTable*> vector_backends() {
  std::vector<const KernelTable*> out;
#if defined(MNER_HAVE_AVX2)
  if (available(Backend::kAvx2)) out.push_back(&avx2_table());
#endif
#if defined(MNER_HAVE_NEON)
  if (available(Backend::kNeon)) out.push_back(&neon_table());
#endif
  return out;
}

TEST(Kernels, ScalarReferenceValues) {
  const auto& s = scalar_table();
  const std::vector<double> x = {1, 2, 3};
  const std::vector<double> y = {4, 5, 6};
  EXPECT_EQ(s.dot(x.data(), y.data(), 3), 32.0);
  EXPECT_EQ(s.sum_squares(x.data(), 3), 14.0);
  std::vector<double> z = y;
  s.axpy(2.0, x.data(), z.data(), 3);
  EXPECT_EQ(z, (std::vector<double>{6, 9, 12}));
  s.scale(0.5, z.data(), 3);
  EXPECT_EQ(z, (std::vector<double>{3, 4.5, 6}));

  const std::vector<double> w = {1, 2, 3, 4};  // [[1,2],[3,4]]
  const std::vector<double> h = {1, 1};
  std::vector<double> out(2);
  s.gemv(w.data(), h.data(), nullptr, out.data(), 2, 2);
  EXPECT_EQ(out, (std::vector<double>{3, 7}));
  const std::vector<double> b = {0.5, -1};
  s.gemv(w.data(), h.data(), b.data(), out.data(), 2, 2);
  EXPECT_EQ(out, (std::vector<double>{3.5, 6}));

  std::vector<double> acc = {1, 1};
  s.gemv_t_acc(w.data(), std::vector<double>{1, 2}.data(), acc.data(), 2, 2);
  EXPECT_EQ(acc, (std::vector<double>{8, 11}));

  std::vector<double> g(4, 0.0);
  s.ger_acc(std::vector<double>{1, 2}.data(), std::vector<double>{3, 4}.data(), g.data(), 2, 2);
  EXPECT_EQ(g, (std::vector<double>{3, 4, 6, 8}));
}

TEST(Kernels, VectorBackendsMatchScalar) {
  const auto backends = vector_backends();
  if (backends.empty()) GTEST_SKIP() << "no vector backend on this CPU";
  const auto& ref = scalar_table();
  Rng rng(3);
  for (const KernelTable* t : backends) {
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 17u, 33u, 100u, 257u}) {
      const auto x = random_vec(rng, n);
      const auto y = random_vec(rng, n);
      expect_close(t->dot(x.data(), y.data(), n), ref.dot(x.data(), y.data(), n), 4.0 * n);
      expect_close(t->sum_squares(x.data(), n), ref.sum_squares(x.data(), n), 4.0 * n);

      auto y1 = y, y2 = y;
      t->axpy(0.37, x.data(), y1.data(), n);
      ref.axpy(0.37, x.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) expect_close(y1[i], y2[i], 4.0);

      auto s1 = x, s2 = x;
      t->scale(-1.5, s1.data(), n);
      ref.scale(-1.5, s2.data(), n);
      EXPECT_EQ(s1, s2);
    }
    for (std::size_t rows : {1u, 3u, 8u, 13u}) {
      for (std::size_t cols : {1u, 4u, 7u, 9u, 32u, 61u}) {
        const auto w = random_vec(rng, rows * cols);
        const auto x = random_vec(rng, cols);
        const auto b = random_vec(rng, rows);
        std::vector<double> o1(rows), o2(rows);
        t->gemv(w.data(), x.data(), b.data(), o1.data(), rows, cols);
        ref.gemv(w.data(), x.data(), b.data(), o2.data(), rows, cols);
        for (std::size_t i = 0; i < rows; ++i) expect_close(o1[i], o2[i], 4.0 * cols);

        const auto u = random_vec(rng, rows);
        auto a1 = random_vec(rng, cols);
        auto a2 = a1;
        t->gemv_t_acc(w.data(), u.data(), a1.data(), rows, cols);
        ref.gemv_t_acc(w.data(), u.data(), a2.data(), rows, cols);
        for (std::size_t i = 0; i < cols; ++i) expect_close(a1[i], a2[i], 4.0 * rows);

        auto g1 = w, g2 = w;
        t->ger_acc(u.data(), x.data(), g1.data(), rows, cols);
        ref.ger_acc(u.data(), x.data(), g2.data(), rows, cols);
        for (std::size_t i = 0; i < g1.size(); ++i) expect_close(g1[i], g2[i], 8.0);
      }
    }
  }
}

TEST(Kernels, SelectSwitchesBackend) {
  const Backend before = active().backend;
  ASSERT_TRUE(select(Backend::kScalar));
  EXPECT_EQ(active().backend, Backend::kScalar);
  EXPECT_EQ(backend_name(Backend::kScalar), "scalar");
  EXPECT_TRUE(available(Backend::kScalar));
  ASSERT_TRUE(select(before));
  EXPECT_EQ(active().backend, before);
}

}  // namespace
}  // namespace mner::kernels
