#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "mner/errors.h"
#include "mner/optim.h"

namespace mner {
namespace {

TEST(Dropout, RateZeroIsAllOnesAndDrawsNothing) {
  Rng rng(1), untouched(1);
  const auto m = dropout_mask(10, 0.0, rng);
  for (double v : m) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(rng.next_u64(), untouched.next_u64());
}

TEST(Dropout, InvertedScalingAndSurvivalRate) {
  Rng rng(123);
  const auto m = dropout_mask(100000, 0.5, rng);
  std::size_t kept = 0;
  for (double v : m) {
    ASSERT_TRUE(v == 0.0 || v == 2.0);
    if (v != 0.0) ++kept;
  }
  const double frac = static_cast<double>(kept) / 100000.0;
  EXPECT_NEAR(frac, 0.5, 0.01);
}

TEST(Dropout, RateOneRejected) {
  Rng rng(1);
  EXPECT_THROW(dropout_mask(3, 1.0, rng), ContractViolation);
  EXPECT_THROW(dropout_mask(3, -0.1, rng), ContractViolation);
}

TEST(Sgd, ScalarUpdate) {
  Tensor t = Tensor::from_values("theta", {1}, {1.0});
  t.grads()[0] = 1.0;
  Tensor* ps[] = {&t};
  const auto st = sgd_step(ps, 0.01, 5.0);
  EXPECT_DOUBLE_EQ(t.values()[0], 0.99);
  EXPECT_EQ(t.grads()[0], 0.0);
  EXPECT_FALSE(st.clipped);
}

TEST(Sgd, ZeroGradLeavesParameters) {
  Tensor t = Tensor::from_values("theta", {3}, {1, 2, 3});
  Tensor* ps[] = {&t};
  sgd_step(ps, 0.5, 5.0);
  EXPECT_EQ(t.values()[2], 3.0);
}

TEST(Sgd, ClipsByGlobalNorm) {
  Tensor a = Tensor::from_values("a", {1}, {0.0});
  Tensor b = Tensor::from_values("b", {1}, {0.0});
  a.grads()[0] = 6.0;
  b.grads()[0] = 8.0;  // norm 10
  Tensor* ps[] = {&a, &b};
  EXPECT_DOUBLE_EQ(global_grad_norm(ps), 10.0);
  const auto st = sgd_step(ps, 1.0, 5.0);
  EXPECT_TRUE(st.clipped);
  EXPECT_DOUBLE_EQ(st.grad_norm, 10.0);
  EXPECT_DOUBLE_EQ(a.values()[0], -3.0);
  EXPECT_DOUBLE_EQ(b.values()[0], -4.0);
}

TEST(Sgd, NonFiniteGradientNamesParameter) {
  Tensor a = Tensor::from_values("good", {1}, {1.0});
  Tensor b = Tensor::from_values("bad.W", {2}, {1.0, 2.0});
  a.grads()[0] = 1.0;
  b.grads()[1] = std::numeric_limits<double>::quiet_NaN();
  Tensor* ps[] = {&a, &b};
  try {
    sgd_step(ps, 0.1, 5.0);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.W"), std::string::npos);
  }
  EXPECT_EQ(a.values()[0], 1.0);
}

TEST(Sgd, RowTrackedTableOnlyTouchedRowsMove) {
  Tensor e = Tensor::from_values("E", {3, 2}, {1, 1, 1, 1, 1, 1});
  e.set_row_tracking(true);
  e.grad_row(1)[0] = 1.0;
  e.mark_row(1);
  Tensor* ps[] = {&e};
  sgd_step(ps, 0.5, 100.0);
  EXPECT_EQ(e.row(1)[0], 0.5);
  EXPECT_EQ(e.row(0)[0], 1.0);
  EXPECT_TRUE(e.touched_rows().empty());
}

TEST(Sgd, FrozenTensorsSkipped) {
  Tensor f = Tensor::from_values("f", {1}, {1.0}, false);
  f.grads()[0] = 3.0;
  Tensor* ps[] = {&f};
  sgd_step(ps, 1.0, 5.0);
  EXPECT_EQ(f.values()[0], 1.0);
}

}  // namespace
}  // namespace mner
