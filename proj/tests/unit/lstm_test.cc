#include <gtest/gtest.h>

#include <cmath>

#include "mner/errors.h"
#include "mner/lstm.h"

namespace mner {
namespace {

void fill(LstmParams& p, double v) {
  for (Tensor* t : p.tensors())
    for (double& x : t->values()) x = v;
}

void randomize(LstmParams& p, Rng& rng, double r) {
  for (Tensor* t : p.tensors())
    for (double& x : t->values()) x = rng.uniform(-r, r);
}

TEST(Lstm, ZeroFixedPoint) {
  LstmParams p("l", 3, 4);
  fill(p, 0.0);
  const std::vector<double> x = {1, -2, 3}, h(4, 0.0), c(4, 0.0);
  const auto s = lstm_step(p, x, h, c);
  ASSERT_EQ(s.h.size(), 4u);
  ASSERT_EQ(s.c.size(), 4u);
  for (double v : s.h) EXPECT_EQ(v, 0.0);
  for (double v : s.c) EXPECT_EQ(v, 0.0);
}

TEST(Lstm, ScalarHandComputedStep) {
  LstmParams p("l", 1, 1);
  fill(p, 0.0);
  p.b_g.values()[0] = 1.0;
  const auto s = lstm_step(p, std::vector<double>{0.7}, std::vector<double>{0.0},
                           std::vector<double>{0.0});
  // c = 0.5 tanh(1), h = 0.5 tanh(c)
  EXPECT_NEAR(s.c[0], 0.380797, 1e-6);
  EXPECT_NEAR(s.h[0], 0.181700, 1e-6);
  EXPECT_DOUBLE_EQ(s.c[0], 0.5 * std::tanh(1.0));
  EXPECT_DOUBLE_EQ(s.h[0], 0.5 * std::tanh(0.5 * std::tanh(1.0)));
}

TEST(Lstm, ShapeMismatchThrows) {
  LstmParams p("l", 2, 2);
  EXPECT_THROW(lstm_step(p, std::vector<double>{1.0}, std::vector<double>(2),
                         std::vector<double>(2)),
               ShapeError);
}

TEST(Lstm, InitConventions) {
  LstmParams p("l", 5, 3);
  Rng rng(2);
  p.init(rng);
  const double bound = std::sqrt(6.0 / (3 + 8));
  for (Tensor* w : {&p.w_i, &p.w_f, &p.w_o, &p.w_g}) {
    EXPECT_EQ(w->shape(), (std::vector<std::size_t>{3, 8}));
    for (double v : w->values()) EXPECT_LE(std::abs(v), bound);
  }
  for (double v : p.b_f.values()) EXPECT_EQ(v, 1.0);
  for (double v : p.b_i.values()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(p.w_i.name(), "l.W_i");
}

TEST(BiLstm, SingleElementAndZeroParams) {
  BiLstmParams p("s", 2, 3);
  fill(p.fwd, 0.0);
  fill(p.bwd, 0.0);
  const Matrix m = bilstm_encode(p, {{1.0, 2.0}});
  EXPECT_EQ(m.rows, 1u);
  EXPECT_EQ(m.cols, 6u);
  for (double v : m.data) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(bilstm_encode(p, {}), ContractViolation);
}

TEST(BiLstm, ReversalSymmetry) {
  Rng rng(8);
  BiLstmParams p("s", 3, 4);
  randomize(p.fwd, rng, 0.5);
  randomize(p.bwd, rng, 0.5);
  BiLstmParams swapped = p;
  std::swap(swapped.fwd, swapped.bwd);
  std::vector<std::vector<double>> xs;
  for (int i = 0; i < 5; ++i) xs.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
  auto rev = xs;
  std::reverse(rev.begin(), rev.end());
  const Matrix a = bilstm_encode(p, xs);
  const Matrix b = bilstm_encode(swapped, rev);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_EQ(a(i, j), b(4 - i, 4 + j));
      EXPECT_EQ(a(i, 4 + j), b(4 - i, j));
    }
  }
  const Matrix again = bilstm_encode(p, xs);
  EXPECT_EQ(again.data, a.data);
}

TEST(BiLstm, GraphMatchesDirectEvaluation) {
  Rng rng(4);
  BiLstmParams p("s", 2, 3);
  randomize(p.fwd, rng, 0.7);
  randomize(p.bwd, rng, 0.7);
  std::vector<std::vector<double>> xs = {{0.1, -0.4}, {0.9, 0.2}, {-0.3, 0.5}};
  const Matrix direct = bilstm_encode(p, xs);
  Graph g;
  std::vector<Var> vs;
  for (const auto& x : xs) vs.push_back(g.input(x));
  const auto rows = bilstm_encode(g, p, vs);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(g.value(rows[i])[j], direct(i, j), 1e-14);
}

TEST(SequenceEmbed, SummaryLayout) {
  Rng rng(6);
  Tensor table("E", {4, 2});
  for (double& v : table.values()) v = rng.uniform(-1, 1);
  BiLstmParams p("c", 2, 3);
  randomize(p.fwd, rng, 0.6);
  randomize(p.bwd, rng, 0.6);
  const std::vector<int> ids = {1, 3, 2};
  Graph g;
  const Var v = sequence_embed(g, table, p, ids);
  ASSERT_EQ(g.size(v), 6u);
  std::vector<std::vector<double>> xs;
  for (int id : ids) xs.emplace_back(table.row(static_cast<std::size_t>(id)).begin(), table.row(static_cast<std::size_t>(id)).end());
  const Matrix m = bilstm_encode(p, xs);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_NEAR(g.value(v)[j], m(2, j), 1e-14);      // forward state after the last symbol
    EXPECT_NEAR(g.value(v)[3 + j], m(0, 3 + j), 1e-14);  // backward state after the first
  }
  Graph g2;
  EXPECT_THROW(sequence_embed(g2, table, p, std::vector<int>{}), ContractViolation);
}

TEST(Lstm, FiniteForLargeInputs) {
  Rng rng(1);
  LstmParams p("l", 4, 4);
  randomize(p, rng, 10.0);
  std::vector<double> x(4), h(4), c(4);
  for (double& v : x) v = rng.uniform(-10, 10);
  for (int step = 0; step < 20; ++step) {
    auto s = lstm_step(p, x, h, c);
    h = s.h;
    c = s.c;
    for (double v : h) ASSERT_TRUE(std::isfinite(v));
    for (double v : c) ASSERT_TRUE(std::isfinite(v));
  }
}

}  // namespace
}  // namespace mner
