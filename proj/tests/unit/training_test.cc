#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "mner/errors.h"
#include "mner/optim.h"
#include "mner/training.h"
#include "synthetic.h"

namespace mner {
namespace {

namespace fs = std::filesystem;

TaggerModel fresh(const std::vector<Sentence>& corpus, std::size_t dim = 8) {
  TaggerConfig cfg;
  cfg.word_dim = cfg.char_dim = cfg.morph_dim = cfg.hidden_dim = dim;
  cfg.morph_scheme = morpho::Scheme::kWR;
  Rng rng(2);
  return TaggerModel::create(cfg, build_vocabs(corpus, cfg.morph_scheme), nullptr, rng);
}

std::vector<std::vector<double>> snapshot(const TaggerModel& m) {
  std::vector<std::vector<double>> out;
  for (const Tensor* t : m.parameters()) out.emplace_back(t->values().begin(), t->values().end());
  return out;
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.lr = 0.0;
  EXPECT_NO_THROW(c.validate());
  c.lr = -0.01;
  EXPECT_THROW(c.validate(), ContractViolation);
  c = TrainConfig{};
  c.epochs = 0;
  EXPECT_THROW(c.validate(), ContractViolation);
}

TEST(Training, EmptyTrainingSetRejected) {
  const auto corpus = testing::synthetic_corpus(1, 3);
  auto m = fresh(corpus);
  EXPECT_THROW(train(m, {}, {}, TrainConfig{}), ContractViolation);
}

TEST(Training, ZeroLearningRateLeavesParameters) {
  const auto corpus = testing::synthetic_corpus(1, 4);
  auto m = fresh(corpus);
  const auto before = snapshot(m);
  TrainConfig c;
  c.lr = 0.0;
  c.epochs = 1;
  const auto r = train(m, corpus, {}, c);
  EXPECT_EQ(r.epoch_nll.size(), 1u);
  EXPECT_EQ(r.epoch_seconds.size(), 1u);
  EXPECT_EQ(snapshot(m), before);
}

TEST(Training, MeanNllDecreasesOverFirstEpochs) {
  const auto corpus = testing::synthetic_corpus(7, 50);
  auto m = fresh(corpus, 16);
  TrainConfig c;
  c.epochs = 5;
  const auto r = train(m, corpus, {}, c);
  ASSERT_EQ(r.epoch_nll.size(), 5u);
  for (std::size_t e = 1; e < 5; ++e) EXPECT_LT(r.epoch_nll[e], r.epoch_nll[e - 1]) << e;
}

TEST(Training, SameSeedSameReportAndParameters) {
  const auto corpus = testing::synthetic_corpus(3, 12);
  auto a = fresh(corpus);
  auto b = fresh(corpus);
  TrainConfig c;
  c.epochs = 3;
  const auto ra = train(a, corpus, corpus, c);
  const auto rb = train(b, corpus, corpus, c);
  EXPECT_EQ(ra.epoch_nll, rb.epoch_nll);
  EXPECT_EQ(ra.dev_f1, rb.dev_f1);
  EXPECT_EQ(ra.best_epoch, rb.best_epoch);
  EXPECT_EQ(snapshot(a), snapshot(b));
}

TEST(Training, IdenticalTrajectoriesOverFiveSteps) {
  const auto corpus = testing::synthetic_corpus(4, 5);
  auto a = fresh(corpus);
  auto b = fresh(corpus);
  Rng ra(9), rb(9);
  auto pa = a.parameters();
  auto pb = b.parameters();
  for (std::size_t step = 0; step < 5; ++step) {
    Graph ga, gb;
    ga.backward(sentence_loss(ga, a, corpus[step], true, &ra));
    gb.backward(sentence_loss(gb, b, corpus[step], true, &rb));
    sgd_step(pa, 0.01, 5.0);
    sgd_step(pb, 0.01, 5.0);
    ASSERT_EQ(snapshot(a), snapshot(b)) << step;
  }
}

TEST(Training, NllNonNegativeAndLocalDescent) {
  const auto corpus = testing::synthetic_corpus(5, 40);
  auto m = fresh(corpus);
  std::size_t descended = 0;
  for (const auto& s : corpus) {
    auto copy = m;
    const double before = sentence_nll(copy, s);
    ASSERT_GE(before, 0.0);
    Graph g;
    auto cp = copy.parameters();
    g.backward(sentence_loss(g, copy, s, false, nullptr));
    sgd_step(cp, 1e-4, std::numeric_limits<double>::infinity());
    const double after = sentence_nll(copy, s);
    ASSERT_GE(after, 0.0);
    if (after <= before) ++descended;
  }
  EXPECT_GE(static_cast<double>(descended), 0.95 * static_cast<double>(corpus.size()));
}

TEST(Training, LogLinesAndDevSelection) {
  const auto corpus = testing::synthetic_corpus(6, 10);
  auto m = fresh(corpus);
  std::ostringstream log;
  TrainConfig c;
  c.epochs = 2;
  c.log = &log;
  const auto r = train(m, corpus, corpus, c);
  EXPECT_EQ(r.dev_f1.size(), 2u);
  std::istringstream lines(log.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line.rfind("epoch=1 nll=", 0), 0u) << line;
  EXPECT_NE(line.find(" devF1="), std::string::npos);
  std::ostringstream nodev;
  c.log = &nodev;
  auto m2 = fresh(corpus);
  train(m2, corpus, {}, c);
  EXPECT_NE(nodev.str().find("devF1=NA"), std::string::npos);
}

TEST(Training, PatienceStopsEarly) {
  const auto corpus = testing::synthetic_corpus(8, 6);
  auto m = fresh(corpus);
  TrainConfig c;
  c.lr = 0.0;  // dev F1 cannot improve after the first epoch
  c.epochs = 20;
  c.patience = 2;
  const auto r = train(m, corpus, corpus, c);
  EXPECT_TRUE(r.stopped_early);
  EXPECT_EQ(r.epoch_nll.size(), 3u);
}

TEST(Training, NonFiniteLossAborts) {
  const auto corpus = testing::synthetic_corpus(9, 3);
  auto m = fresh(corpus);
  m.output_b.values()[0] = std::numeric_limits<double>::quiet_NaN();
  try {
    train(m, corpus, {}, TrainConfig{});
    FAIL();
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 0"), std::string::npos) << e.what();
  }
}

TEST(Training, ResumeFromCheckpointIsBitIdentical) {
  const auto corpus = testing::synthetic_corpus(10, 10);
  const fs::path dir = fs::temp_directory_path() / "mner_resume_test";
  fs::remove_all(dir);

  auto straight = fresh(corpus);
  TrainConfig c;
  c.epochs = 4;
  train(straight, corpus, corpus, c);

  auto first = fresh(corpus);
  TrainConfig half = c;
  half.epochs = 2;
  half.checkpoint_dir = dir.string();
  train(first, corpus, corpus, half);
  ASSERT_TRUE(fs::exists(dir / "checkpoint.mner"));
  ASSERT_TRUE(fs::exists(dir / "best.mner"));

  auto resumed = fresh(testing::synthetic_corpus(99, 2));  // replaced by the checkpoint
  TrainConfig rest = c;
  rest.resume_from = (dir / "checkpoint.mner").string();
  const auto r = train(resumed, corpus, corpus, rest);
  EXPECT_EQ(r.epoch_nll.size(), 4u);
  EXPECT_EQ(snapshot(resumed), snapshot(straight));

  const auto plain = load_model((dir / "checkpoint.mner").string());
  EXPECT_EQ(plain.vocabs.words, straight.vocabs.words);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace mner
