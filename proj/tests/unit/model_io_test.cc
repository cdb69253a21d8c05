#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mner/errors.h"
#include "mner/tagger.h"
#include "synthetic.h"

namespace mner {
namespace {

namespace fs = std::filesystem;

TaggerModel make_model(std::optional<morpho::Scheme> scheme, bool ce) {
  const auto corpus = testing::synthetic_corpus(21, 8);
  TaggerConfig cfg;
  cfg.word_dim = 3;
  cfg.char_dim = 2;
  cfg.morph_dim = 4;
  cfg.hidden_dim = 5;
  cfg.use_char = ce;
  cfg.morph_scheme = scheme;
  cfg.constrained_decoding = true;
  cfg.seed = 17;
  Rng rng(17);
  return TaggerModel::create(cfg, build_vocabs(corpus, scheme), nullptr, rng);
}

std::string serialize(const TaggerModel& m) {
  std::ostringstream out;
  write_model(out, m);
  return out.str();
}

TEST(ModelIo, RoundTripPreservesEverything) {
  for (auto scheme : {std::optional<morpho::Scheme>{}, std::optional{morpho::Scheme::kWRADB},
                      std::optional{morpho::Scheme::kChar}}) {
    const auto m = make_model(scheme, scheme.has_value());
    std::istringstream in(serialize(m));
    const auto back = read_model(in);
    EXPECT_EQ(back.config.morph_scheme, m.config.morph_scheme);
    EXPECT_EQ(back.config.use_char, m.config.use_char);
    EXPECT_EQ(back.config.hidden_dim, 5u);
    EXPECT_TRUE(back.config.constrained_decoding);
    EXPECT_EQ(back.vocabs.words, m.vocabs.words);
    EXPECT_EQ(back.vocabs.morph, m.vocabs.morph);
    EXPECT_EQ(back.vocabs.labels, m.vocabs.labels);
    const auto a = m.parameters();
    const auto b = back.parameters();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i]->name(), b[i]->name());
      EXPECT_EQ(a[i]->shape(), b[i]->shape());
      const std::vector<double> va(a[i]->values().begin(), a[i]->values().end());
      const std::vector<double> vb(b[i]->values().begin(), b[i]->values().end());
      EXPECT_EQ(va, vb);
    }
    EXPECT_EQ(serialize(back), serialize(m));
  }
}

TEST(ModelIo, HeaderLayout) {
  const std::string bytes = serialize(make_model(morpho::Scheme::kWR, true));
  ASSERT_GE(bytes.size(), 8u);
  EXPECT_EQ(bytes.substr(0, 4), "MNER");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1);
  EXPECT_EQ(bytes[5], 0);
  EXPECT_EQ(bytes[6], 0);
  EXPECT_EQ(bytes[7], 0);
  EXPECT_NE(bytes.find("mt19937_64"), std::string::npos);
}

TEST(ModelIo, Rejections) {
  std::istringstream empty("");
  EXPECT_THROW(read_model(empty), LoadError);

  std::string bytes = serialize(make_model(morpho::Scheme::kWR, true));
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  std::istringstream in1(bad_magic);
  EXPECT_THROW(read_model(in1), LoadError);

  std::string v2 = bytes;
  v2[4] = 2;
  std::istringstream in2(v2);
  try {
    read_model(in2);
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos) << e.what();
  }

  for (std::size_t cut : {5u, 40u, static_cast<unsigned>(bytes.size() / 2),
                          static_cast<unsigned>(bytes.size() - 1)}) {
    std::istringstream in3(bytes.substr(0, cut));
    EXPECT_THROW(read_model(in3), LoadError) << cut;
  }
}

TEST(ModelIo, SaveLoadFilesAndTagging) {
  const fs::path dir = fs::temp_directory_path() / "mner_model_io_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto m = make_model(morpho::Scheme::kWOR, true);
  const auto path = (dir / "m.mner").string();
  save_model(m, path);
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  EXPECT_EQ(entries, 1u);  // no temporary left behind
  const auto back = load_model(path);
  for (const auto& s : testing::synthetic_novel_entities(3, 10)) EXPECT_EQ(tag(back, s), tag(m, s));

  std::ofstream(dir / "empty.mner").close();
  EXPECT_THROW(load_model((dir / "empty.mner").string()), LoadError);
  EXPECT_THROW(load_model((dir / "missing.mner").string()), LoadError);
  EXPECT_ANY_THROW(save_model(m, (dir / "no" / "such" / "dir.mner").string()));
  fs::remove_all(dir);
}

}  // namespace
}  // namespace mner
