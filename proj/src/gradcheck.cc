#include "mner/gradcheck.h"

#include <algorithm>
#include <cmath>

#include "mner/graph.h"

namespace mner {
namespace {

double total_nll(const TaggerModel& m, std::span<const Sentence> sentences) {
  double s = 0.0;
  for (const auto& sent : sentences) s += sentence_nll(m, sent);
  return s;
}

}  // namespace

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport gradient_check(TaggerModel& model, std::span<const Sentence> sentences,
                               double epsilon, double tolerance) {
  auto params = model.parameters();
  for (Tensor* t : params) t->zero_grad();
  {
    Graph g(GradMode::kRecord);
    std::vector<Var> losses;
    for (const auto& s : sentences) losses.push_back(sentence_loss(g, model, s, false, nullptr));
    Var total = losses.front();
    for (std::size_t i = 1; i < losses.size(); ++i) total = g.add(total, losses[i]);
    g.backward(total);
  }

  GradCheckReport report;
  report.tolerance = tolerance;
  report.passed = true;
  for (Tensor* t : params) {
    GradCheckGroup group{t->name(), 0, 0.0};
    const std::vector<double> analytic(t->grads().begin(), t->grads().end());
    auto values = t->values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i])) continue;
      const double orig = values[i];
      values[i] = orig + epsilon;
      const double up = total_nll(model, sentences);
      values[i] = orig - epsilon;
      const double down = total_nll(model, sentences);
      values[i] = orig;
      const double numeric = (up - down) / (2.0 * epsilon);
      group.max_rel_error = std::max(group.max_rel_error, relative_error(analytic[i], numeric));
      ++group.checked;
    }
    report.passed = report.passed && group.max_rel_error <= tolerance;
    report.groups.push_back(group);
    t->zero_grad();
  }
  return report;
}

GradCheckFixture make_gradcheck_fixture(std::uint64_t seed) {
  Rng rng(seed);
  static const char* kWords[] = {"Ali", "ev", "Ankara", "gitti", "su", "Ayşe"};
  static const char* kAnalyses[] = {
      "Ali+Noun+Prop+A3sg+Pnon+Nom", "ev+Noun+A3pl+P3sg+Loc",
      "Ankara+Noun+Prop+A3sg+Pnon+Loc^DB+Verb+Zero+Past+A3sg", "git+Verb+Pos+Past+A3sg",
      "su+Noun+A3sg+Pnon+Nom", "Ayşe+Noun+Prop+A3sg+Pnon+Gen"};
  static const char* kLabels[] = {"O", "B-PER", "I-PER"};

  GradCheckFixture fx;
  for (int s = 0; s < 2; ++s) {
    Sentence sent;
    const std::size_t n = 1 + rng.below(4);
    for (std::size_t i = 0; i < n; ++i) {
      const auto w = rng.below(6);
      Token t;
      t.surface = kWords[w];
      t.analysis = morpho::parse_analysis(kAnalyses[w]);
      t.label = "O";
      sent.tokens.push_back(std::move(t));
    }
    fx.sentences.push_back(std::move(sent));
  }
  // Ensure all three labels are present and the sequence is valid IOB2.
  auto& first = fx.sentences[0].tokens;
  first[0].label = kLabels[1];
  if (first.size() > 1) first[1].label = kLabels[2];
  if (first.size() == 1) {
    auto& second = fx.sentences[1].tokens;
    second[0].label = kLabels[1];
    if (second.size() > 1) {
      second[1].label = kLabels[2];
    } else {
      Token t = second[0];
      t.label = kLabels[2];
      second.push_back(std::move(t));
    }
  }

  TaggerConfig cfg;
  cfg.word_dim = 2;
  cfg.char_dim = 2;
  cfg.morph_dim = 2;
  cfg.hidden_dim = 3;
  cfg.use_char = true;
  cfg.morph_scheme = morpho::Scheme::kWR;
  cfg.dropout_rate = 0.0;
  cfg.seed = seed;
  Vocabs vocabs = build_vocabs(fx.sentences, cfg.morph_scheme);
  // Labels in a fixed order so K = 3 regardless of sampling.
  vocabs.labels = Vocab::from_symbols({kLabels[0], kLabels[1], kLabels[2]});
  fx.model = TaggerModel::create(cfg, std::move(vocabs), nullptr, rng);
  for (Tensor* t : fx.model.parameters()) {
    for (double& v : t->values()) {
      if (std::isfinite(v)) v = rng.uniform(-0.8, 0.8);
    }
  }
  return fx;
}

}  // namespace mner
