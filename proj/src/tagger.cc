#include "mner/tagger.h"

#include <algorithm>
#include <cmath>
#include <thread>

#include "mner/errors.h"
#include "mner/optim.h"
#include "mner/utf8.h"

namespace mner {
namespace {

void fill_uniform(std::span<double> v, double limit, Rng& rng) {
  for (double& x : v) x = rng.uniform(-limit, limit);
}

}  // namespace

std::size_t TaggerConfig::token_dim() const {
  return word_dim + (use_char ? 2 * char_dim : 0) + (morph_scheme ? 2 * morph_dim : 0);
}

void TaggerConfig::validate() const {
  if (word_dim == 0) throw ContractViolation("word_dim must be positive");
  if (hidden_dim == 0) throw ContractViolation("hidden_dim must be positive");
  if (use_char && char_dim == 0) throw ContractViolation("char_dim must be positive");
  if (morph_scheme && morph_dim == 0) throw ContractViolation("morph_dim must be positive");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ContractViolation("dropout rate must be in [0, 1)");
  }
}

TaggerModel TaggerModel::create(const TaggerConfig& config, Vocabs vocabs,
                                const EmbeddingTable* pretrained, Rng& rng) {
  config.validate();
  if (vocabs.labels.size() == 0) throw ContractViolation("label vocabulary is empty");
  if (pretrained && pretrained->dim != config.word_dim) {
    throw ContractViolation("pretrained embedding dimension does not match word_dim");
  }
  if (pretrained) {
    for (const auto& w : pretrained->words()) vocabs.words.add(w);
  }

  TaggerModel m;
  m.config = config;
  m.vocabs = std::move(vocabs);
  const std::size_t dw = config.word_dim;
  const std::size_t k = m.vocabs.labels.size();

  m.word_embeddings = Tensor("word_embeddings", {m.vocabs.words.size(), dw},
                             config.fine_tune_words);
  m.word_embeddings.set_row_tracking(true);
  const double unk_limit = 0.5 / static_cast<double>(dw);
  const double word_limit = std::sqrt(3.0 / static_cast<double>(dw));
  for (std::size_t r = 0; r < m.vocabs.words.size(); ++r) {
    const std::string& w = m.vocabs.words.symbol(static_cast<int>(r));
    const std::vector<double>* vec = nullptr;
    if (pretrained) {
      vec = pretrained->find(w);
      if (!vec) vec = pretrained->find(utf8::to_lower(w));
    }
    auto row = m.word_embeddings.row(r);
    if (vec) {
      std::copy(vec->begin(), vec->end(), row.begin());
    } else {
      fill_uniform(row, w == Vocab::kUnk ? unk_limit : word_limit, rng);
    }
  }

  if (config.use_char) {
    m.char_embeddings = Tensor("char_embeddings", {m.vocabs.chars.size(), config.char_dim});
    m.char_embeddings.set_row_tracking(true);
    fill_uniform(m.char_embeddings.values(), std::sqrt(3.0 / config.char_dim), rng);
    m.char_lstm = BiLstmParams("char_lstm", config.char_dim, config.char_dim);
    m.char_lstm.init(rng);
  }
  if (config.morph_scheme) {
    m.morph_embeddings = Tensor("morph_embeddings", {m.vocabs.morph.size(), config.morph_dim});
    m.morph_embeddings.set_row_tracking(true);
    fill_uniform(m.morph_embeddings.values(), std::sqrt(3.0 / config.morph_dim), rng);
    m.morph_lstm = BiLstmParams("morph_lstm", config.morph_dim, config.morph_dim);
    m.morph_lstm.init(rng);
  }
  m.sentence_lstm = BiLstmParams("sentence_lstm", config.token_dim(), config.hidden_dim);
  m.sentence_lstm.init(rng);
  m.output_w = Tensor("output.W", {k, 2 * config.hidden_dim});
  glorot_uniform(m.output_w, rng);
  m.output_b = Tensor("output.b", {k});
  m.crf = crf::CrfParams(k);
  return m;
}

std::vector<Tensor*> TaggerModel::parameters() {
  std::vector<Tensor*> out{&word_embeddings};
  auto add_lstm = [&](BiLstmParams& p) {
    for (Tensor* t : p.fwd.tensors()) out.push_back(t);
    for (Tensor* t : p.bwd.tensors()) out.push_back(t);
  };
  if (config.use_char) {
    out.push_back(&char_embeddings);
    add_lstm(char_lstm);
  }
  if (config.morph_scheme) {
    out.push_back(&morph_embeddings);
    add_lstm(morph_lstm);
  }
  add_lstm(sentence_lstm);
  out.push_back(&output_w);
  out.push_back(&output_b);
  out.push_back(&crf.transitions());
  return out;
}

std::vector<const Tensor*> TaggerModel::parameters() const {
  const auto mut = const_cast<TaggerModel*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

int word_id(const TaggerModel& m, std::string_view surface) {
  if (auto id = m.vocabs.words.find(surface)) return *id;
  if (auto id = m.vocabs.words.find(utf8::to_lower(surface))) return *id;
  return m.vocabs.words.id_or_unk(surface);
}

std::vector<int> char_ids(const TaggerModel& m, const Token& t) {
  std::vector<int> ids;
  for (const auto& c : utf8::split_scalars(t.surface)) ids.push_back(m.vocabs.chars.id_or_unk(c));
  return ids;
}

std::vector<int> morph_ids(const TaggerModel& m, const Token& t) {
  std::vector<int> ids;
  if (!m.config.morph_scheme) return ids;
  for (const auto& s : morpho::project(t.analysis, *m.config.morph_scheme)) {
    ids.push_back(m.vocabs.morph.id_or_unk(s));
  }
  if (ids.empty()) ids.push_back(*m.vocabs.morph.empty_id());
  return ids;
}

Var embed_token(Graph& g, const TaggerModel& m, const Token& t, bool train_mode, Rng* rng) {
  std::vector<Var> parts;
  parts.push_back(g.lookup(m.word_embeddings, static_cast<std::size_t>(word_id(m, t.surface))));
  if (m.config.use_char) {
    const auto ids = char_ids(m, t);
    parts.push_back(sequence_embed(g, m.char_embeddings, m.char_lstm, ids));
  }
  if (m.config.morph_scheme) {
    const auto ids = morph_ids(m, t);
    parts.push_back(sequence_embed(g, m.morph_embeddings, m.morph_lstm, ids));
  }
  Var x = parts.size() == 1 ? parts[0] : g.concat(parts);
  if (train_mode && m.config.dropout_rate > 0.0) {
    if (!rng) throw ContractViolation("embed_token: training mode needs a generator");
    x = g.mul_const(x, dropout_mask(g.size(x), m.config.dropout_rate, *rng));
  }
  return x;
}

std::vector<double> embed_token(const TaggerModel& m, const Token& t, bool train_mode,
                                Rng* rng) {
  Graph g(GradMode::kInference);
  const Var x = embed_token(g, m, t, train_mode, rng);
  const auto v = g.value(x);
  return {v.begin(), v.end()};
}

Var forward(Graph& g, const TaggerModel& m, const Sentence& s, bool train_mode, Rng* rng) {
  if (s.tokens.empty()) throw ContractViolation("forward: empty sentence");
  std::vector<Var> xs;
  xs.reserve(s.size());
  for (const auto& t : s.tokens) xs.push_back(embed_token(g, m, t, train_mode, rng));
  const auto hs = bilstm_encode(g, m.sentence_lstm, xs);
  std::vector<Var> rows;
  rows.reserve(hs.size());
  for (Var h : hs) rows.push_back(g.affine(m.output_w, m.output_b, h));
  return g.stack(rows);
}

crf::Emissions forward(const TaggerModel& m, const Sentence& s, bool train_mode, Rng* rng) {
  Graph g(GradMode::kInference);
  const Var e = forward(g, m, s, train_mode, rng);
  crf::Emissions out(s.size(), m.num_tags());
  const auto v = g.value(e);
  std::copy(v.begin(), v.end(), out.data.begin());
  return out;
}

std::vector<int> label_ids(const TaggerModel& m, const Sentence& s) {
  std::vector<int> y;
  y.reserve(s.size());
  for (const auto& t : s.tokens) {
    const auto id = m.vocabs.labels.find(t.label);
    if (!id) throw ContractViolation("label '" + t.label + "' is not in the label vocabulary");
    y.push_back(*id);
  }
  return y;
}

Var sentence_loss(Graph& g, const TaggerModel& m, const Sentence& s, bool train_mode,
                  Rng* rng) {
  const auto gold = label_ids(m, s);
  const Var em = forward(g, m, s, train_mode, rng);
  return crf::nll_loss(g, em, m.crf, gold);
}

double sentence_nll(const TaggerModel& m, const Sentence& s) {
  return crf::nll(forward(m, s, false, nullptr), m.crf, label_ids(m, s));
}

std::vector<int> tag_ids(const TaggerModel& m, const Sentence& s) {
  const auto em = forward(m, s, false, nullptr);
  if (m.config.constrained_decoding) {
    const auto constrained = crf::with_iob_constraints(m.crf, m.vocabs.labels.symbols());
    return crf::viterbi(em, constrained).tags;
  }
  return crf::viterbi(em, m.crf).tags;
}

std::vector<std::string> tag(const TaggerModel& m, const Sentence& s) {
  std::vector<std::string> out;
  for (int id : tag_ids(m, s)) out.push_back(m.vocabs.labels.symbol(id));
  return out;
}

std::vector<std::vector<std::string>> tag_corpus(const TaggerModel& m,
                                                 std::span<const Sentence> sentences,
                                                 unsigned threads) {
  std::vector<std::vector<std::string>> out(sentences.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, sentences.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < sentences.size(); ++i) out[i] = tag(m, sentences[i]);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (std::size_t i = w; i < sentences.size(); i += threads) out[i] = tag(m, sentences[i]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace mner
