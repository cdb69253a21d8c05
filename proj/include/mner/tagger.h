#pragma once
// End-to-end sequence tagger:
//
//   token -> [word vector ; char Bi-LSTM summary ; morph Bi-LSTM summary]
//         -> sentence Bi-LSTM -> linear layer (K scores per position) -> CRF.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mner/corpus.h"
#include "mner/crf.h"
#include "mner/graph.h"
#include "mner/lstm.h"
#include "mner/morpho.h"
#include "mner/rng.h"

namespace mner {

struct TaggerConfig {
  std::size_t word_dim = 100;    // d_w
  std::size_t char_dim = 100;    // d_c, per direction
  std::size_t morph_dim = 100;   // d_m, per direction
  std::size_t hidden_dim = 100;  // p, per direction of the sentence encoder
  bool use_char = true;
  std::optional<morpho::Scheme> morph_scheme;  // nullopt: no morphological embedding
  double dropout_rate = 0.5;
  std::uint64_t seed = 1;
  bool fine_tune_words = true;
  // Forbid invalid IOB2 transitions when decoding.
  bool constrained_decoding = false;

  // d = d_w + 2 d_c (if chars) + 2 d_m (if morphology).
  std::size_t token_dim() const;
  void validate() const;  // throws ContractViolation
};

struct TaggerModel {
  TaggerConfig config;
  Vocabs vocabs;

  Tensor word_embeddings;   // |words| x d_w
  Tensor char_embeddings;   // |chars| x d_c, empty unless use_char
  BiLstmParams char_lstm;
  Tensor morph_embeddings;  // |morph| x d_m, empty unless morph_scheme
  BiLstmParams morph_lstm;
  BiLstmParams sentence_lstm;
  Tensor output_w;          // K x 2p
  Tensor output_b;          // K
  crf::CrfParams crf;

  // Allocates and initializes every parameter. When `pretrained` is given
  // its words are appended to the word vocabulary and their rows copied
  // (exact match first, then lower-cased); corpus words without a vector
  // and UNK are drawn uniformly.
  static TaggerModel create(const TaggerConfig& config, Vocabs vocabs,
                            const EmbeddingTable* pretrained, Rng& rng);

  std::size_t num_tags() const { return vocabs.labels.size(); }

  // Stable order; used for optimization, serialization and grad checks.
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
};

// Exact match, then lower-cased match, then UNK.
int word_id(const TaggerModel& m, std::string_view surface);
std::vector<int> char_ids(const TaggerModel& m, const Token& t);
// Never empty: an empty projection becomes the EMPTY symbol.
std::vector<int> morph_ids(const TaggerModel& m, const Token& t);

// Token representation x_i. Dropout with config.dropout_rate is applied to
// the whole vector when train_mode; rng may be null otherwise.
Var embed_token(Graph& g, const TaggerModel& m, const Token& t, bool train_mode, Rng* rng);
std::vector<double> embed_token(const TaggerModel& m, const Token& t, bool train_mode,
                                Rng* rng);

// Emission scores, an (n x K) node.
Var forward(Graph& g, const TaggerModel& m, const Sentence& s, bool train_mode, Rng* rng);
crf::Emissions forward(const TaggerModel& m, const Sentence& s, bool train_mode, Rng* rng);

// Gold label ids; throws ContractViolation for unknown or missing labels.
std::vector<int> label_ids(const TaggerModel& m, const Sentence& s);

// CRF negative log-likelihood of the sentence's gold labels.
Var sentence_loss(Graph& g, const TaggerModel& m, const Sentence& s, bool train_mode,
                  Rng* rng);
double sentence_nll(const TaggerModel& m, const Sentence& s);

std::vector<int> tag_ids(const TaggerModel& m, const Sentence& s);
std::vector<std::string> tag(const TaggerModel& m, const Sentence& s);

// Tags every sentence; read-only on the model, fans out over `threads`
// workers (0 = hardware concurrency). Output order follows the input.
std::vector<std::vector<std::string>> tag_corpus(const TaggerModel& m,
                                                 std::span<const Sentence> sentences,
                                                 unsigned threads = 0);

// Binary model file, see model_io.cc for the layout.
inline constexpr std::uint32_t kModelFormatVersion = 1;
void write_model(std::ostream& out, const TaggerModel& m);
TaggerModel read_model(std::istream& in);
// Writes to a temporary file in the same directory, then renames.
void save_model(const TaggerModel& m, const std::string& path);
TaggerModel load_model(const std::string& path);

}  // namespace mner
