#pragma once
// Three-column NER corpus (surface, morphological analysis, IOB label),
// vocabularies, and text-format pretrained word vectors.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mner/morpho.h"

namespace mner {

struct Token {
  std::string surface;
  morpho::MorphAnalysis analysis;
  std::string label;      // empty when the input had no label column
  std::string predicted;  // fourth column written by `tag`, if present
};

struct Sentence {
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
  std::vector<std::string> labels() const;
};

struct LoadOptions {
  // Accept 2-column lines (surface, analysis).
  bool labels_optional = false;
  // Accept a 4th column holding a predicted label.
  bool accept_predictions = false;
  // Reject IOB1-style "I-X" starts instead of rewriting them to "B-X".
  bool strict_iob = false;
};

struct CorpusStats {
  std::size_t sentences = 0;
  std::size_t tokens = 0;
  std::size_t iob_repairs = 0;
};

// Throws FormatError("<source>:<line>: ...") on malformed lines.
std::vector<Sentence> read_corpus(std::istream& in, const LoadOptions& opts = {},
                                  CorpusStats* stats = nullptr,
                                  std::string_view source = "<stream>");
std::vector<Sentence> load_corpus(const std::string& path, const LoadOptions& opts = {},
                                  CorpusStats* stats = nullptr);

// One token per line, columns separated by a single space, a blank line
// after every sentence. `predictions`, when given, is appended as a last
// column and must be shaped like `sentences`.
void write_corpus(std::ostream& out, std::span<const Sentence> sentences,
                  const std::vector<std::vector<std::string>>* predictions = nullptr);

// "O", "B-<TYPE>" or "I-<TYPE>" with a non-empty type.
bool is_valid_label(std::string_view label);

// Rewrites an "I-X" that does not continue an X entity into "B-X".
// Returns the number of labels changed.
std::size_t normalize_iob2(std::vector<std::string>& labels);

// Bidirectional symbol <-> id map with first-insertion ids.
class Vocab {
 public:
  static constexpr std::string_view kUnk = "<UNK>";
  static constexpr std::string_view kPad = "<PAD>";
  static constexpr std::string_view kEmpty = "<EMPTY>";

  // Ids: UNK = 0, PAD = 1, then EMPTY = 2 when requested.
  static Vocab with_specials(bool empty_symbol = false);
  // No reserved symbols (label vocabularies).
  static Vocab plain();
  // Rebuilds a vocabulary from its ordered symbol list (model loading).
  static Vocab from_symbols(const std::vector<std::string>& symbols);

  int add(std::string_view symbol);
  std::optional<int> find(std::string_view symbol) const;
  // UNK id when absent; throws ContractViolation if there is no UNK.
  int id_or_unk(std::string_view symbol) const;
  const std::string& symbol(int id) const { return symbols_.at(static_cast<std::size_t>(id)); }

  std::size_t size() const { return symbols_.size(); }
  const std::vector<std::string>& symbols() const { return symbols_; }

  std::optional<int> unk_id() const { return find(kUnk); }
  std::optional<int> pad_id() const { return find(kPad); }
  std::optional<int> empty_id() const { return find(kEmpty); }

  bool operator==(const Vocab& o) const { return symbols_ == o.symbols_; }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
};

struct Vocabs {
  Vocab words;
  Vocab chars;
  Vocab morph;
  Vocab labels;
};

// Words and characters come from surface forms, morphological symbols from
// the analysis projected under `scheme` (specials only when absent).
Vocabs build_vocabs(std::span<const Sentence> sentences,
                    std::optional<morpho::Scheme> scheme);

class EmbeddingTable {
 public:
  std::size_t dim = 0;
  std::size_t duplicates = 0;  // rows that replaced an earlier row for the same word

  const std::vector<double>* find(std::string_view word) const;
  void set(const std::string& word, std::vector<double> vec);
  // Words in first-appearance order.
  const std::vector<std::string>& words() const { return words_; }
  std::size_t size() const { return words_.size(); }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

// Header "<count> <dim>", then "<word> <v1> ... <v_dim>" per line.
EmbeddingTable read_embeddings(std::istream& in, std::size_t expected_dim,
                               std::string_view source = "<stream>");
EmbeddingTable load_embeddings(const std::string& path, std::size_t expected_dim);

}  // namespace mner
