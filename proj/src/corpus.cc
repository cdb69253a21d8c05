#include "mner/corpus.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mner/errors.h"
#include "mner/utf8.h"

namespace mner {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::string where(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line) + ": ";
}

std::string entity_type(std::string_view label) {
  return label.size() > 2 ? std::string(label.substr(2)) : std::string();
}

}  // namespace

std::vector<std::string> Sentence::labels() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.label);
  return out;
}

bool is_valid_label(std::string_view label) {
  if (label == "O") return true;
  return label.size() > 2 && (label[0] == 'B' || label[0] == 'I') && label[1] == '-';
}

std::size_t normalize_iob2(std::vector<std::string>& labels) {
  std::size_t changed = 0;
  std::string prev = "O";
  for (auto& l : labels) {
    if (l.size() > 2 && l[0] == 'I') {
      const bool continues = prev != "O" && entity_type(prev) == entity_type(l);
      if (!continues) {
        l[0] = 'B';
        ++changed;
      }
    }
    prev = l;
  }
  return changed;
}

std::vector<Sentence> read_corpus(std::istream& in, const LoadOptions& opts,
                                  CorpusStats* stats, std::string_view source) {
  std::vector<Sentence> out;
  Sentence cur;
  std::vector<std::size_t> cur_lines;
  CorpusStats local;

  auto flush = [&]() {
    if (cur.tokens.empty()) return;
    std::vector<std::string> labels = cur.labels();
    const bool labelled = std::all_of(labels.begin(), labels.end(),
                                      [](const std::string& l) { return !l.empty(); });
    if (labelled) {
      const std::vector<std::string> before = labels;
      const std::size_t fixes = normalize_iob2(labels);
      if (fixes > 0 && opts.strict_iob) {
        for (std::size_t i = 0; i < labels.size(); ++i) {
          if (labels[i] != before[i]) {
            throw FormatError(where(source, cur_lines[i]) + "label '" + before[i] +
                              "' does not continue an entity (strict IOB2)");
          }
        }
      }
      for (std::size_t i = 0; i < labels.size(); ++i) cur.tokens[i].label = labels[i];
      local.iob_repairs += fixes;
    }
    local.tokens += cur.tokens.size();
    out.push_back(std::move(cur));
    cur = Sentence{};
    cur_lines.clear();
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto cols = split_ws(line);
    if (cols.empty()) {
      flush();
      continue;
    }
    const std::size_t min_cols = opts.labels_optional ? 2 : 3;
    const std::size_t max_cols = opts.accept_predictions ? 4 : 3;
    if (cols.size() < min_cols || cols.size() > max_cols) {
      throw FormatError(where(source, line_no) + "expected " +
                        (min_cols == max_cols ? std::to_string(min_cols)
                                              : std::to_string(min_cols) + "-" +
                                                    std::to_string(max_cols)) +
                        " columns, found " + std::to_string(cols.size()));
    }
    Token tok;
    tok.surface = std::string(cols[0]);
    if (!utf8::is_valid(tok.surface)) {
      throw FormatError(where(source, line_no) + "surface form is not valid UTF-8");
    }
    try {
      tok.analysis = morpho::parse_analysis(cols[1]);
    } catch (const FormatError& e) {
      throw FormatError(where(source, line_no) + e.what());
    }
    if (cols.size() >= 3) {
      tok.label = std::string(cols[2]);
      if (!is_valid_label(tok.label)) {
        throw FormatError(where(source, line_no) + "invalid IOB label '" + tok.label + "'");
      }
    }
    if (cols.size() == 4) {
      tok.predicted = std::string(cols[3]);
      if (!is_valid_label(tok.predicted)) {
        throw FormatError(where(source, line_no) + "invalid predicted label '" +
                          tok.predicted + "'");
      }
    }
    cur.tokens.push_back(std::move(tok));
    cur_lines.push_back(line_no);
  }
  flush();
  local.sentences = out.size();
  if (stats) *stats = local;
  return out;
}

std::vector<Sentence> load_corpus(const std::string& path, const LoadOptions& opts,
                                  CorpusStats* stats) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open corpus file '" + path + "'");
  return read_corpus(in, opts, stats, path);
}

void write_corpus(std::ostream& out, std::span<const Sentence> sentences,
                  const std::vector<std::vector<std::string>>* predictions) {
  if (predictions && predictions->size() != sentences.size()) {
    throw ShapeError("write_corpus: predictions do not match sentence count");
  }
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    const auto& toks = sentences[s].tokens;
    if (predictions && (*predictions)[s].size() != toks.size()) {
      throw ShapeError("write_corpus: prediction length mismatch in sentence " +
                       std::to_string(s));
    }
    for (std::size_t i = 0; i < toks.size(); ++i) {
      out << toks[i].surface << ' ' << toks[i].analysis.raw;
      if (!toks[i].label.empty()) out << ' ' << toks[i].label;
      if (predictions) {
        out << ' ' << (*predictions)[s][i];
      } else if (!toks[i].predicted.empty()) {
        out << ' ' << toks[i].predicted;
      }
      out << '\n';
    }
    out << '\n';
  }
}

Vocab Vocab::with_specials(bool empty_symbol) {
  Vocab v;
  v.add(kUnk);
  v.add(kPad);
  if (empty_symbol) v.add(kEmpty);
  return v;
}

Vocab Vocab::plain() { return Vocab{}; }

Vocab Vocab::from_symbols(const std::vector<std::string>& symbols) {
  Vocab v;
  for (const auto& s : symbols) {
    if (v.find(s)) throw LoadError("duplicate vocabulary symbol '" + s + "'");
    v.add(s);
  }
  return v;
}

int Vocab::add(std::string_view symbol) {
  if (auto id = find(symbol)) return *id;
  const int id = static_cast<int>(symbols_.size());
  symbols_.emplace_back(symbol);
  index_.emplace(symbols_.back(), id);
  return id;
}

std::optional<int> Vocab::find(std::string_view symbol) const {
  const auto it = index_.find(std::string(symbol));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int Vocab::id_or_unk(std::string_view symbol) const {
  if (auto id = find(symbol)) return *id;
  if (auto unk = unk_id()) return *unk;
  throw ContractViolation("symbol '" + std::string(symbol) + "' not in a vocabulary without UNK");
}

Vocabs build_vocabs(std::span<const Sentence> sentences,
                    std::optional<morpho::Scheme> scheme) {
  Vocabs v{Vocab::with_specials(), Vocab::with_specials(), Vocab::with_specials(true),
           Vocab::plain()};
  for (const auto& s : sentences) {
    for (const auto& t : s.tokens) {
      v.words.add(t.surface);
      for (const auto& c : utf8::split_scalars(t.surface)) v.chars.add(c);
      if (scheme) {
        for (const auto& m : morpho::project(t.analysis, *scheme)) v.morph.add(m);
      }
      if (!t.label.empty()) v.labels.add(t.label);
    }
  }
  return v;
}

const std::vector<double>* EmbeddingTable::find(std::string_view word) const {
  const auto it = vectors_.find(std::string(word));
  return it == vectors_.end() ? nullptr : &it->second;
}

void EmbeddingTable::set(const std::string& word, std::vector<double> vec) {
  auto [it, inserted] = vectors_.insert_or_assign(word, std::move(vec));
  if (inserted) {
    words_.push_back(word);
  } else {
    ++duplicates;
  }
}

EmbeddingTable read_embeddings(std::istream& in, std::size_t expected_dim,
                               std::string_view source) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(where(source, 1) + "missing header line");
  const auto header = split_ws(line);
  std::size_t count = 0, dim = 0;
  auto parse_size = [&](std::string_view s, std::size_t& out) {
    const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
    return r.ec == std::errc() && r.ptr == s.data() + s.size();
  };
  if (header.size() != 2 || !parse_size(header[0], count) || !parse_size(header[1], dim)) {
    throw FormatError(where(source, 1) + "header must be '<count> <dim>'");
  }
  if (dim != expected_dim) {
    throw FormatError(where(source, 1) + "embedding dimension " + std::to_string(dim) +
                      " does not match expected " + std::to_string(expected_dim));
  }
  EmbeddingTable table;
  table.dim = dim;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto cols = split_ws(line);
    if (cols.empty()) continue;
    if (cols.size() != dim + 1) {
      throw FormatError(where(source, line_no) + "word '" + std::string(cols[0]) + "' has " +
                        std::to_string(cols.size() - 1) + " values, expected " +
                        std::to_string(dim));
    }
    std::vector<double> vec(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      const auto s = cols[i + 1];
      const auto r = std::from_chars(s.data(), s.data() + s.size(), vec[i]);
      if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
        throw FormatError(where(source, line_no) + "word '" + std::string(cols[0]) +
                          "': bad number '" + std::string(s) + "'");
      }
    }
    table.set(std::string(cols[0]), std::move(vec));
  }
  return table;
}

EmbeddingTable load_embeddings(const std::string& path, std::size_t expected_dim) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open embedding file '" + path + "'");
  return read_embeddings(in, expected_dim, path);
}

}  // namespace mner
