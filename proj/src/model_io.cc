// Model file layout, version 1. All integers are unsigned little-endian,
// reals are IEEE-754 binary64 little-endian, strings are a u64 byte length
// followed by UTF-8 bytes.
//
//   magic            4 bytes  "MNER"
//   version          u32      1
//   config
//     word_dim       u64
//     char_dim       u64
//     morph_dim      u64
//     hidden_dim     u64
//     use_char       u8       0/1
//     morph_scheme   u8       0 none, 1 wr, 2 wor, 3 wr_adb, 4 char
//     dropout_rate   f64
//     seed           u64
//     fine_tune      u8       0/1
//     constrained    u8       0/1
//   rng_algorithm    string   "mt19937_64"
//   vocabularies     4 x (u64 count, count x string): words, chars, morph, labels
//   tensor_count     u64
//   tensor_count x
//     name           string
//     rank           u64
//     dims           rank x u64
//     values         prod(dims) x f64, row-major
//
// Tensors appear in TaggerModel::parameters() order.

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>

#include "mner/errors.h"
#include "mner/tagger.h"

namespace mner {
namespace {

constexpr char kMagic[4] = {'M', 'N', 'E', 'R'};

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
}

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <typename T>
  void put(T v) {
    v = to_little(v);
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void u8(bool v) { put<std::uint8_t>(v ? 1 : 0); }
  void str(const std::string& s) {
    put<std::uint64_t>(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename T>
  T get() {
    T v;
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (in_.gcount() != sizeof(T)) throw LoadError("model file is truncated");
    return to_little(v);
  }
  bool flag() {
    const auto v = get<std::uint8_t>();
    if (v > 1) throw LoadError("corrupt boolean field in model file");
    return v == 1;
  }
  std::string str() {
    const auto n = get<std::uint64_t>();
    if (n > (1u << 30)) throw LoadError("implausible string length in model file");
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    if (static_cast<std::uint64_t>(in_.gcount()) != n) throw LoadError("model file is truncated");
    return s;
  }

 private:
  std::istream& in_;
};

std::uint8_t scheme_code(const std::optional<morpho::Scheme>& s) {
  if (!s) return 0;
  switch (*s) {
    case morpho::Scheme::kWR: return 1;
    case morpho::Scheme::kWOR: return 2;
    case morpho::Scheme::kWRADB: return 3;
    case morpho::Scheme::kChar: return 4;
  }
  return 0;
}

std::optional<morpho::Scheme> scheme_from_code(std::uint8_t c) {
  switch (c) {
    case 0: return std::nullopt;
    case 1: return morpho::Scheme::kWR;
    case 2: return morpho::Scheme::kWOR;
    case 3: return morpho::Scheme::kWRADB;
    case 4: return morpho::Scheme::kChar;
  }
  throw LoadError("unknown morphological scheme code " + std::to_string(c));
}

void write_vocab(Writer& w, const Vocab& v) {
  w.put<std::uint64_t>(v.size());
  for (const auto& s : v.symbols()) w.str(s);
}

Vocab read_vocab(Reader& r) {
  const auto n = r.get<std::uint64_t>();
  if (n > (1u << 28)) throw LoadError("implausible vocabulary size in model file");
  std::vector<std::string> symbols;
  symbols.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) symbols.push_back(r.str());
  return Vocab::from_symbols(symbols);
}

}  // namespace

void write_model(std::ostream& out, const TaggerModel& m) {
  Writer w(out);
  out.write(kMagic, 4);
  w.put<std::uint32_t>(kModelFormatVersion);
  const auto& c = m.config;
  w.put<std::uint64_t>(c.word_dim);
  w.put<std::uint64_t>(c.char_dim);
  w.put<std::uint64_t>(c.morph_dim);
  w.put<std::uint64_t>(c.hidden_dim);
  w.u8(c.use_char);
  w.put<std::uint8_t>(scheme_code(c.morph_scheme));
  w.put<double>(c.dropout_rate);
  w.put<std::uint64_t>(c.seed);
  w.u8(c.fine_tune_words);
  w.u8(c.constrained_decoding);
  w.str(std::string(Rng::kAlgorithm));
  write_vocab(w, m.vocabs.words);
  write_vocab(w, m.vocabs.chars);
  write_vocab(w, m.vocabs.morph);
  write_vocab(w, m.vocabs.labels);
  const auto params = m.parameters();
  w.put<std::uint64_t>(params.size());
  for (const Tensor* t : params) {
    w.str(t->name());
    w.put<std::uint64_t>(t->rank());
    for (std::size_t d : t->shape()) w.put<std::uint64_t>(d);
    for (double v : t->values()) w.put<double>(v);
  }
  if (!out) throw std::runtime_error("failed writing model");
}

TaggerModel read_model(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() == 0) throw LoadError("model file is empty");
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) {
    throw LoadError("not a model file (bad magic)");
  }
  Reader r(in);
  const auto version = r.get<std::uint32_t>();
  if (version != kModelFormatVersion) {
    throw LoadError("unsupported model format version " + std::to_string(version) +
                    " (this build reads version " + std::to_string(kModelFormatVersion) + ")");
  }
  TaggerConfig c;
  c.word_dim = r.get<std::uint64_t>();
  c.char_dim = r.get<std::uint64_t>();
  c.morph_dim = r.get<std::uint64_t>();
  c.hidden_dim = r.get<std::uint64_t>();
  c.use_char = r.flag();
  c.morph_scheme = scheme_from_code(r.get<std::uint8_t>());
  c.dropout_rate = r.get<double>();
  c.seed = r.get<std::uint64_t>();
  c.fine_tune_words = r.flag();
  c.constrained_decoding = r.flag();
  const std::string algo = r.str();
  if (algo != Rng::kAlgorithm) throw LoadError("model was trained with RNG '" + algo + "'");
  try {
    c.validate();
  } catch (const ContractViolation& e) {
    throw LoadError(std::string("invalid model configuration: ") + e.what());
  }

  Vocabs v;
  v.words = read_vocab(r);
  v.chars = read_vocab(r);
  v.morph = read_vocab(r);
  v.labels = read_vocab(r);
  if (v.labels.size() == 0) throw LoadError("model has an empty label vocabulary");

  // Allocate with the right shapes, then overwrite every value.
  Rng scratch(0);
  TaggerModel m = TaggerModel::create(c, std::move(v), nullptr, scratch);
  auto params = m.parameters();
  const auto count = r.get<std::uint64_t>();
  if (count != params.size()) {
    throw LoadError("model has " + std::to_string(count) + " tensors, expected " +
                    std::to_string(params.size()));
  }
  for (Tensor* t : params) {
    const std::string name = r.str();
    if (name != t->name()) throw LoadError("expected tensor '" + t->name() + "', found '" + name + "'");
    const auto rank = r.get<std::uint64_t>();
    if (rank != t->rank()) throw LoadError("tensor '" + name + "' has the wrong rank");
    for (std::size_t d : t->shape()) {
      if (r.get<std::uint64_t>() != d) throw LoadError("tensor '" + name + "' has the wrong shape");
    }
    for (double& x : t->values()) x = r.get<double>();
  }
  return m;
}

void save_model(const TaggerModel& m, const std::string& path) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    try {
      write_model(out, m);
      out.close();
      if (!out) throw std::runtime_error("failed writing '" + tmp.string() + "'");
    } catch (...) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw;
    }
  }
  fs::rename(tmp, target);
}

TaggerModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open model file '" + path + "'");
  return read_model(in);
}

}  // namespace mner
