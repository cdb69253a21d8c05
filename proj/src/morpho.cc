#include "mner/morpho.h"

#include <algorithm>
#include <cctype>

#include "mner/errors.h"
#include "mner/utf8.h"

namespace mner::morpho {
namespace {

[[noreturn]] void fail(std::string_view raw, const std::string& why) {
  throw FormatError("malformed analysis '" + std::string(raw) + "': " + why);
}

// Splits "+A+B" into {A, B}; "" yields {}.
std::vector<std::string> split_tags(std::string_view group, std::string_view raw) {
  std::vector<std::string> tags;
  if (group.empty()) return tags;
  if (group.front() != '+') fail(raw, "tag group must start with '+'");
  std::size_t pos = 1;
  while (true) {
    const std::size_t next = group.find('+', pos);
    const std::string_view tag = group.substr(pos, next == std::string_view::npos
                                                       ? std::string_view::npos
                                                       : next - pos);
    if (tag.empty()) fail(raw, "empty tag");
    tags.emplace_back(tag);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return tags;
}

}  // namespace

std::string MorphAnalysis::serialize() const {
  std::string out = root;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (g > 0) out += kDerivationBoundary;
    for (const auto& t : groups[g]) {
      out += '+';
      out += t;
    }
  }
  return out;
}

MorphAnalysis parse_analysis(std::string_view raw) {
  if (raw.empty()) throw FormatError("malformed analysis: empty string");
  if (std::any_of(raw.begin(), raw.end(),
                  [](char c) { return std::isspace(static_cast<unsigned char>(c)); })) {
    fail(raw, "contains whitespace");
  }
  if (!utf8::is_valid(raw)) fail(raw, "invalid UTF-8");

  MorphAnalysis a;
  a.raw = std::string(raw);
  const std::size_t plus = raw.find('+');
  const std::string_view root = raw.substr(0, plus);
  if (root.empty()) fail(raw, "empty root");
  if (root.find(kDerivationBoundary) != std::string_view::npos) {
    fail(raw, "derivation boundary before the first tag");
  }
  a.root = std::string(root);

  std::string_view rest = plus == std::string_view::npos ? std::string_view{} : raw.substr(plus);
  while (true) {
    const std::size_t db = rest.find(kDerivationBoundary);
    const std::string_view group = rest.substr(0, db);
    a.groups.push_back(split_tags(group, raw));
    if (db == std::string_view::npos) break;
    rest = rest.substr(db + kDerivationBoundary.size());
    if (rest.empty() || rest.front() != '+') fail(raw, "no tags after derivation boundary");
  }
  return a;
}

std::vector<std::string> project(const MorphAnalysis& a, Scheme s) {
  std::vector<std::string> out;
  switch (s) {
    case Scheme::kWR:
    case Scheme::kWOR:
      if (s == Scheme::kWR) out.push_back(a.root);
      for (std::size_t g = 0; g < a.groups.size(); ++g) {
        if (g > 0) out.emplace_back(kDerivationBoundary);
        out.insert(out.end(), a.groups[g].begin(), a.groups[g].end());
      }
      break;
    case Scheme::kWRADB:
      out.push_back(a.root);
      for (std::size_t g = 1; g < a.groups.size(); ++g) {
        out.emplace_back(kDerivationBoundary);
        out.insert(out.end(), a.groups[g].begin(), a.groups[g].end());
      }
      break;
    case Scheme::kChar:
      out = utf8::split_scalars(a.raw);
      break;
  }
  return out;
}

std::optional<Scheme> parse_scheme(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "wr") return Scheme::kWR;
  if (lower == "wor") return Scheme::kWOR;
  if (lower == "wr_adb") return Scheme::kWRADB;
  if (lower == "char") return Scheme::kChar;
  return std::nullopt;
}

std::string_view scheme_name(Scheme s) {
  switch (s) {
    case Scheme::kWR: return "wr";
    case Scheme::kWOR: return "wor";
    case Scheme::kWRADB: return "wr_adb";
    case Scheme::kChar: return "char";
  }
  return "?";
}

}  // namespace mner::morpho
