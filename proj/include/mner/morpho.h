#pragma once
// Morphological analysis strings of the form
//
//   root+Tag+Tag...^DB+Tag+Tag...
//
// and their projection to symbol sequences for the morphological encoder.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mner::morpho {

inline constexpr std::string_view kDerivationBoundary = "^DB";

struct MorphAnalysis {
  std::string root;
  // One group per derivation; never empty. The first group may hold zero tags.
  std::vector<std::vector<std::string>> groups;
  std::string raw;

  // root + groups joined with "+" and "^DB"; equals raw for parsed values.
  std::string serialize() const;
  std::size_t num_boundaries() const { return groups.size() - 1; }
};

enum class Scheme { kWR, kWOR, kWRADB, kChar };

// Throws FormatError on empty input, whitespace, an empty root, an empty tag
// ("++", trailing "+"), a tagless group after "^DB", or invalid UTF-8.
MorphAnalysis parse_analysis(std::string_view raw);

std::vector<std::string> project(const MorphAnalysis& a, Scheme s);

// "wr", "wor", "wr_adb", "char" in any letter case.
std::optional<Scheme> parse_scheme(std::string_view name);
std::string_view scheme_name(Scheme s);  // lower case

}  // namespace mner::morpho
