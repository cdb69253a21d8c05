#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mner::utf8 {

// Splits into one string per Unicode scalar value. Throws FormatError on
// invalid UTF-8.
std::vector<std::string> split_scalars(std::string_view s);

bool is_valid(std::string_view s);

// Simple case folding for ASCII, Latin-1 and Latin Extended-A, which covers
// Turkish and Czech letters. Dotted capital I (U+0130) folds to "i".
std::string to_lower(std::string_view s);

}  // namespace mner::utf8
