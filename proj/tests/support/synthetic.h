#pragma once
// Small Turkish-flavoured NER corpus generated from fixed rules.
//
// Forty word types: 24 outside words, 5 person names, 5 locative place
// forms, 4 organization acronyms and 2 organization suffixes. Labels are a
// function of the word alone. Place forms and some verbs carry a derivation
// boundary in their analysis.

#include <cstdint>
#include <vector>

#include "mner/corpus.h"

namespace mner::testing {

std::vector<Sentence> synthetic_corpus(std::uint64_t seed, std::size_t sentences);

// Same sentence rules, but every entity word is a freshly invented name
// that does not occur in synthetic_corpus(); the analyses follow the same
// per-type templates.
std::vector<Sentence> synthetic_novel_entities(std::uint64_t seed, std::size_t sentences);

std::size_t distinct_words(const std::vector<Sentence>& corpus);
// Share of tokens whose analysis has at least one derivation boundary.
double boundary_token_share(const std::vector<Sentence>& corpus);
std::size_t distinct_entity_types(const std::vector<Sentence>& corpus);

}  // namespace mner::testing
