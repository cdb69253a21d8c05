#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mner/corpus.h"
#include "mner/tagger.h"

namespace mner {

struct GradCheckGroup {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckGroup> groups;  // one per parameter tensor
  double tolerance = 0.0;
  bool passed = false;
};

// |a - n| / max(|a|, |n|, 1e-8).
double relative_error(double analytic, double numeric);

// Compares backpropagated gradients of the summed sentence NLL (no dropout)
// against central differences for every finite parameter entry.
GradCheckReport gradient_check(TaggerModel& model, std::span<const Sentence> sentences,
                               double epsilon = 1e-5, double tolerance = 1e-4);

// Two sentences of at most four tokens, three labels, and a model with
// d_w = d_c = d_m = 2, p = 3, character and WR morphological embeddings,
// all parameters drawn from `seed`.
struct GradCheckFixture {
  std::vector<Sentence> sentences;
  TaggerModel model;
};
GradCheckFixture make_gradcheck_fixture(std::uint64_t seed);

}  // namespace mner
