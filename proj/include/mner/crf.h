#pragma once
// Linear-chain CRF over per-position tag scores.
//
// Transition matrix layout: (K+2) x (K+2), rows are "from", columns are "to".
// Ids 0..K-1 are real tags, K is the virtual START tag and K+1 is STOP.
// Entries into START and out of STOP are fixed at -inf. A path y_1..y_n is
// scored as
//
//   A[START, y_1] + sum_i A[y_i, y_{i+1}] + A[y_n, STOP] + sum_i em[i, y_i].

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mner/tensor.h"

namespace mner::crf {

using Emissions = Matrix;

class CrfParams {
 public:
  CrfParams() = default;
  explicit CrfParams(std::size_t num_tags);

  std::size_t num_tags() const { return num_tags_; }
  std::size_t start() const { return num_tags_; }
  std::size_t stop() const { return num_tags_ + 1; }

  Tensor& transitions() { return transitions_; }
  const Tensor& transitions() const { return transitions_; }

  double operator()(std::size_t from, std::size_t to) const {
    return transitions_.at(from, to);
  }
  double& at(std::size_t from, std::size_t to) { return transitions_.at(from, to); }

  bool is_fixed(std::size_t from, std::size_t to) const {
    return to == start() || from == stop();
  }
  // Re-asserts -inf on the fixed entries.
  void reset_fixed();

 private:
  std::size_t num_tags_ = 0;
  Tensor transitions_;
};

double sentence_score(const Emissions& em, const CrfParams& p,
                      std::span<const int> tags);

// log of the sum over all K^n paths of exp(score), by the forward algorithm.
double log_partition(const Emissions& em, const CrfParams& p);

struct Posteriors {
  double log_z = 0.0;
  Matrix unary;        // n x K, P(y_i = k)
  Matrix transitions;  // (K+2) x (K+2), expected transition counts
};

// Forward-backward in log space.
Posteriors posteriors(const Emissions& em, const CrfParams& p);

// log_partition - sentence_score(gold); always >= 0 up to rounding.
double nll(const Emissions& em, const CrfParams& p, std::span<const int> gold);

struct Decoded {
  std::vector<int> tags;
  double score = 0.0;
};

// Highest-scoring path; ties go to the lowest tag id.
Decoded viterbi(const Emissions& em, const CrfParams& p);

// Copy of p where transitions that produce an invalid IOB2 sequence
// (START -> I-X, or Y -> I-X where Y is neither B-X nor I-X) are -inf.
CrfParams with_iob_constraints(const CrfParams& p,
                               std::span<const std::string> labels);

}  // namespace mner::crf

namespace mner {
class Graph;
struct Var;
}  // namespace mner

namespace mner::crf {

// Recorded negative log-likelihood of `gold` given an (n x K) emission node.
// Backward yields (posterior - one-hot gold) for emissions and
// (expected - gold transition counts) for the transition matrix.
Var nll_loss(Graph& g, Var emissions, const CrfParams& p, std::span<const int> gold);

}  // namespace mner::crf
