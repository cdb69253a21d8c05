#pragma once
// CoNLL-style exact-match entity scoring and McNemar's test.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace mner::eval {

using LabelSeqs = std::vector<std::vector<std::string>>;

struct EntitySpan {
  std::string type;
  std::size_t start = 0;  // inclusive token indices
  std::size_t end = 0;

  auto operator<=>(const EntitySpan&) const = default;
};

// Maximal spans. B-X always opens a span; I-X opens one unless it continues
// an X span. Throws ContractViolation on a malformed label.
std::vector<EntitySpan> extract_spans(std::span<const std::string> labels);

// IOB2 rendering of non-overlapping spans over n tokens.
std::vector<std::string> render_spans(std::span<const EntitySpan> spans, std::size_t n);

struct Counts {
  std::size_t gold = 0;
  std::size_t predicted = 0;
  std::size_t correct = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvalResult {
  Counts overall;
  std::map<std::string, Counts> per_type;

  double precision() const { return overall.precision; }
  double recall() const { return overall.recall; }
  double f1() const { return overall.f1; }
};

EvalResult f1_score(const LabelSeqs& gold, const LabelSeqs& pred);

enum class McNemarUnit { kToken, kEntity };

struct McNemarResult {
  std::size_t b = 0;  // A correct, B wrong
  std::size_t c = 0;  // A wrong, B correct
  double chi_square = 0.0;
  bool significant_at_95 = false;
};

inline constexpr double kChiSquare95 = 3.841459;

// Continuity-corrected statistic max(|b-c|-1, 0)^2 / (b+c); 0 when b+c = 0.
McNemarResult mcnemar_from_counts(std::size_t b, std::size_t c);

// Token unit: per-token label correctness. Entity unit: per gold entity,
// whether the system predicted exactly that span.
McNemarResult mcnemar(const LabelSeqs& gold, const LabelSeqs& a, const LabelSeqs& b,
                      McNemarUnit unit = McNemarUnit::kToken);

// Plain-text table with percentages to two decimals.
std::string format_table(const EvalResult& r);
// One "key=value ..." record per line: overall first, then each type.
std::string format_records(const EvalResult& r);
std::string format_mcnemar(const McNemarResult& r);

}  // namespace mner::eval
