#include "mner/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "mner/corpus.h"
#include "mner/errors.h"

namespace mner::eval {
namespace {

void check_aligned(const LabelSeqs& a, const LabelSeqs& b) {
  if (a.size() != b.size()) {
    throw ContractViolation("label sets differ in sentence count (" + std::to_string(a.size()) +
                            " vs " + std::to_string(b.size()) + ")");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) {
      throw ContractViolation("sentence " + std::to_string(i) + " differs in length");
    }
  }
}

void finish(Counts& c) {
  c.precision = c.predicted ? static_cast<double>(c.correct) / c.predicted : 0.0;
  c.recall = c.gold ? static_cast<double>(c.correct) / c.gold : 0.0;
  const double s = c.precision + c.recall;
  c.f1 = s > 0 ? 2.0 * c.precision * c.recall / s : 0.0;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

}  // namespace

std::vector<EntitySpan> extract_spans(std::span<const std::string> labels) {
  std::vector<EntitySpan> spans;
  bool open = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string& l = labels[i];
    if (!is_valid_label(l)) throw ContractViolation("malformed IOB label '" + l + "'");
    if (l == "O") {
      open = false;
      continue;
    }
    const std::string type = l.substr(2);
    const bool continues = l[0] == 'I' && open && spans.back().type == type;
    if (continues) {
      spans.back().end = i;
    } else {
      spans.push_back({type, i, i});
      open = true;
    }
  }
  return spans;
}

std::vector<std::string> render_spans(std::span<const EntitySpan> spans, std::size_t n) {
  std::vector<std::string> labels(n, "O");
  for (const auto& s : spans) {
    if (s.start > s.end || s.end >= n) throw ContractViolation("render_spans: span out of range");
    for (std::size_t i = s.start; i <= s.end; ++i) {
      if (labels[i] != "O") throw ContractViolation("render_spans: overlapping spans");
      labels[i] = (i == s.start ? "B-" : "I-") + s.type;
    }
  }
  return labels;
}

EvalResult f1_score(const LabelSeqs& gold, const LabelSeqs& pred) {
  check_aligned(gold, pred);
  EvalResult r;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const auto g = extract_spans(gold[s]);
    const auto p = extract_spans(pred[s]);
    const std::set<EntitySpan> gset(g.begin(), g.end());
    for (const auto& e : g) {
      ++r.overall.gold;
      ++r.per_type[e.type].gold;
    }
    for (const auto& e : p) {
      ++r.overall.predicted;
      auto& t = r.per_type[e.type];
      ++t.predicted;
      if (gset.count(e)) {
        ++r.overall.correct;
        ++t.correct;
      }
    }
  }
  finish(r.overall);
  for (auto& [_, c] : r.per_type) finish(c);
  return r;
}

McNemarResult mcnemar_from_counts(std::size_t b, std::size_t c) {
  McNemarResult r;
  r.b = b;
  r.c = c;
  if (b + c > 0) {
    const double diff = std::abs(static_cast<double>(b) - static_cast<double>(c));
    const double num = std::max(diff - 1.0, 0.0);
    r.chi_square = num * num / static_cast<double>(b + c);
  }
  r.significant_at_95 = r.chi_square > kChiSquare95;
  return r;
}

McNemarResult mcnemar(const LabelSeqs& gold, const LabelSeqs& a, const LabelSeqs& b,
                      McNemarUnit unit) {
  check_aligned(gold, a);
  check_aligned(gold, b);
  std::size_t nb = 0, nc = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (unit == McNemarUnit::kToken) {
      for (std::size_t i = 0; i < gold[s].size(); ++i) {
        const bool ok_a = a[s][i] == gold[s][i];
        const bool ok_b = b[s][i] == gold[s][i];
        if (ok_a && !ok_b) ++nb;
        if (!ok_a && ok_b) ++nc;
      }
    } else {
      const auto sa = extract_spans(a[s]);
      const auto sb = extract_spans(b[s]);
      const std::set<EntitySpan> set_a(sa.begin(), sa.end()), set_b(sb.begin(), sb.end());
      for (const auto& e : extract_spans(gold[s])) {
        const bool ok_a = set_a.count(e) > 0;
        const bool ok_b = set_b.count(e) > 0;
        if (ok_a && !ok_b) ++nb;
        if (!ok_a && ok_b) ++nc;
      }
    }
  }
  return mcnemar_from_counts(nb, nc);
}

std::string format_table(const EvalResult& r) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %9s %9s %9s %7s %7s %7s\n", "type", "precision",
                "recall", "F1", "gold", "pred", "correct");
  os << line;
  auto row = [&](const std::string& name, const Counts& c) {
    std::snprintf(line, sizeof line, "%-16s %9s %9s %9s %7zu %7zu %7zu\n", name.c_str(),
                  pct(c.precision).c_str(), pct(c.recall).c_str(), pct(c.f1).c_str(), c.gold,
                  c.predicted, c.correct);
    os << line;
  };
  row("overall", r.overall);
  for (const auto& [type, c] : r.per_type) row(type, c);
  return os.str();
}

std::string format_records(const EvalResult& r) {
  std::ostringstream os;
  auto rec = [&](const std::string& name, const Counts& c) {
    os << "type=" << name << " precision=" << pct(c.precision) << " recall=" << pct(c.recall)
       << " f1=" << pct(c.f1) << " gold=" << c.gold << " pred=" << c.predicted
       << " correct=" << c.correct << '\n';
  };
  rec("overall", r.overall);
  for (const auto& [type, c] : r.per_type) rec(type, c);
  return os.str();
}

std::string format_mcnemar(const McNemarResult& r) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "b=%zu c=%zu chi_square=%.2f %s at 95%% confidence\n", r.b, r.c,
                r.chi_square, r.significant_at_95 ? "significant" : "not significant");
  return buf;
}

}  // namespace mner::eval
