#include "mner/crf.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "mner/errors.h"

namespace mner::crf {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

void check_shapes(const Emissions& em, const CrfParams& p) {
  if (em.rows == 0) throw ContractViolation("crf: empty emission matrix");
  if (em.cols != p.num_tags()) {
    throw ShapeError("crf: emissions have " + std::to_string(em.cols) +
                     " columns, CRF has " + std::to_string(p.num_tags()) + " tags");
  }
}

// alpha(t, j): log-sum of all prefixes ending in tag j at t, including em[t, j].
Matrix forward_scores(const Emissions& em, const CrfParams& p) {
  const std::size_t n = em.rows, k = em.cols;
  Matrix alpha(n, k);
  for (std::size_t j = 0; j < k; ++j) alpha(0, j) = p(p.start(), j) + em(0, j);
  std::vector<double> buf(k);
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t i = 0; i < k; ++i) buf[i] = alpha(t - 1, i) + p(i, j);
      alpha(t, j) = log_sum_exp(buf) + em(t, j);
    }
  }
  return alpha;
}

// beta(t, i): log-sum of all suffixes after t given tag i at t, through STOP.
Matrix backward_scores(const Emissions& em, const CrfParams& p) {
  const std::size_t n = em.rows, k = em.cols;
  Matrix beta(n, k);
  for (std::size_t i = 0; i < k; ++i) beta(n - 1, i) = p(i, p.stop());
  std::vector<double> buf(k);
  for (std::size_t t = n - 1; t-- > 0;) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) buf[j] = p(i, j) + em(t + 1, j) + beta(t + 1, j);
      beta(t, i) = log_sum_exp(buf);
    }
  }
  return beta;
}

double final_log_z(const Matrix& alpha, const CrfParams& p) {
  const std::size_t k = alpha.cols;
  std::vector<double> buf(k);
  for (std::size_t j = 0; j < k; ++j) buf[j] = alpha(alpha.rows - 1, j) + p(j, p.stop());
  return log_sum_exp(buf);
}

}  // namespace

CrfParams::CrfParams(std::size_t num_tags)
    : num_tags_(num_tags), transitions_("crf.transitions", {num_tags + 2, num_tags + 2}) {
  if (num_tags == 0) throw ContractViolation("CrfParams: need at least one tag");
  reset_fixed();
}

void CrfParams::reset_fixed() {
  const std::size_t m = num_tags_ + 2;
  for (std::size_t i = 0; i < m; ++i) {
    transitions_.at(i, start()) = kNegInf;
    transitions_.at(stop(), i) = kNegInf;
  }
}

double sentence_score(const Emissions& em, const CrfParams& p,
                      std::span<const int> tags) {
  check_shapes(em, p);
  if (tags.size() != em.rows) {
    throw ShapeError("crf: tag sequence length does not match emissions");
  }
  const auto k = static_cast<int>(p.num_tags());
  for (int y : tags) {
    if (y < 0 || y >= k) throw ContractViolation("crf: tag id out of range");
  }
  double s = p(p.start(), tags[0]);
  for (std::size_t i = 0; i < tags.size(); ++i) {
    s += em(i, tags[i]);
    if (i + 1 < tags.size()) s += p(tags[i], tags[i + 1]);
  }
  return s + p(tags.back(), p.stop());
}

double log_partition(const Emissions& em, const CrfParams& p) {
  check_shapes(em, p);
  return final_log_z(forward_scores(em, p), p);
}

Posteriors posteriors(const Emissions& em, const CrfParams& p) {
  check_shapes(em, p);
  const std::size_t n = em.rows, k = em.cols;
  const Matrix alpha = forward_scores(em, p);
  const Matrix beta = backward_scores(em, p);
  Posteriors out;
  out.log_z = final_log_z(alpha, p);
  out.unary = Matrix(n, k);
  out.transitions = Matrix(k + 2, k + 2);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j = 0; j < k; ++j) {
      out.unary(t, j) = std::exp(alpha(t, j) + beta(t, j) - out.log_z);
    }
  }
  for (std::size_t j = 0; j < k; ++j) {
    out.transitions(p.start(), j) = out.unary(0, j);
    out.transitions(j, p.stop()) = out.unary(n - 1, j);
  }
  for (std::size_t t = 0; t + 1 < n; ++t) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        out.transitions(i, j) += std::exp(alpha(t, i) + p(i, j) + em(t + 1, j) +
                                          beta(t + 1, j) - out.log_z);
      }
    }
  }
  return out;
}

double nll(const Emissions& em, const CrfParams& p, std::span<const int> gold) {
  const double gold_score = sentence_score(em, p, gold);
  return log_partition(em, p) - gold_score;
}

Decoded viterbi(const Emissions& em, const CrfParams& p) {
  check_shapes(em, p);
  const std::size_t n = em.rows, k = em.cols;
  Matrix best(n, k);
  std::vector<int> back(n * k, 0);
  for (std::size_t j = 0; j < k; ++j) best(0, j) = p(p.start(), j) + em(0, j);
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t j = 0; j < k; ++j) {
      double top = best(t - 1, 0) + p(0, j);
      int arg = 0;
      for (std::size_t i = 1; i < k; ++i) {
        const double s = best(t - 1, i) + p(i, j);
        if (s > top) {
          top = s;
          arg = static_cast<int>(i);
        }
      }
      best(t, j) = top + em(t, j);
      back[t * k + j] = arg;
    }
  }
  double top = best(n - 1, 0) + p(0, p.stop());
  int arg = 0;
  for (std::size_t j = 1; j < k; ++j) {
    const double s = best(n - 1, j) + p(j, p.stop());
    if (s > top) {
      top = s;
      arg = static_cast<int>(j);
    }
  }
  Decoded out;
  out.score = top;
  out.tags.assign(n, 0);
  out.tags[n - 1] = arg;
  for (std::size_t t = n - 1; t > 0; --t) {
    out.tags[t - 1] = back[t * k + static_cast<std::size_t>(out.tags[t])];
  }
  return out;
}

CrfParams with_iob_constraints(const CrfParams& p,
                               std::span<const std::string> labels) {
  if (labels.size() != p.num_tags()) {
    throw ShapeError("with_iob_constraints: label count does not match CRF tags");
  }
  CrfParams out = p;
  auto inside_type = [](const std::string& l) -> std::string {
    return l.rfind("I-", 0) == 0 ? l.substr(2) : std::string();
  };
  auto entity_type = [](const std::string& l) -> std::string {
    return (l.rfind("B-", 0) == 0 || l.rfind("I-", 0) == 0) ? l.substr(2) : std::string();
  };
  for (std::size_t j = 0; j < labels.size(); ++j) {
    const std::string to_type = inside_type(labels[j]);
    if (to_type.empty()) continue;
    out.at(p.start(), j) = kNegInf;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (entity_type(labels[i]) != to_type) out.at(i, j) = kNegInf;
    }
  }
  return out;
}

}  // namespace mner::crf

#include "mner/graph.h"

namespace mner::crf {

Var nll_loss(Graph& g, Var emissions, const CrfParams& p, std::span<const int> gold) {
  const auto& shape = g.shape(emissions);
  if (shape.size() != 2) throw ShapeError("nll_loss: emissions must be a matrix");
  Emissions em(shape[0], shape[1]);
  const auto ev = g.value(emissions);
  std::copy(ev.begin(), ev.end(), em.data.begin());

  const double gold_score = sentence_score(em, p, gold);
  const bool record = g.mode() == GradMode::kRecord;
  const bool trans_grad = record && p.transitions().requires_grad();
  const bool ng = trans_grad || g.needs_grad(emissions);
  if (!ng) return g.input({1}, {log_partition(em, p) - gold_score});

  auto post = std::make_shared<Posteriors>(posteriors(em, p));
  std::vector<int> y(gold.begin(), gold.end());
  auto* tp = const_cast<Tensor*>(&p.transitions());
  const std::size_t start = p.start(), stop = p.stop();
  auto backward = [post, y, tp, trans_grad, emissions, start, stop](Graph& gr, Var self) {
    const double go = gr.grad(self)[0];
    const std::size_t n = post->unary.rows, k = post->unary.cols;
    if (gr.needs_grad(emissions)) {
      auto ge = gr.grad(emissions);
      for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t j = 0; j < k; ++j) ge[t * k + j] += go * post->unary(t, j);
        ge[t * k + static_cast<std::size_t>(y[t])] -= go;
      }
    }
    if (trans_grad) {
      auto ga = tp->grads();
      const std::size_t m = k + 2;
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          const double e = post->transitions(i, j);
          if (e != 0.0) ga[i * m + j] += go * e;
        }
      }
      ga[start * m + static_cast<std::size_t>(y.front())] -= go;
      for (std::size_t t = 0; t + 1 < n; ++t) {
        ga[static_cast<std::size_t>(y[t]) * m + static_cast<std::size_t>(y[t + 1])] -= go;
      }
      ga[static_cast<std::size_t>(y.back()) * m + stop] -= go;
    }
  };
  return g.make({1}, {post->log_z - gold_score}, true, std::move(backward));
}

}  // namespace mner::crf
