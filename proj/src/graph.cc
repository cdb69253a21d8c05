#include "mner/graph.h"

#include <algorithm>

#include "mner/errors.h"
#include "mner/kernels.h"

namespace mner {

Var Graph::push(Node n) {
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Graph::make(std::vector<std::size_t> shape, std::vector<double> value,
                bool needs_grad, BackwardFn backward) {
  owned_.push_back(Tensor::from_values({}, std::move(shape), std::move(value)));
  Node n;
  n.tensor = &owned_.back();
  n.owned = true;
  n.needs_grad = needs_grad && mode_ == GradMode::kRecord;
  if (n.needs_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

Var Graph::param(const Tensor& t) {
  Node n;
  // Written through only when recording, see class comment.
  n.tensor = const_cast<Tensor*>(&t);
  n.needs_grad = mode_ == GradMode::kRecord && t.requires_grad();
  return push(std::move(n));
}

Var Graph::input(std::vector<double> values) {
  const std::size_t n = values.size();
  return input({n}, std::move(values));
}

Var Graph::input(std::vector<std::size_t> shape, std::vector<double> values) {
  return make(std::move(shape), std::move(values), false, nullptr);
}

Var Graph::lookup(const Tensor& table, std::size_t row) {
  if (table.rank() != 2) throw ShapeError("lookup: table must be a matrix");
  if (row >= table.rows()) throw ContractViolation("lookup: row out of range");
  const auto src = table.row(row);
  const bool ng = mode_ == GradMode::kRecord && table.requires_grad();
  auto* tp = const_cast<Tensor*>(&table);
  Var out = make({src.size()}, std::vector<double>(src.begin(), src.end()), ng, nullptr);
  if (ng) {
    node(out).backward = [tp, row, out](Graph& g, Var) {
      tp->mark_row(row);
      kernels::axpy(1.0, g.grad(out), tp->grad_row(row));
    };
  }
  return out;
}

Var Graph::concat(std::span<const Var> parts) {
  std::vector<double> v;
  bool ng = false;
  for (Var p : parts) {
    const auto pv = value(p);
    v.insert(v.end(), pv.begin(), pv.end());
    ng = ng || needs_grad(p);
  }
  const std::size_t n = v.size();
  std::vector<Var> ins(parts.begin(), parts.end());
  Var out = make({n}, std::move(v), ng, nullptr);
  if (needs_grad(out)) {
    node(out).backward = [ins, out](Graph& g, Var) {
      const auto go = g.grad(out);
      std::size_t off = 0;
      for (Var p : ins) {
        const std::size_t len = g.size(p);
        if (g.needs_grad(p)) kernels::axpy(1.0, go.subspan(off, len), g.grad(p));
        off += len;
      }
    };
  }
  return out;
}

Var Graph::slice(Var x, std::size_t offset, std::size_t len) {
  const auto xv = value(x);
  if (offset + len > xv.size() || len == 0) throw ShapeError("slice: out of range");
  Var out = make({len}, std::vector<double>(xv.begin() + offset, xv.begin() + offset + len),
                 needs_grad(x), nullptr);
  if (needs_grad(out)) {
    node(out).backward = [x, out, offset, len](Graph& g, Var) {
      kernels::axpy(1.0, g.grad(out), g.grad(x).subspan(offset, len));
    };
  }
  return out;
}

Var Graph::stack(std::span<const Var> rows) {
  if (rows.empty()) throw ContractViolation("stack: no rows");
  const std::size_t len = size(rows[0]);
  std::vector<double> v;
  v.reserve(rows.size() * len);
  bool ng = false;
  for (Var r : rows) {
    if (size(r) != len) throw ShapeError("stack: rows differ in length");
    const auto rv = value(r);
    v.insert(v.end(), rv.begin(), rv.end());
    ng = ng || needs_grad(r);
  }
  std::vector<Var> ins(rows.begin(), rows.end());
  Var out = make({rows.size(), len}, std::move(v), ng, nullptr);
  if (needs_grad(out)) {
    node(out).backward = [ins, out, len](Graph& g, Var) {
      const auto go = g.grad(out);
      for (std::size_t i = 0; i < ins.size(); ++i) {
        if (g.needs_grad(ins[i])) kernels::axpy(1.0, go.subspan(i * len, len), g.grad(ins[i]));
      }
    };
  }
  return out;
}

Var Graph::affine(const Tensor& w, const Tensor& b, Var x) {
  if (w.rank() != 2 || b.size() != w.rows() || size(x) != w.cols()) {
    throw ShapeError("affine: W is " + std::to_string(w.rows()) + "x" +
                     std::to_string(w.cols()) + ", b has " + std::to_string(b.size()) +
                     ", x has " + std::to_string(size(x)));
  }
  std::vector<double> y(w.rows());
  kernels::active().gemv(w.values().data(), value(x).data(), b.values().data(), y.data(),
                         w.rows(), w.cols());
  const bool rec = mode_ == GradMode::kRecord;
  const bool wg = rec && w.requires_grad();
  const bool bg = rec && b.requires_grad();
  Var out = make({w.rows()}, std::move(y), wg || bg || needs_grad(x), nullptr);
  if (needs_grad(out)) {
    auto* wp = const_cast<Tensor*>(&w);
    auto* bp = const_cast<Tensor*>(&b);
    node(out).backward = [wp, bp, wg, bg, x, out](Graph& g, Var) {
      const auto go = g.grad(out);
      const auto& k = kernels::active();
      if (wg) k.ger_acc(go.data(), g.value(x).data(), wp->grads().data(), wp->rows(), wp->cols());
      if (bg) kernels::axpy(1.0, go, bp->grads());
      if (g.needs_grad(x)) {
        k.gemv_t_acc(wp->values().data(), go.data(), g.grad(x).data(), wp->rows(), wp->cols());
      }
    };
  }
  return out;
}

Var Graph::mul_const(Var x, std::vector<double> mask) {
  const auto xv = value(x);
  if (mask.size() != xv.size()) throw ShapeError("mul_const: mask length mismatch");
  std::vector<double> y(xv.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = xv[i] * mask[i];
  Var out = make(shape(x), std::move(y), needs_grad(x), nullptr);
  if (needs_grad(out)) {
    node(out).backward = [x, out, m = std::move(mask)](Graph& g, Var) {
      const auto go = g.grad(out);
      auto gx = g.grad(x);
      for (std::size_t i = 0; i < m.size(); ++i) gx[i] += go[i] * m[i];
    };
  }
  return out;
}

Var Graph::add(Var a, Var b) {
  const auto av = value(a), bv = value(b);
  if (av.size() != bv.size()) throw ShapeError("add: size mismatch");
  std::vector<double> y(av.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] + bv[i];
  Var out = make(shape(a), std::move(y), needs_grad(a) || needs_grad(b), nullptr);
  if (needs_grad(out)) {
    node(out).backward = [a, b, out](Graph& g, Var) {
      if (g.needs_grad(a)) kernels::axpy(1.0, g.grad(out), g.grad(a));
      if (g.needs_grad(b)) kernels::axpy(1.0, g.grad(out), g.grad(b));
    };
  }
  return out;
}

Var Graph::sum(Var x) {
  double s = 0.0;
  for (double v : value(x)) s += v;
  Var out = make({1}, {s}, needs_grad(x), nullptr);
  if (needs_grad(out)) {
    node(out).backward = [x, out](Graph& g, Var) {
      const double go = g.grad(out)[0];
      for (double& v : g.grad(x)) v += go;
    };
  }
  return out;
}

Var Graph::dot(Var a, Var b) {
  if (size(a) != size(b)) throw ShapeError("dot: size mismatch");
  const double s = kernels::dot(value(a), value(b));
  Var out = make({1}, {s}, needs_grad(a) || needs_grad(b), nullptr);
  if (needs_grad(out)) {
    node(out).backward = [a, b, out](Graph& g, Var) {
      const double go = g.grad(out)[0];
      // Read both values before writing either grad; a and b may alias.
      if (g.needs_grad(a)) kernels::axpy(go, g.value(b), g.grad(a));
      if (g.needs_grad(b)) kernels::axpy(go, g.value(a), g.grad(b));
    };
  }
  return out;
}

void Graph::backward(Var loss) {
  if (size(loss) != 1) {
    throw ContractViolation("backward: loss must be a scalar, got " +
                            std::to_string(size(loss)) + " elements");
  }
  if (!needs_grad(loss)) return;
  for (Tensor& t : owned_) t.zero_grad();
  grad(loss)[0] += 1.0;
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    if (nodes_[i].backward) nodes_[i].backward(*this, Var{static_cast<std::uint32_t>(i)});
  }
}

}  // namespace mner
