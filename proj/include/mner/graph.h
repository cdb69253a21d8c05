#pragma once
// Tape-based reverse-mode differentiation over Tensors.
//
// A Graph records operations as they are evaluated. Parameters enter the
// tape by reference; intermediates are owned by the graph. backward() walks
// the tape in reverse and accumulates d(loss)/d(param) into each parameter's
// grads buffer. Graphs built with GradMode::kInference never write to any
// parameter and can run concurrently over a shared, frozen model.

#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "mner/tensor.h"

namespace mner {

struct Var {
  std::uint32_t id = UINT32_MAX;
  bool valid() const { return id != UINT32_MAX; }
};

enum class GradMode { kRecord, kInference };

class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, Var self)>;

  explicit Graph(GradMode mode = GradMode::kRecord) : mode_(mode) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  GradMode mode() const { return mode_; }

  // Parameter leaf. Gradient flows into t when recording and
  // t.requires_grad(); the tensor must outlive the graph.
  Var param(const Tensor& t);
  // Constant leaf.
  Var input(std::vector<double> values);
  Var input(std::vector<std::size_t> shape, std::vector<double> values);

  // Row `row` of a rank-2 table (embedding lookup).
  Var lookup(const Tensor& table, std::size_t row);
  Var concat(std::span<const Var> parts);
  Var slice(Var x, std::size_t offset, std::size_t len);
  // Stacks equal-length vectors into a rows x len matrix.
  Var stack(std::span<const Var> rows);
  // W x + b with W (out x in), b (out).
  Var affine(const Tensor& w, const Tensor& b, Var x);
  // Elementwise product with a constant (e.g. a dropout mask).
  Var mul_const(Var x, std::vector<double> mask);
  Var add(Var a, Var b);
  Var sum(Var x);
  Var dot(Var a, Var b);

  // Custom node: `value` is owned by the graph; `backward` runs during the
  // reverse sweep and reads grad(self) to propagate into its inputs.
  // Pass needs_grad=false when no input needs gradient.
  Var make(std::vector<std::size_t> shape, std::vector<double> value,
           bool needs_grad, BackwardFn backward);

  std::span<const double> value(Var v) const { return node(v).tensor->values(); }
  const std::vector<std::size_t>& shape(Var v) const { return node(v).tensor->shape(); }
  std::size_t size(Var v) const { return node(v).tensor->size(); }
  bool needs_grad(Var v) const { return node(v).needs_grad; }
  // Gradient buffer of v; only valid when needs_grad(v).
  std::span<double> grad(Var v) { return node(v).tensor->grads(); }
  Tensor& tensor(Var v) { return *node(v).tensor; }

  std::size_t num_nodes() const { return nodes_.size(); }

  // Fills parameter gradients with d(loss)/d(param). loss must be a scalar.
  // Calling twice accumulates twice into parameters.
  void backward(Var loss);

 private:
  struct Node {
    Tensor* tensor = nullptr;
    bool owned = false;
    bool needs_grad = false;
    BackwardFn backward;
  };

  const Node& node(Var v) const { return nodes_.at(v.id); }
  Node& node(Var v) { return nodes_.at(v.id); }
  Var push(Node n);

  GradMode mode_;
  std::deque<Tensor> owned_;
  std::vector<Node> nodes_;
};

}  // namespace mner
