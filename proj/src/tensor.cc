#include "mner/tensor.h"

#include <algorithm>
#include <functional>
#include <numeric>

#include "mner/errors.h"

namespace mner {

Tensor::Tensor(std::string name, std::vector<std::size_t> shape,
               bool requires_grad)
    : name_(std::move(name)), shape_(std::move(shape)),
      requires_grad_(requires_grad) {
  if (shape_.empty()) throw ShapeError("tensor '" + name_ + "' has empty shape");
  for (std::size_t d : shape_) {
    if (d == 0) throw ShapeError("tensor '" + name_ + "' has a zero dimension");
  }
  const std::size_t n = std::accumulate(shape_.begin(), shape_.end(),
                                        std::size_t{1}, std::multiplies<>());
  values_.assign(n, 0.0);
  grads_.assign(n, 0.0);
}

Tensor Tensor::from_values(std::string name, std::vector<std::size_t> shape,
                           std::vector<double> values, bool requires_grad) {
  Tensor t(std::move(name), std::move(shape), requires_grad);
  if (values.size() != t.size()) {
    throw ShapeError("tensor '" + t.name() + "': " + std::to_string(values.size()) +
                     " values for " + std::to_string(t.size()) + " elements");
  }
  t.values_ = std::move(values);
  return t;
}

void Tensor::zero_grad() {
  if (row_tracking_) {
    for (std::size_t r : touched_rows_) {
      auto g = grad_row(r);
      std::fill(g.begin(), g.end(), 0.0);
      row_marked_[r] = false;
    }
    touched_rows_.clear();
    return;
  }
  std::fill(grads_.begin(), grads_.end(), 0.0);
}

void Tensor::set_row_tracking(bool on) {
  row_tracking_ = on;
  touched_rows_.clear();
  row_marked_.assign(on ? rows() : 0, false);
  if (on) {
    // Rows with stale gradient would otherwise be invisible to zero_grad().
    for (std::size_t r = 0; r < rows(); ++r) {
      const auto g = grad_row(r);
      if (std::any_of(g.begin(), g.end(), [](double v) { return v != 0.0; })) {
        mark_row(r);
      }
    }
  }
}

void Tensor::mark_row(std::size_t r) {
  if (!row_tracking_ || row_marked_[r]) return;
  row_marked_[r] = true;
  touched_rows_.push_back(r);
}

}  // namespace mner
