#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mner {

// Dense row-major array of doubles with a gradient buffer of equal length.
//
// Rank-1 tensors are vectors, rank-2 tensors are matrices. Embedding tables
// can opt into row tracking so that the optimizer only visits rows that
// received gradient since the last step.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::string name, std::vector<std::size_t> shape,
         bool requires_grad = true);

  static Tensor from_values(std::string name, std::vector<std::size_t> shape,
                            std::vector<double> values,
                            bool requires_grad = true);

  const std::string& name() const { return name_; }
  void set_name(std::string n) { name_ = std::move(n); }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }
  // Matrix view: rank-1 tensors are a single column.
  std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::span<double> grads() { return grads_; }
  std::span<const double> grads() const { return grads_; }

  std::span<double> row(std::size_t r) {
    return std::span<double>(values_).subspan(r * cols(), cols());
  }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values_).subspan(r * cols(), cols());
  }
  std::span<double> grad_row(std::size_t r) {
    return std::span<double>(grads_).subspan(r * cols(), cols());
  }

  double& at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

  bool requires_grad() const { return requires_grad_; }
  void set_requires_grad(bool on) { requires_grad_ = on; }

  void zero_grad();

  // Row-sparse gradient bookkeeping.
  void set_row_tracking(bool on);
  bool row_tracking() const { return row_tracking_; }
  void mark_row(std::size_t r);
  const std::vector<std::size_t>& touched_rows() const { return touched_rows_; }

 private:
  std::string name_;
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
  std::vector<double> grads_;
  bool requires_grad_ = true;
  bool row_tracking_ = false;
  std::vector<std::size_t> touched_rows_;
  std::vector<bool> row_marked_;
};

// Dense value-only matrix used for emissions and encoder outputs.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data).subspan(r * cols, cols);
  }
  std::span<double> row(std::size_t r) {
    return std::span<double>(data).subspan(r * cols, cols);
  }
};

}  // namespace mner
