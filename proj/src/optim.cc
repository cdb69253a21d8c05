#include "mner/optim.h"

#include <cmath>

#include "mner/errors.h"
#include "mner/kernels.h"

namespace mner {
namespace {

template <typename Fn>
void for_each_grad_block(Tensor& t, Fn&& fn) {
  if (t.row_tracking()) {
    for (std::size_t r : t.touched_rows()) fn(t.row(r), t.grad_row(r));
  } else {
    fn(t.values(), t.grads());
  }
}

}  // namespace

std::vector<double> dropout_mask(std::size_t dim, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ContractViolation("dropout_mask: rate must be in [0, 1), got " + std::to_string(rate));
  }
  std::vector<double> mask(dim, 1.0);
  if (rate == 0.0) return mask;
  const double keep_scale = 1.0 / (1.0 - rate);
  for (double& m : mask) m = rng.uniform01() < rate ? 0.0 : keep_scale;
  return mask;
}

double global_grad_norm(std::span<Tensor* const> params) {
  double sq = 0.0;
  for (Tensor* t : params) {
    if (!t->requires_grad()) continue;
    double local = 0.0;
    for_each_grad_block(*t, [&](std::span<double>, std::span<double> g) {
      local += kernels::sum_squares(g);
    });
    if (!std::isfinite(local)) {
      throw TrainingError("non-finite gradient in parameter '" + t->name() + "'");
    }
    sq += local;
  }
  return std::sqrt(sq);
}

SgdStats sgd_step(std::span<Tensor* const> params, double lr, double clip_norm) {
  SgdStats stats;
  stats.grad_norm = global_grad_norm(params);
  double factor = 1.0;
  if (stats.grad_norm > clip_norm) {
    factor = clip_norm / stats.grad_norm;
    stats.clipped = true;
  }
  const double step = -lr * factor;
  for (Tensor* t : params) {
    if (!t->requires_grad()) continue;
    if (step != 0.0) {
      for_each_grad_block(*t, [&](std::span<double> v, std::span<double> g) {
        kernels::axpy(step, g, v);
      });
    }
    t->zero_grad();
  }
  return stats;
}

}  // namespace mner
