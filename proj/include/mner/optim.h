#pragma once

#include <span>
#include <vector>

#include "mner/rng.h"
#include "mner/tensor.h"

namespace mner {

// Inverted dropout: each entry is 0 with probability `rate`, otherwise
// 1/(1-rate). Requires 0 <= rate < 1; rate 0 draws nothing from rng.
std::vector<double> dropout_mask(std::size_t dim, double rate, Rng& rng);

struct SgdStats {
  double grad_norm = 0.0;  // global L2 norm before clipping
  bool clipped = false;
};

// Global-norm clipping followed by a plain SGD update; zeroes all grads.
// Tensors with requires_grad() == false are skipped. Throws TrainingError
// naming the first tensor with a non-finite gradient (no update is applied).
SgdStats sgd_step(std::span<Tensor* const> params, double lr, double clip_norm);

double global_grad_norm(std::span<Tensor* const> params);

}  // namespace mner
