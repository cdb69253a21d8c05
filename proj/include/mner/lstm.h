#pragma once
// LSTM cell, bidirectional sequence encoder and fixed-length sequence summary.

#include <span>
#include <string>
#include <vector>

#include "mner/graph.h"
#include "mner/rng.h"
#include "mner/tensor.h"

namespace mner {

// Gate order everywhere: input, forget, output, candidate.
struct LstmParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  Tensor w_i, w_f, w_o, w_g;  // hidden x (input + hidden), acting on [x; h_prev]
  Tensor b_i, b_f, b_o, b_g;  // hidden

  LstmParams() = default;
  LstmParams(const std::string& prefix, std::size_t input_dim, std::size_t hidden_dim);

  // Glorot-uniform weights, zero biases, forget-gate bias 1.
  void init(Rng& rng);

  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
};

struct BiLstmParams {
  LstmParams fwd;
  LstmParams bwd;

  BiLstmParams() = default;
  BiLstmParams(const std::string& prefix, std::size_t input_dim, std::size_t hidden_dim)
      : fwd(prefix + ".fwd", input_dim, hidden_dim),
        bwd(prefix + ".bwd", input_dim, hidden_dim) {}

  void init(Rng& rng) {
    fwd.init(rng);
    bwd.init(rng);
  }
  std::size_t output_dim() const { return 2 * fwd.hidden_dim; }
};

// Glorot-uniform fill of a matrix tensor.
void glorot_uniform(Tensor& t, Rng& rng);

struct LstmState {
  std::vector<double> h;
  std::vector<double> c;
};

// One recurrence step, evaluated directly.
LstmState lstm_step(const LstmParams& p, std::span<const double> x,
                    std::span<const double> h_prev, std::span<const double> c_prev);

// Rows are [forward_h_i ; backward_h_i], shape n x 2*hidden.
Matrix bilstm_encode(const BiLstmParams& p, const std::vector<std::vector<double>>& xs);

// Recorded versions. `state` is the concatenation [h; c] of length 2*hidden;
// the result is the next state in the same layout.
Var lstm_step(Graph& g, const LstmParams& p, Var x, Var state);
Var zero_state(Graph& g, const LstmParams& p);

// One 2*hidden output per input position.
std::vector<Var> bilstm_encode(Graph& g, const BiLstmParams& p, std::span<const Var> xs);

// [last forward h ; last backward h] over the embedded symbol sequence.
Var sequence_embed(Graph& g, const Tensor& table, const BiLstmParams& p,
                   std::span<const int> ids);

}  // namespace mner
