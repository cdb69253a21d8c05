#include "mner/lstm.h"

#include <algorithm>
#include <cmath>
#include <memory>

#include "mner/errors.h"
#include "mner/kernels.h"

namespace mner {
namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_dims(const LstmParams& p, std::size_t x, std::size_t state) {
  if (x != p.input_dim || state != 2 * p.hidden_dim) {
    throw ShapeError("lstm_step: expected input " + std::to_string(p.input_dim) +
                     " and state " + std::to_string(2 * p.hidden_dim) + ", got " +
                     std::to_string(x) + " and " + std::to_string(state));
  }
}

// Activations cached by the forward pass for the backward pass.
struct StepCache {
  std::vector<double> z;  // [x; h_prev]
  std::vector<double> i, f, o, g;
  std::vector<double> c_prev, tanh_c;
};

std::vector<double> step_forward(const LstmParams& p, std::span<const double> x,
                                 std::span<const double> state, StepCache& cache) {
  const std::size_t hd = p.hidden_dim;
  cache.z.assign(x.begin(), x.end());
  cache.z.insert(cache.z.end(), state.begin(), state.begin() + hd);
  cache.c_prev.assign(state.begin() + hd, state.end());
  cache.i.resize(hd);
  cache.f.resize(hd);
  cache.o.resize(hd);
  cache.g.resize(hd);
  const auto& k = kernels::active();
  const std::size_t cols = p.input_dim + hd;
  k.gemv(p.w_i.values().data(), cache.z.data(), p.b_i.values().data(), cache.i.data(), hd, cols);
  k.gemv(p.w_f.values().data(), cache.z.data(), p.b_f.values().data(), cache.f.data(), hd, cols);
  k.gemv(p.w_o.values().data(), cache.z.data(), p.b_o.values().data(), cache.o.data(), hd, cols);
  k.gemv(p.w_g.values().data(), cache.z.data(), p.b_g.values().data(), cache.g.data(), hd, cols);
  std::vector<double> out(2 * hd);
  cache.tanh_c.resize(hd);
  for (std::size_t j = 0; j < hd; ++j) {
    cache.i[j] = sigmoid(cache.i[j]);
    cache.f[j] = sigmoid(cache.f[j]);
    cache.o[j] = sigmoid(cache.o[j]);
    cache.g[j] = std::tanh(cache.g[j]);
    const double c = cache.f[j] * cache.c_prev[j] + cache.i[j] * cache.g[j];
    cache.tanh_c[j] = std::tanh(c);
    out[j] = cache.o[j] * cache.tanh_c[j];
    out[hd + j] = c;
  }
  return out;
}

}  // namespace

LstmParams::LstmParams(const std::string& prefix, std::size_t in, std::size_t hid)
    : input_dim(in),
      hidden_dim(hid),
      w_i(prefix + ".W_i", {hid, in + hid}),
      w_f(prefix + ".W_f", {hid, in + hid}),
      w_o(prefix + ".W_o", {hid, in + hid}),
      w_g(prefix + ".W_g", {hid, in + hid}),
      b_i(prefix + ".b_i", {hid}),
      b_f(prefix + ".b_f", {hid}),
      b_o(prefix + ".b_o", {hid}),
      b_g(prefix + ".b_g", {hid}) {}

void glorot_uniform(Tensor& t, Rng& rng) {
  const double fan_out = static_cast<double>(t.rows());
  const double fan_in = static_cast<double>(t.cols());
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& v : t.values()) v = rng.uniform(-limit, limit);
}

void LstmParams::init(Rng& rng) {
  for (Tensor* w : {&w_i, &w_f, &w_o, &w_g}) glorot_uniform(*w, rng);
  for (Tensor* b : {&b_i, &b_o, &b_g}) std::fill(b->values().begin(), b->values().end(), 0.0);
  std::fill(b_f.values().begin(), b_f.values().end(), 1.0);
}

std::vector<Tensor*> LstmParams::tensors() {
  return {&w_i, &w_f, &w_o, &w_g, &b_i, &b_f, &b_o, &b_g};
}

std::vector<const Tensor*> LstmParams::tensors() const {
  return {&w_i, &w_f, &w_o, &w_g, &b_i, &b_f, &b_o, &b_g};
}

LstmState lstm_step(const LstmParams& p, std::span<const double> x,
                    std::span<const double> h_prev, std::span<const double> c_prev) {
  if (h_prev.size() != p.hidden_dim || c_prev.size() != p.hidden_dim) {
    throw ShapeError("lstm_step: state size does not match hidden_dim");
  }
  check_dims(p, x.size(), 2 * p.hidden_dim);
  std::vector<double> state(h_prev.begin(), h_prev.end());
  state.insert(state.end(), c_prev.begin(), c_prev.end());
  StepCache cache;
  const auto out = step_forward(p, x, state, cache);
  return {{out.begin(), out.begin() + p.hidden_dim}, {out.begin() + p.hidden_dim, out.end()}};
}

Var zero_state(Graph& g, const LstmParams& p) {
  return g.input(std::vector<double>(2 * p.hidden_dim, 0.0));
}

Var lstm_step(Graph& g, const LstmParams& p, Var x, Var state) {
  check_dims(p, g.size(x), g.size(state));
  auto cache = std::make_shared<StepCache>();
  auto out_values = step_forward(p, g.value(x), g.value(state), *cache);

  const bool record = g.mode() == GradMode::kRecord;
  bool params_need = false;
  for (const Tensor* t : p.tensors()) params_need = params_need || (record && t->requires_grad());
  const bool ng = params_need || g.needs_grad(x) || g.needs_grad(state);

  auto* pp = const_cast<LstmParams*>(&p);
  auto backward = [pp, cache, x, state](Graph& gr, Var self) {
    const std::size_t hd = pp->hidden_dim;
    const std::size_t cols = pp->input_dim + hd;
    const auto go = gr.grad(self);
    const StepCache& s = *cache;
    std::vector<double> da_i(hd), da_f(hd), da_o(hd), da_g(hd), dc_prev(hd);
    for (std::size_t j = 0; j < hd; ++j) {
      const double dh = go[j];
      const double dc = go[hd + j] + dh * s.o[j] * (1.0 - s.tanh_c[j] * s.tanh_c[j]);
      da_o[j] = dh * s.tanh_c[j] * s.o[j] * (1.0 - s.o[j]);
      da_i[j] = dc * s.g[j] * s.i[j] * (1.0 - s.i[j]);
      da_f[j] = dc * s.c_prev[j] * s.f[j] * (1.0 - s.f[j]);
      da_g[j] = dc * s.i[j] * (1.0 - s.g[j] * s.g[j]);
      dc_prev[j] = dc * s.f[j];
    }
    const auto& k = kernels::active();
    const std::pair<Tensor*, const std::vector<double>*> w_and_da[] = {
        {&pp->w_i, &da_i}, {&pp->w_f, &da_f}, {&pp->w_o, &da_o}, {&pp->w_g, &da_g}};
    const std::pair<Tensor*, const std::vector<double>*> b_and_da[] = {
        {&pp->b_i, &da_i}, {&pp->b_f, &da_f}, {&pp->b_o, &da_o}, {&pp->b_g, &da_g}};
    const bool need_z = gr.needs_grad(x) || gr.needs_grad(state);
    std::vector<double> dz(need_z ? cols : 0, 0.0);
    for (const auto& [w, da] : w_and_da) {
      if (w->requires_grad()) k.ger_acc(da->data(), s.z.data(), w->grads().data(), hd, cols);
      if (need_z) k.gemv_t_acc(w->values().data(), da->data(), dz.data(), hd, cols);
    }
    for (const auto& [b, da] : b_and_da) {
      if (b->requires_grad()) k.axpy(1.0, da->data(), b->grads().data(), hd);
    }
    if (gr.needs_grad(x)) k.axpy(1.0, dz.data(), gr.grad(x).data(), pp->input_dim);
    if (gr.needs_grad(state)) {
      auto gs = gr.grad(state);
      k.axpy(1.0, dz.data() + pp->input_dim, gs.data(), hd);
      k.axpy(1.0, dc_prev.data(), gs.data() + hd, hd);
    }
  };
  return g.make({2 * p.hidden_dim}, std::move(out_values), ng, std::move(backward));
}

std::vector<Var> bilstm_encode(Graph& g, const BiLstmParams& p, std::span<const Var> xs) {
  if (xs.empty()) throw ContractViolation("bilstm_encode: empty sequence");
  const std::size_t n = xs.size();
  const std::size_t hd = p.fwd.hidden_dim;
  std::vector<Var> fwd(n), bwd(n);
  Var s = zero_state(g, p.fwd);
  for (std::size_t i = 0; i < n; ++i) {
    s = lstm_step(g, p.fwd, xs[i], s);
    fwd[i] = g.slice(s, 0, hd);
  }
  s = zero_state(g, p.bwd);
  for (std::size_t i = n; i-- > 0;) {
    s = lstm_step(g, p.bwd, xs[i], s);
    bwd[i] = g.slice(s, 0, p.bwd.hidden_dim);
  }
  std::vector<Var> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Var parts[] = {fwd[i], bwd[i]};
    rows[i] = g.concat(parts);
  }
  return rows;
}

Matrix bilstm_encode(const BiLstmParams& p, const std::vector<std::vector<double>>& xs) {
  if (xs.empty()) throw ContractViolation("bilstm_encode: empty sequence");
  Graph g(GradMode::kInference);
  std::vector<Var> in;
  in.reserve(xs.size());
  for (const auto& x : xs) in.push_back(g.input(x));
  const auto rows = bilstm_encode(g, p, in);
  Matrix out(rows.size(), p.output_dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto v = g.value(rows[i]);
    std::copy(v.begin(), v.end(), out.row(i).begin());
  }
  return out;
}

Var sequence_embed(Graph& g, const Tensor& table, const BiLstmParams& p,
                   std::span<const int> ids) {
  if (ids.empty()) throw ContractViolation("sequence_embed: empty symbol sequence");
  if (table.cols() != p.fwd.input_dim) {
    throw ShapeError("sequence_embed: symbol table width does not match LSTM input");
  }
  std::vector<Var> xs;
  xs.reserve(ids.size());
  for (int id : ids) xs.push_back(g.lookup(table, static_cast<std::size_t>(id)));
  Var f = zero_state(g, p.fwd);
  for (Var x : xs) f = lstm_step(g, p.fwd, x, f);
  Var b = zero_state(g, p.bwd);
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) b = lstm_step(g, p.bwd, *it, b);
  const Var parts[] = {g.slice(f, 0, p.fwd.hidden_dim), g.slice(b, 0, p.bwd.hidden_dim)};
  return g.concat(parts);
}

}  // namespace mner
