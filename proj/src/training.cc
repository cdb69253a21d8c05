#include "mner/training.h"

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>

#include "mner/errors.h"
#include "mner/eval.h"
#include "mner/optim.h"

namespace mner {
namespace {

constexpr char kRngTag[4] = {'R', 'N', 'G', 'S'};
constexpr char kTrainerTag[4] = {'T', 'R', 'N', 'S'};

void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(std::istream& in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    const int c = in.get();
    if (c == EOF) throw LoadError("checkpoint is truncated");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

void put_f64(std::ostream& out, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u64(out, v);
}

double get_f64(std::istream& in) {
  const std::uint64_t v = get_u64(in);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

void put_vec(std::ostream& out, const std::vector<double>& v) {
  put_u64(out, v.size());
  for (double d : v) put_f64(out, d);
}

std::vector<double> get_vec(std::istream& in) {
  const auto n = get_u64(in);
  if (n > (1u << 24)) throw LoadError("corrupt checkpoint");
  std::vector<double> v(n);
  for (double& d : v) d = get_f64(in);
  return v;
}

void expect_tag(std::istream& in, const char (&tag)[4]) {
  char buf[4] = {};
  in.read(buf, 4);
  if (in.gcount() != 4 || std::memcmp(buf, tag, 4) != 0) {
    throw LoadError("checkpoint is missing its '" + std::string(tag, 4) + "' record");
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

eval::LabelSeqs gold_labels(std::span<const Sentence> sentences) {
  eval::LabelSeqs out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(s.labels());
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ContractViolation("learning rate must be >= 0");
  if (!(clip_norm > 0.0)) throw ContractViolation("clip norm must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ContractViolation("dropout must be in [0, 1)");
  if (epochs < 1) throw ContractViolation("epochs must be >= 1");
}

void save_checkpoint(const std::string& path, const TaggerModel& model,
                     const TrainerState& state) {
  namespace fs = std::filesystem;
  fs::path tmp(path);
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint '" + tmp.string() + "'");
    write_model(out, model);
    out.write(kRngTag, 4);
    put_u64(out, Rng::kAlgorithm.size());
    out.write(Rng::kAlgorithm.data(), static_cast<std::streamsize>(Rng::kAlgorithm.size()));
    put_u64(out, state.rng_state.size());
    out.write(state.rng_state.data(), static_cast<std::streamsize>(state.rng_state.size()));
    out.write(kTrainerTag, 4);
    put_u64(out, state.next_epoch);
    put_vec(out, state.report.epoch_nll);
    put_vec(out, state.report.dev_f1);
    put_vec(out, state.report.epoch_seconds);
    put_u64(out, state.report.best_epoch);
    put_f64(out, state.best_f1);
    put_u64(out, state.epochs_since_best);
    out.put(state.best_model ? 1 : 0);
    if (state.best_model) write_model(out, *state.best_model);
    if (!out) throw std::runtime_error("failed writing checkpoint");
  }
  fs::rename(tmp, path);
}

std::pair<TaggerModel, TrainerState> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open checkpoint '" + path + "'");
  TaggerModel model = read_model(in);
  TrainerState st;
  expect_tag(in, kRngTag);
  auto read_str = [&]() {
    const auto n = get_u64(in);
    if (n > (1u << 20)) throw LoadError("corrupt checkpoint");
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    if (static_cast<std::uint64_t>(in.gcount()) != n) throw LoadError("checkpoint is truncated");
    return s;
  };
  if (read_str() != Rng::kAlgorithm) throw LoadError("checkpoint uses a different RNG");
  st.rng_state = read_str();
  expect_tag(in, kTrainerTag);
  st.next_epoch = get_u64(in);
  st.report.epoch_nll = get_vec(in);
  st.report.dev_f1 = get_vec(in);
  st.report.epoch_seconds = get_vec(in);
  st.report.best_epoch = get_u64(in);
  st.best_f1 = get_f64(in);
  st.epochs_since_best = get_u64(in);
  const int has_best = in.get();
  if (has_best == EOF) throw LoadError("checkpoint is truncated");
  if (has_best == 1) st.best_model = read_model(in);
  return {std::move(model), std::move(st)};
}

TrainReport train(TaggerModel& model, std::span<const Sentence> train_set,
                  std::span<const Sentence> dev_set, const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.empty()) throw ContractViolation("train: empty training set");

  TrainerState st;
  Rng rng(cfg.seed);
  if (!cfg.resume_from.empty()) {
    auto [m, s] = load_checkpoint(cfg.resume_from);
    model = std::move(m);
    st = std::move(s);
    rng.set_state(st.rng_state);
  }
  model.config.dropout_rate = cfg.dropout;

  const bool has_dev = !dev_set.empty();
  const auto dev_gold = gold_labels(dev_set);
  auto params = model.parameters();
  std::vector<std::size_t> order(train_set.size());

  namespace fs = std::filesystem;
  if (!cfg.checkpoint_dir.empty()) fs::create_directories(cfg.checkpoint_dir);

  for (std::size_t epoch = st.next_epoch; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    double total = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      const std::size_t idx = order[k];
      Graph g(GradMode::kRecord);
      const Var loss = sentence_loss(g, model, train_set[idx], true, &rng);
      const double value = g.value(loss)[0];
      if (!std::isfinite(value)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", sentence " +
                            std::to_string(idx));
      }
      total += value;
      g.backward(loss);
      try {
        sgd_step(params, cfg.lr, cfg.clip_norm);
      } catch (const TrainingError& e) {
        throw TrainingError(std::string(e.what()) + " at epoch " + std::to_string(epoch) +
                            ", sentence " + std::to_string(idx));
      }
    }
    const double mean_nll = total / static_cast<double>(train_set.size());
    st.report.epoch_nll.push_back(mean_nll);

    double dev_f1 = std::nan("");
    bool improved = false;
    if (has_dev) {
      dev_f1 = eval::f1_score(dev_gold, tag_corpus(model, dev_set, cfg.eval_threads)).f1();
      st.report.dev_f1.push_back(dev_f1);
      if (dev_f1 > st.best_f1) {
        st.best_f1 = dev_f1;
        st.report.best_epoch = epoch;
        st.epochs_since_best = 0;
        st.best_model = model;
        improved = true;
      } else {
        ++st.epochs_since_best;
      }
    } else {
      st.report.best_epoch = epoch;
    }
    st.report.epoch_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    st.next_epoch = epoch + 1;
    st.rng_state = rng.state();

    if (cfg.log) {
      *cfg.log << "epoch=" << epoch + 1 << " nll=" << fmt(mean_nll)
               << " devF1=" << (has_dev ? fmt(dev_f1) : std::string("NA")) << '\n';
      cfg.log->flush();
    }
    if (!cfg.checkpoint_dir.empty()) {
      save_checkpoint((fs::path(cfg.checkpoint_dir) / "checkpoint.mner").string(), model, st);
      if (improved) save_model(model, (fs::path(cfg.checkpoint_dir) / "best.mner").string());
    }
    if (has_dev && dev_f1 >= cfg.target_f1) break;
    if (has_dev && cfg.patience && st.epochs_since_best >= *cfg.patience) {
      st.report.stopped_early = true;
      break;
    }
  }

  if (has_dev && st.best_model) model = *st.best_model;
  return st.report;
}

}  // namespace mner
