#pragma once
// Per-sentence SGD training with shuffling, clipping, dev-set model
// selection and resumable checkpoints.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mner/corpus.h"
#include "mner/rng.h"
#include "mner/tagger.h"

namespace mner {

struct TrainConfig {
  double lr = 0.01;
  double clip_norm = 5.0;
  double dropout = 0.5;
  std::size_t epochs = 100;
  std::uint64_t seed = 1;
  // Stop after this many epochs without a dev F1 improvement.
  std::optional<std::size_t> patience;
  // When set: "checkpoint.mner" is rewritten after every epoch and
  // "best.mner" whenever dev F1 improves.
  std::string checkpoint_dir;
  // Resume from a checkpoint written by an earlier run.
  std::string resume_from;
  // Stop once dev F1 reaches this value (disabled when > 1).
  double target_f1 = 2.0;
  // Workers for dev evaluation; 0 = hardware concurrency.
  unsigned eval_threads = 0;
  // Receives "epoch=<e> nll=<v> devF1=<v>" lines; may be null.
  std::ostream* log = nullptr;

  void validate() const;
};

struct TrainReport {
  std::vector<double> epoch_nll;      // mean training NLL per epoch
  std::vector<double> dev_f1;         // empty without a dev set
  std::vector<double> epoch_seconds;
  std::size_t best_epoch = 0;         // 0-based
  bool stopped_early = false;
};

// Trains `model` in place. With a dev set the returned model is the
// best-dev-F1 snapshot; otherwise it is the state after the last epoch.
// Throws TrainingError on a non-finite loss or gradient.
TrainReport train(TaggerModel& model, std::span<const Sentence> train_set,
                  std::span<const Sentence> dev_set, const TrainConfig& cfg);

// Trainer state carried by checkpoints.
struct TrainerState {
  std::size_t next_epoch = 0;
  std::string rng_state;
  TrainReport report;
  double best_f1 = -1.0;
  std::size_t epochs_since_best = 0;
  std::optional<TaggerModel> best_model;
};

// A checkpoint is a model file followed by an RNG-state record and the
// trainer state; load_model() on it yields the current model.
void save_checkpoint(const std::string& path, const TaggerModel& model,
                     const TrainerState& state);
std::pair<TaggerModel, TrainerState> load_checkpoint(const std::string& path);

}  // namespace mner
