#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "mner/cli.h"
#include "mner/corpus.h"
#include "mner/errors.h"
#include "mner/eval.h"
#include "mner/gradcheck.h"
#include "mner/morpho.h"
#include "mner/tagger.h"
#include "mner/training.h"

namespace mner::cli {
namespace {

struct TrainFlags {
  std::string train_path;
  std::string dev_path;
  std::string embeddings_path;
  std::string model_path = "model.mner";
  std::string log_path;
  std::string scheme = "wor";
  std::string char_embeddings = "on";
  std::string fine_tune_words = "on";
  std::string iob_constraints = "off";
  bool strict_iob = false;
  std::size_t word_dim = 100;
  std::size_t char_dim = 100;
  std::size_t morph_dim = 100;
  std::size_t hidden_dim = 100;
  double lr = 0.01;
  double dropout = 0.5;
  double clip = 5.0;
  std::size_t epochs = 100;
  std::uint64_t seed = 1;
  std::size_t patience = 0;
  std::string checkpoint_dir;
  std::string resume;
  unsigned threads = 0;
};

struct TagFlags {
  std::string model_path;
  std::string input_path;
  std::string output_path;
  unsigned threads = 0;
};

struct EvalFlags {
  std::string gold_path;
  std::string pred_path;
  std::string format = "table";
};

struct CompareFlags {
  std::string gold_path;
  std::string pred_a;
  std::string pred_b;
  std::string unit = "token";
};

struct GradcheckFlags {
  std::uint64_t seed = 1;
  double epsilon = 1e-5;
  double tolerance = 1e-4;
};

const std::vector<std::string> kSchemes = {"wr", "wor", "wr_adb", "char", "none"};
const std::vector<std::string> kOnOff = {"on", "off"};

// Labels to score from a file written by `tag` (4th column) or any 3-column file.
eval::LabelSeqs read_labels(const std::string& path, bool prefer_predicted) {
  LoadOptions opts;
  opts.accept_predictions = true;
  opts.labels_optional = prefer_predicted;
  const auto sentences = load_corpus(path, opts);
  eval::LabelSeqs out;
  for (const auto& s : sentences) {
    std::vector<std::string> labels;
    for (const auto& t : s.tokens) {
      const std::string& l = (prefer_predicted && !t.predicted.empty()) ? t.predicted : t.label;
      if (l.empty()) throw FormatError(path + ": token '" + t.surface + "' has no label");
      labels.push_back(l);
    }
    out.push_back(std::move(labels));
  }
  return out;
}

// Names the first sentence where the two label sets stop lining up.
void check_alignment(const eval::LabelSeqs& gold, const eval::LabelSeqs& pred,
                     const std::string& pred_path) {
  const std::size_t n = std::min(gold.size(), pred.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (gold[i].size() != pred[i].size()) {
      throw FormatError(pred_path + ": misaligned with gold at sentence " + std::to_string(i) +
                        " (" + std::to_string(gold[i].size()) + " vs " +
                        std::to_string(pred[i].size()) + " tokens)");
    }
  }
  if (gold.size() != pred.size()) {
    throw FormatError(pred_path + ": misaligned with gold at sentence " + std::to_string(n) +
                      " (" + std::to_string(gold.size()) + " vs " + std::to_string(pred.size()) +
                      " sentences)");
  }
}

int cmd_train(const TrainFlags& f, std::ostream& out, std::ostream& err) {
  CorpusStats stats;
  LoadOptions opts;
  opts.strict_iob = f.strict_iob;
  const auto train_set = load_corpus(f.train_path, opts, &stats);
  if (train_set.empty()) {
    err << "error: training corpus '" << f.train_path << "' has no sentences\n";
    return 1;
  }
  std::vector<Sentence> dev_set;
  if (!f.dev_path.empty()) dev_set = load_corpus(f.dev_path, opts);

  TaggerConfig cfg;
  cfg.word_dim = f.word_dim;
  cfg.char_dim = f.char_dim;
  cfg.morph_dim = f.morph_dim;
  cfg.hidden_dim = f.hidden_dim;
  cfg.use_char = f.char_embeddings == "on";
  cfg.morph_scheme = f.scheme == "none" ? std::nullopt : morpho::parse_scheme(f.scheme);
  cfg.dropout_rate = f.dropout;
  cfg.seed = f.seed;
  cfg.fine_tune_words = f.fine_tune_words == "on";
  cfg.constrained_decoding = f.iob_constraints == "on";

  std::optional<EmbeddingTable> pretrained;
  if (!f.embeddings_path.empty()) {
    pretrained = load_embeddings(f.embeddings_path, f.word_dim);
    if (pretrained->duplicates > 0) {
      err << "warning: " << pretrained->duplicates << " duplicate embedding rows (last wins)\n";
    }
  }
  Rng init_rng(f.seed);
  TaggerModel model = TaggerModel::create(cfg, build_vocabs(train_set, cfg.morph_scheme),
                                          pretrained ? &*pretrained : nullptr, init_rng);

  const std::string log_path = f.log_path.empty() ? f.model_path + ".log" : f.log_path;
  std::ofstream log(log_path);
  if (!log) {
    err << "error: cannot write training log '" << log_path << "'\n";
    return 1;
  }
  TrainConfig tc;
  tc.lr = f.lr;
  tc.clip_norm = f.clip;
  tc.dropout = f.dropout;
  tc.epochs = f.epochs;
  tc.seed = f.seed;
  if (f.patience > 0) tc.patience = f.patience;
  tc.checkpoint_dir = f.checkpoint_dir;
  tc.resume_from = f.resume;
  tc.eval_threads = f.threads;
  tc.log = &log;

  out << "sentences=" << stats.sentences << " tokens=" << stats.tokens
      << " iob_repairs=" << stats.iob_repairs << " token_dim=" << cfg.token_dim()
      << " labels=" << model.num_tags() << '\n';
  const TrainReport report = train(model, train_set, dev_set, tc);
  save_model(model, f.model_path);
  out << "epochs=" << report.epoch_nll.size() << " best_epoch=" << report.best_epoch + 1
      << " final_nll=" << report.epoch_nll.back() << " model=" << f.model_path << '\n';
  return 0;
}

int cmd_tag(const TagFlags& f, std::ostream& out, std::ostream& err) {
  const TaggerModel model = load_model(f.model_path);
  LoadOptions opts;
  opts.labels_optional = true;
  const auto sentences = load_corpus(f.input_path, opts);
  const auto predictions = tag_corpus(model, sentences, f.threads);
  if (f.output_path.empty()) {
    write_corpus(out, sentences, &predictions);
    return 0;
  }
  std::ofstream file(f.output_path);
  if (!file) {
    err << "error: cannot write '" << f.output_path << "'\n";
    return 1;
  }
  write_corpus(file, sentences, &predictions);
  return 0;
}

int cmd_eval(const EvalFlags& f, std::ostream& out) {
  const auto gold = read_labels(f.gold_path, false);
  const auto pred = read_labels(f.pred_path, true);
  check_alignment(gold, pred, f.pred_path);
  const auto result = eval::f1_score(gold, pred);
  out << (f.format == "records" ? eval::format_records(result) : eval::format_table(result));
  return 0;
}

int cmd_compare(const CompareFlags& f, std::ostream& out) {
  const auto gold = read_labels(f.gold_path, false);
  const auto a = read_labels(f.pred_a, true);
  const auto b = read_labels(f.pred_b, true);
  check_alignment(gold, a, f.pred_a);
  check_alignment(gold, b, f.pred_b);
  const auto unit = f.unit == "entity" ? eval::McNemarUnit::kEntity : eval::McNemarUnit::kToken;
  const auto ra = eval::f1_score(gold, a);
  const auto rb = eval::f1_score(gold, b);
  char buf[128];
  std::snprintf(buf, sizeof buf, "F1 A=%.2f B=%.2f unit=%s\n", 100.0 * ra.f1(), 100.0 * rb.f1(),
                f.unit.c_str());
  out << buf << eval::format_mcnemar(eval::mcnemar(gold, a, b, unit));
  return 0;
}

int cmd_gradcheck(const GradcheckFlags& f, std::ostream& out) {
  auto fx = make_gradcheck_fixture(f.seed);
  const auto report = gradient_check(fx.model, fx.sentences, f.epsilon, f.tolerance);
  char buf[160];
  for (const auto& g : report.groups) {
    std::snprintf(buf, sizeof buf, "%-28s entries=%-4zu max_rel_error=%.3e\n", g.name.c_str(),
                  g.checked, g.max_rel_error);
    out << buf;
  }
  out << (report.passed ? "PASS" : "FAIL") << " tolerance=" << report.tolerance << '\n';
  return report.passed ? 0 : 1;
}

int cmd_inspect_morpho(const std::string& raw, std::ostream& out) {
  const auto a = morpho::parse_analysis(raw);
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + v[i];
    return s;
  };
  out << "root: " << a.root << '\n';
  out << "groups:";
  for (std::size_t g = 0; g < a.groups.size(); ++g) {
    out << (g ? " | " : " ") << join(a.groups[g]);
  }
  out << '\n';
  out << "WR: " << join(morpho::project(a, morpho::Scheme::kWR)) << '\n';
  out << "WOR: " << join(morpho::project(a, morpho::Scheme::kWOR)) << '\n';
  out << "WR_ADB: " << join(morpho::project(a, morpho::Scheme::kWRADB)) << '\n';
  out << "CHAR: " << join(morpho::project(a, morpho::Scheme::kChar)) << '\n';
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bi-LSTM-CRF named entity tagger with morphological embeddings", "mner"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read flag values from a TOML/INI file; command-line flags win");
  app.option_defaults()->always_capture_default();

  TrainFlags tf;
  auto* train = app.add_subcommand("train", "Train a model on a 3-column corpus");
  train->add_option("--train", tf.train_path, "Training corpus")->required();
  train->add_option("--dev", tf.dev_path, "Development corpus for model selection");
  train->add_option("--embeddings", tf.embeddings_path, "Pretrained word vectors (text format)");
  train->add_option("--model", tf.model_path, "Output model file");
  train->add_option("--log", tf.log_path, "Training log (default: <model>.log)");
  train->add_option("--scheme", tf.scheme, "Morphological embedding scheme")
      ->transform(CLI::IsMember(kSchemes, CLI::ignore_case));
  train->add_option("--char-embeddings", tf.char_embeddings, "Character embeddings")
      ->check(CLI::IsMember(kOnOff));
  train->add_option("--fine-tune-words", tf.fine_tune_words, "Update word vectors while training")
      ->check(CLI::IsMember(kOnOff));
  train->add_option("--iob-constraints", tf.iob_constraints, "Forbid invalid IOB2 transitions when decoding")
      ->check(CLI::IsMember(kOnOff));
  train->add_flag("--strict-iob", tf.strict_iob, "Reject IOB1-style labels instead of normalizing");
  train->add_option("--word-dim", tf.word_dim, "Word embedding size d_w")->check(CLI::PositiveNumber);
  train->add_option("--char-dim", tf.char_dim, "Character LSTM size d_c per direction")->check(CLI::PositiveNumber);
  train->add_option("--morph-dim", tf.morph_dim, "Morphological LSTM size d_m per direction")->check(CLI::PositiveNumber);
  train->add_option("--hidden-dim", tf.hidden_dim, "Sentence LSTM size p per direction")->check(CLI::PositiveNumber);
  train->add_option("--lr", tf.lr, "SGD learning rate")->check(CLI::NonNegativeNumber);
  train->add_option("--dropout", tf.dropout, "Input dropout probability")->check(CLI::Range(0.0, 0.999999));
  train->add_option("--clip", tf.clip, "Global gradient-norm clipping threshold")->check(CLI::PositiveNumber);
  train->add_option("--epochs", tf.epochs, "Number of epochs")->check(CLI::PositiveNumber);
  train->add_option("--seed", tf.seed, "Random seed");
  train->add_option("--patience", tf.patience, "Early-stopping patience in epochs (0 = off)");
  train->add_option("--checkpoint-dir", tf.checkpoint_dir, "Directory for per-epoch checkpoints");
  train->add_option("--resume", tf.resume, "Checkpoint to resume from");
  train->add_option("--threads", tf.threads, "Dev evaluation threads (0 = all cores)");

  TagFlags tg;
  auto* tag_cmd = app.add_subcommand("tag", "Append predicted labels to a corpus");
  tag_cmd->add_option("--model", tg.model_path, "Model file")->required();
  tag_cmd->add_option("--input", tg.input_path, "Corpus with 2 or 3 columns")->required();
  tag_cmd->add_option("--output", tg.output_path, "Output file (default: stdout)");
  tag_cmd->add_option("--threads", tg.threads, "Tagging threads (0 = all cores)");

  EvalFlags ef;
  auto* eval_cmd = app.add_subcommand("eval", "Entity-level precision, recall and F1");
  eval_cmd->add_option("--gold", ef.gold_path, "Gold corpus")->required();
  eval_cmd->add_option("--pred", ef.pred_path, "Predicted corpus (output of tag)")->required();
  eval_cmd->add_option("--format", ef.format, "Output format")
      ->check(CLI::IsMember({"table", "records"}));

  CompareFlags cf;
  auto* compare = app.add_subcommand("compare", "McNemar's test between two taggers");
  compare->add_option("--gold", cf.gold_path, "Gold corpus")->required();
  compare->add_option("--pred-a", cf.pred_a, "Predictions of system A")->required();
  compare->add_option("--pred-b", cf.pred_b, "Predictions of system B")->required();
  compare->add_option("--unit", cf.unit, "Correctness unit")->check(CLI::IsMember({"token", "entity"}));

  GradcheckFlags gf;
  auto* gradcheck = app.add_subcommand("gradcheck", "Check gradients against finite differences");
  gradcheck->add_option("--seed", gf.seed, "Seed for the random test model");
  gradcheck->add_option("--epsilon", gf.epsilon, "Finite-difference step")->check(CLI::PositiveNumber);
  gradcheck->add_option("--tolerance", gf.tolerance, "Maximum relative error")->check(CLI::PositiveNumber);

  std::string analysis;
  auto* inspect = app.add_subcommand("inspect-morpho", "Show the projections of an analysis");
  inspect->add_option("--analysis", analysis, "Analysis string, e.g. ev+Noun+A3pl+P3sg+Loc")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*train) return cmd_train(tf, out, err);
    if (*tag_cmd) return cmd_tag(tg, out, err);
    if (*eval_cmd) return cmd_eval(ef, out);
    if (*compare) return cmd_compare(cf, out);
    if (*gradcheck) return cmd_gradcheck(gf, out);
    if (*inspect) {
      if (analysis.empty()) {
        err << "usage error: --analysis must be a non-empty analysis string\n";
        return 2;
      }
      return cmd_inspect_morpho(analysis, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace mner::cli
