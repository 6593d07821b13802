#include "daemb/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "daemb/adaptation.hpp"

namespace daemb {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string fmt(const char* spec, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << body;
  if (!out) throw std::runtime_error("write failed: " + path);
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void require(const std::string& value, const char* key) {
  if (value.empty()) {
    throw std::runtime_error(std::string("missing required config value: ") + key);
  }
}

// DS embedding from a raw corpus file, with the documented dimension clamp.
EmbeddingMatrix ds_from_corpus(const std::string& path, const RunConfig& cfg,
                               Rng& rng, std::string* warnings) {
  const auto docs = load_corpus(path);
  const Vocabulary vocab = build_vocab(docs, cfg.min_count);
  Index dim = cfg.dim;
  if (dim > vocab.size()) {
    if (warnings) {
      *warnings += "dim " + std::to_string(dim) + " clamped to vocabulary size " +
                   std::to_string(vocab.size()) + "\n";
    }
    dim = vocab.size();
  }
  return build_ds_embeddings(docs, vocab, dim, cfg.window, rng);
}

std::string metrics_line(const char* split, const Metrics& m) {
  std::ostringstream out;
  out << split << ": accuracy=" << fmt("%.6f", m.accuracy)
      << " micro_f=" << fmt("%.6f", m.micro_f) << "\n";
  return out.str();
}

}  // namespace

BuildDsOutputs cmd_build_ds(const RunConfig& cfg) {
  require(cfg.corpus, "paths.corpus");
  fs::create_directories(cfg.out_dir);

  std::string warnings;
  Rng rng(cfg.seed);
  const EmbeddingMatrix ds = ds_from_corpus(cfg.corpus, cfg, rng, &warnings);

  BuildDsOutputs out;
  out.embeddings = cfg.out_dir + "/ds_embeddings.txt";
  out.sidecar = cfg.out_dir + "/ds_embeddings.meta";
  save_embeddings(ds, out.embeddings);

  std::ostringstream meta;
  meta << "daemb ds embedding build\n"
       << "version: " << kToolVersion << "\n"
       << "corpus: " << cfg.corpus << "\n"
       << "vocab: " << ds.vocab.size() << "\n"
       << "dim: " << ds.dim() << "\n"
       << "window: " << cfg.window << "\n"
       << "min_count: " << cfg.min_count << "\n"
       << "seed: " << cfg.seed << "\n";
  if (!warnings.empty()) meta << "warnings:\n" << warnings;
  write_text(out.sidecar, meta.str());
  return out;
}

AlignOutputs cmd_align(const RunConfig& cfg) {
  require(cfg.generic_embeddings, "paths.generic_embeddings");
  require(cfg.ds_embeddings, "paths.ds_embeddings");
  fs::create_directories(cfg.out_dir);

  const EmbeddingMatrix generic = load_pretrained(cfg.generic_embeddings);
  EmbeddingMatrix ds = load_pretrained(cfg.ds_embeddings);
  ds.role = EmbeddingRole::domain_specific;

  CcaModel model;
  const AlignedPairs pairs = align_generic_ds(generic, ds, cfg.cca_config(), &model);

  AlignOutputs out;
  out.correlations = model.correlations;
  out.view_a = cfg.out_dir + "/aligned_generic.txt";
  out.view_b = cfg.out_dir + "/aligned_ds.txt";
  out.header = cfg.out_dir + "/align_header.txt";

  EmbeddingMatrix view;
  view.vocab = pairs.vocab;
  view.role = EmbeddingRole::projected;
  view.vectors = pairs.xbar;
  save_embeddings(view, out.view_a);
  view.vectors = pairs.ybar;
  save_embeddings(view, out.view_b);

  std::ostringstream header;
  header << "daemb kcca alignment\n"
         << "version: " << kToolVersion << "\n"
         << "generic: " << cfg.generic_embeddings << "\n"
         << "ds: " << cfg.ds_embeddings << "\n"
         << "pairs: " << pairs.vocab.size() << "\n"
         << "rank: " << model.rank() << "\n"
         << "lambda: " << fmt("%.17g", cfg.lambda) << "\n"
         << "kernel: " << (cfg.kernel == KernelKind::linear ? "linear" : "gaussian")
         << "\n"
         << "correlations:";
  for (Index i = 0; i < model.correlations.size(); ++i) {
    header << " " << fmt("%.9g", model.correlations(i));
  }
  header << "\n";
  write_text(out.header, header.str());
  return out;
}

namespace {

struct PreparedTraining {
  Splits splits;
  EmbeddingInput input;
  int num_classes = 0;
};

// The same preparation backs cmd_train and cmd_eval so an artifact can be
// re-evaluated against inputs rebuilt deterministically from the config.
PreparedTraining prepare_training(const RunConfig& cfg, TrainMode mode) {
  require(cfg.dataset, "paths.dataset");
  require(cfg.generic_embeddings, "paths.generic_embeddings");

  PreparedTraining prep;
  const Dataset ds = load_labeled(cfg.dataset);
  if (ds.labels.size() < 2) {
    throw std::runtime_error("dataset has fewer than 2 classes: " + cfg.dataset);
  }
  prep.num_classes = static_cast<int>(ds.labels.size());
  prep.splits = split(ds, cfg.split_ratios, cfg.seed);
  if (cfg.train_size > 0) {
    prep.splits.train = subsample_train(prep.splits.train, cfg.train_size, cfg.seed);
  }

  if (mode == TrainMode::vanilla) {
    const EmbeddingMatrix generic = load_pretrained(cfg.generic_embeddings);
    prep.input = EmbeddingInput::from(generic, cfg.generic_embeddings);
  } else {
    require(cfg.corpus, "paths.corpus");
    Rng rng(cfg.seed);
    const EmbeddingMatrix ds_emb = ds_from_corpus(cfg.corpus, cfg, rng, nullptr);
    const EmbeddingMatrix generic = load_pretrained(cfg.generic_embeddings);
    const AlignedPairs pairs = align_generic_ds(generic, ds_emb, cfg.cca_config());
    prep.input = EmbeddingInput::from(
        pairs, cfg.generic_embeddings + " + " + cfg.corpus + " (kcca aligned)");
  }
  return prep;
}

}  // namespace

TrainOutputs cmd_train(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  const auto started = Clock::now();

  PreparedTraining prep = prepare_training(cfg, cfg.mode);
  const TrainConfig tcfg = cfg.train_config(prep.num_classes);

  const TrainedModel* init = nullptr;
  TrainedModel init_model;
  if (!cfg.encoder_init.empty()) {
    init_model = load_model(cfg.encoder_init);
    init = &init_model;
  }
  const double prep_seconds = seconds_since(started);

  const auto train_started = Clock::now();
  TrainedModel model =
      train(prep.splits.train, prep.splits.dev, prep.input, cfg.encoder, tcfg, init);
  const double train_seconds = seconds_since(train_started);

  TrainOutputs out;
  out.model = model;
  out.test_metrics = evaluate(model, prep.input, prep.splits.test);
  const Metrics train_metrics = evaluate(model, prep.input, prep.splits.train);
  const Metrics dev_metrics = evaluate(model, prep.input, prep.splits.dev);

  out.model_path = cfg.out_dir + "/model.daemb";
  save_model(model, out.model_path);

  std::ostringstream report;
  report << "daemb training report\n"
         << "version: " << kToolVersion << "\n"
         << "config:\n"
         << cfg.echo()
         << "dataset: " << cfg.dataset << "\n"
         << "classes:";
  for (const auto& name : model.class_names) report << " " << name;
  report << "\n"
         << "sizes: train=" << prep.splits.train.size()
         << " dev=" << prep.splits.dev.size()
         << " test=" << prep.splits.test.size() << "\n"
         << metrics_line("train", train_metrics)
         << metrics_line("dev", dev_metrics)
         << metrics_line("test", out.test_metrics);
  if (model.has_adapt) {
    report << "alpha: " << fmt("%.6f", model.adapt.alpha) << "\n"
           << "beta: " << fmt("%.6f", model.adapt.beta) << "\n";
  }
  report << "epochs_run: " << model.history.size() << "\n";
  double best_dev = 0.0;
  for (const auto& h : model.history) best_dev = std::max(best_dev, h.dev_acc);
  report << "best_dev_accuracy: " << fmt("%.6f", best_dev) << "\n";

  out.report = cfg.out_dir + "/train_report.txt";
  write_text(out.report, report.str());

  out.timing_sidecar = cfg.out_dir + "/train_report.timing.txt";
  std::ostringstream timing;
  timing << "prepare_seconds: " << prep_seconds << "\n"
         << "train_seconds: " << train_seconds << "\n"
         << "total_seconds: " << seconds_since(started) << "\n";
  write_text(out.timing_sidecar, timing.str());
  return out;
}

EvalOutputs cmd_eval(const RunConfig& cfg) {
  require(cfg.model, "paths.model");
  require(cfg.dataset, "paths.dataset");
  fs::create_directories(cfg.out_dir);

  const TrainedModel model = load_model(cfg.model);
  PreparedTraining prep = prepare_training(cfg, model.cfg.mode);

  // Evaluate on the full dataset file, remapped onto the model's classes.
  Dataset data = load_labeled(cfg.dataset);
  for (auto& doc : data.docs) {
    const std::string& name = data.labels[doc.label];
    const auto it = std::find(model.class_names.begin(), model.class_names.end(), name);
    if (it == model.class_names.end()) {
      throw std::runtime_error("eval: label '" + name + "' unknown to the model");
    }
    doc.label = static_cast<int>(it - model.class_names.begin());
  }
  data.labels = model.class_names;

  EvalOutputs out;
  out.metrics = evaluate(model, prep.input, data);

  std::ostringstream report;
  report << "daemb evaluation report\n"
         << "version: " << kToolVersion << "\n"
         << "model: " << cfg.model << "\n"
         << "dataset: " << cfg.dataset << " (" << data.size() << " examples)\n"
         << metrics_line("eval", out.metrics);
  for (std::size_t c = 0; c < model.class_names.size(); ++c) {
    report << "class " << model.class_names[c]
           << ": precision=" << fmt("%.6f", out.metrics.precision[c])
           << " recall=" << fmt("%.6f", out.metrics.recall[c]) << "\n";
  }
  out.report = cfg.out_dir + "/eval_report.txt";
  write_text(out.report, report.str());
  return out;
}

ShiftOutputs cmd_shift(const RunConfig& cfg) {
  require(cfg.corpus, "paths.corpus");
  require(cfg.corpus_b, "paths.corpus_b");
  require(cfg.generic_embeddings, "paths.generic_embeddings");
  require(cfg.gold, "paths.gold");
  fs::create_directories(cfg.out_dir);

  const EmbeddingMatrix generic = load_pretrained(cfg.generic_embeddings);
  const std::set<std::string> gold = load_gold_lexicon(cfg.gold);

  // The fixed 0.5 mix unless a trained model supplies learned weights.
  AdaptationParams mix;
  if (!cfg.model.empty()) {
    const TrainedModel model = load_model(cfg.model);
    if (!model.has_adapt) {
      throw std::runtime_error("shift: model artifact carries no adaptation weights");
    }
    mix = model.adapt;
  }

  Rng rng(cfg.seed);
  Rng rng_b = rng.fork(2);
  const EmbeddingMatrix ds_a = ds_from_corpus(cfg.corpus, cfg, rng, nullptr);
  const EmbeddingMatrix ds_b = ds_from_corpus(cfg.corpus_b, cfg, rng_b, nullptr);

  const CcaConfig cca = cfg.cca_config();
  const EmbeddingMatrix da_a = adapt_matrix(mix, align_generic_ds(generic, ds_a, cca));
  const EmbeddingMatrix da_b = adapt_matrix(mix, align_generic_ds(generic, ds_b, cca));

  const Vocabulary common = common_vocab(da_a.vocab, da_b.vocab);
  const AlignedPairs crossed = cross_domain_align(da_a, da_b, common, cca);

  ShiftOutputs out;
  out.report = shift_scores(crossed, cfg.normalize, cfg.lambda);
  const int top_n = std::min<int>(cfg.top_n, static_cast<int>(out.report.size()));
  out.significance = significance_report(out.report, gold, top_n);

  std::ostringstream csv;
  csv << "rank,word,psi,in_gold\n";
  for (std::size_t i = 0; i < out.report.size(); ++i) {
    const auto& [word, psi] = out.report.scores[i];
    csv << (i + 1) << "," << word << "," << fmt("%.9g", psi) << ","
        << (gold.count(word) > 0 ? 1 : 0) << "\n";
  }
  out.csv = cfg.out_dir + "/shift_report.csv";
  write_text(out.csv, csv.str());

  std::ostringstream sig;
  const auto& s = out.significance;
  sig << "daemb shift significance\n"
      << "version: " << kToolVersion << "\n"
      << "alpha: " << fmt("%.6f", mix.alpha) << "\n"
      << "beta: " << fmt("%.6f", mix.beta) << "\n"
      << "normalized: " << (cfg.normalize ? "true" : "false") << "\n"
      << "V: " << s.params.population << "\n"
      << "K: " << s.params.successes << "\n"
      << "n: " << s.params.draws << "\n"
      << "k: " << s.params.observed << "\n"
      << "mean: " << fmt("%.6g", s.mean) << "\n"
      << "stddev: " << fmt("%.6g", s.stddev) << "\n"
      << "pmf: " << fmt("%.6g", s.pmf_at_k) << "\n"
      << "p_value: " << fmt("%.6g", s.p_value) << "\n"
      << "verdict: " << s.verdict << "\n";
  out.significance_path = cfg.out_dir + "/significance.txt";
  write_text(out.significance_path, sig.str());
  return out;
}

SignificanceReport cmd_hypergeom(std::int64_t population, std::int64_t successes,
                                 std::int64_t draws, std::int64_t observed,
                                 std::ostream& out) {
  HypergeomParams params{population, successes, draws, observed};
  const SignificanceReport report = significance_from_params(params);
  out << "V=" << population << " K=" << successes << " n=" << draws
      << " k=" << observed << "\n"
      << "mean: " << fmt("%.6g", report.mean) << "\n"
      << "stddev: " << fmt("%.6g", report.stddev) << "\n"
      << "pmf: " << fmt("%.6g", report.pmf_at_k) << "\n"
      << "p_value: " << fmt("%.6g", report.p_value) << "\n"
      << "verdict: " << report.verdict << "\n";
  return report;
}

SynthPaths cmd_synth(const RunConfig& cfg) {
  SynthConfig scfg;
  scfg.seed = cfg.seed;
  scfg.docs_per_domain = cfg.synth_docs_per_domain;
  scfg.labeled_docs = cfg.synth_labeled_docs;
  scfg.planted = cfg.synth_planted;
  scfg.dim = cfg.synth_dim;
  const SynthData data = generate_synth(scfg);
  return write_synth(data, scfg, cfg.out_dir);
}

}  // namespace daemb
