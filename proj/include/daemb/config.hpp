#ifndef DAEMB_CONFIG_HPP
#define DAEMB_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "daemb/encoders.hpp"
#include "daemb/kcca.hpp"

namespace daemb {

inline constexpr const char* kToolVersion = "daemb 1.0.0";

/// Resolved run configuration. Loaded from `key = value` lines grouped into
/// per-module sections; unknown sections or keys are rejected. Command-line
/// flags override file values.
struct RunConfig {
  // [run]
  std::uint64_t seed = 1;

  // [paths]
  std::string generic_embeddings;
  std::string ds_embeddings;  // prebuilt DS embedding file (align command)
  std::string corpus;    // unlabeled domain corpus (domain A)
  std::string corpus_b;  // second domain corpus, shift pipeline only
  std::string dataset;   // labeled examples, label<TAB>text
  std::string gold;      // gold lexicon, one word per line
  std::string model;     // trained model artifact
  std::string encoder_init;  // artifact supplying frozen encoder weights
  std::string out_dir = "out";

  // [embeddings]
  Index dim = 300;
  int window = 5;
  std::int64_t min_count = 1;

  // [kcca]
  double lambda = 1e-3;
  Index rank = 0;
  KernelKind kernel = KernelKind::linear;
  double sigma = 1.0;
  Index landmarks = 0;  // 0 = exact kernel

  // [encoder]
  EncoderConfig encoder;

  // [train]
  TrainMode mode = TrainMode::vanilla;
  double learning_rate = 1e-3;
  Index batch_size = 32;
  Index max_epochs = 100;
  Index patience = 5;
  std::size_t train_size = 0;  // 0 = use the whole train split
  std::array<double, 3> split_ratios = {0.8, 0.1, 0.1};

  // [shift]
  int top_n = 200;
  bool normalize = true;

  // [synth]
  int synth_docs_per_domain = 1000;
  int synth_labeled_docs = 4000;
  int synth_planted = 10;
  Index synth_dim = 50;

  CcaConfig cca_config() const;
  EncoderConfig encoder_config() const { return encoder; }
  TrainConfig train_config(int num_classes) const;

  /// Canonical `section.key = value` echo of every setting, sorted, used in
  /// reports so reruns are byte-comparable.
  std::string echo() const;
};

/// Parses and validates a config file into overrides applied over defaults.
RunConfig load_run_config(const std::string& path);

/// Raw sectioned key=value view, exposed for reuse by sidecar readers.
std::map<std::string, std::map<std::string, std::string>> parse_ini(
    const std::string& path);

}  // namespace daemb

#endif
