#include "daemb/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace daemb {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "run.seed",
      "paths.generic_embeddings",
      "paths.ds_embeddings",
      "paths.corpus",
      "paths.corpus_b",
      "paths.dataset",
      "paths.gold",
      "paths.model",
      "paths.encoder_init",
      "paths.out_dir",
      "embeddings.dim",
      "embeddings.window",
      "embeddings.min_count",
      "kcca.lambda",
      "kcca.rank",
      "kcca.kernel",
      "kcca.sigma",
      "kcca.landmarks",
      "encoder.kind",
      "encoder.sentence_dim",
      "encoder.cnn_widths",
      "encoder.cnn_maps",
      "encoder.bilstm_hidden",
      "encoder.dropout",
      "encoder.max_seq_len",
      "train.mode",
      "train.learning_rate",
      "train.batch_size",
      "train.max_epochs",
      "train.patience",
      "train.train_size",
      "train.split_ratios",
      "shift.top_n",
      "shift.normalize",
      "synth.docs_per_domain",
      "synth.labeled_docs",
      "synth.planted",
      "synth.dim",
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::int64_t to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const std::int64_t v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config: key '" + key + "' expects an integer, got '" +
                             value + "'");
  }
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config: key '" + key + "' expects a number, got '" +
                             value + "'");
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw std::runtime_error("config: key '" + key + "' expects a boolean, got '" +
                           value + "'");
}

std::vector<std::int64_t> to_int_list(const std::string& key,
                                      const std::string& value) {
  std::vector<std::int64_t> out;
  std::stringstream ss(value);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(to_int(key, trim(field)));
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::map<std::string, std::map<std::string, std::string>> parse_ini(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::map<std::string, std::map<std::string, std::string>> out;
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#' || text[0] == ';') continue;
    if (text.front() == '[') {
      if (text.back() != ']') {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": malformed section header");
      }
      section = trim(text.substr(1, text.size() - 2));
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected key = value");
    }
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty key");
    }
    out[section][key] = value;
  }
  return out;
}

CcaConfig RunConfig::cca_config() const {
  CcaConfig cfg;
  cfg.lambda = lambda;
  cfg.rank = rank;
  cfg.kernel = kernel;
  cfg.sigma = sigma;
  if (landmarks > 0) cfg.nystrom_landmarks = landmarks;
  return cfg;
}

TrainConfig RunConfig::train_config(int num_classes) const {
  TrainConfig cfg;
  cfg.mode = mode;
  cfg.learning_rate = learning_rate;
  cfg.batch_size = batch_size;
  cfg.max_epochs = max_epochs;
  cfg.patience = patience;
  cfg.seed = seed;
  cfg.num_classes = num_classes;
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  RunConfig cfg;
  const auto sections = parse_ini(path);

  for (const auto& [section, entries] : sections) {
    for (const auto& [key, value] : entries) {
      const std::string full = section + "." + key;
      if (known_keys().count(full) == 0) {
        throw std::runtime_error("config: unknown key '" + full + "'");
      }
      if (full == "run.seed") cfg.seed = static_cast<std::uint64_t>(to_int(full, value));
      else if (full == "paths.generic_embeddings") cfg.generic_embeddings = value;
      else if (full == "paths.ds_embeddings") cfg.ds_embeddings = value;
      else if (full == "paths.corpus") cfg.corpus = value;
      else if (full == "paths.corpus_b") cfg.corpus_b = value;
      else if (full == "paths.dataset") cfg.dataset = value;
      else if (full == "paths.gold") cfg.gold = value;
      else if (full == "paths.model") cfg.model = value;
      else if (full == "paths.encoder_init") cfg.encoder_init = value;
      else if (full == "paths.out_dir") cfg.out_dir = value;
      else if (full == "embeddings.dim") cfg.dim = to_int(full, value);
      else if (full == "embeddings.window") cfg.window = static_cast<int>(to_int(full, value));
      else if (full == "embeddings.min_count") cfg.min_count = to_int(full, value);
      else if (full == "kcca.lambda") cfg.lambda = to_double(full, value);
      else if (full == "kcca.rank") cfg.rank = to_int(full, value);
      else if (full == "kcca.kernel") {
        if (value == "linear") cfg.kernel = KernelKind::linear;
        else if (value == "gaussian") cfg.kernel = KernelKind::gaussian;
        else throw std::runtime_error("config: kernel must be linear or gaussian");
      }
      else if (full == "kcca.sigma") cfg.sigma = to_double(full, value);
      else if (full == "kcca.landmarks") cfg.landmarks = to_int(full, value);
      else if (full == "encoder.kind") {
        if (value == "bow") cfg.encoder.kind = EncoderKind::bow;
        else if (value == "cnn") cfg.encoder.kind = EncoderKind::cnn;
        else if (value == "bilstm") cfg.encoder.kind = EncoderKind::bilstm;
        else throw std::runtime_error("config: encoder kind must be bow, cnn or bilstm");
      }
      else if (full == "encoder.sentence_dim") cfg.encoder.sentence_dim = to_int(full, value);
      else if (full == "encoder.cnn_widths") {
        cfg.encoder.cnn_widths.clear();
        for (auto v : to_int_list(full, value)) cfg.encoder.cnn_widths.push_back(v);
      }
      else if (full == "encoder.cnn_maps") {
        cfg.encoder.cnn_maps.clear();
        for (auto v : to_int_list(full, value)) cfg.encoder.cnn_maps.push_back(v);
      }
      else if (full == "encoder.bilstm_hidden") cfg.encoder.bilstm_hidden = to_int(full, value);
      else if (full == "encoder.dropout") cfg.encoder.dropout = to_double(full, value);
      else if (full == "encoder.max_seq_len") cfg.encoder.max_seq_len = to_int(full, value);
      else if (full == "train.mode") {
        if (value == "vanilla") cfg.mode = TrainMode::vanilla;
        else if (value == "adapt-only" || value == "adapt_only") cfg.mode = TrainMode::adapt_only;
        else if (value == "end-to-end" || value == "end_to_end") cfg.mode = TrainMode::end_to_end;
        else throw std::runtime_error(
            "config: mode must be vanilla, adapt-only or end-to-end");
      }
      else if (full == "train.learning_rate") cfg.learning_rate = to_double(full, value);
      else if (full == "train.batch_size") cfg.batch_size = to_int(full, value);
      else if (full == "train.max_epochs") cfg.max_epochs = to_int(full, value);
      else if (full == "train.patience") cfg.patience = to_int(full, value);
      else if (full == "train.train_size") cfg.train_size = static_cast<std::size_t>(to_int(full, value));
      else if (full == "train.split_ratios") {
        std::vector<double> r;
        std::stringstream ss(value);
        std::string field;
        while (std::getline(ss, field, ',')) r.push_back(to_double(full, trim(field)));
        if (r.size() != 3) throw std::runtime_error("config: split_ratios needs 3 values");
        cfg.split_ratios = {r[0], r[1], r[2]};
      }
      else if (full == "shift.top_n") cfg.top_n = static_cast<int>(to_int(full, value));
      else if (full == "shift.normalize") cfg.normalize = to_bool(full, value);
      else if (full == "synth.docs_per_domain") cfg.synth_docs_per_domain = static_cast<int>(to_int(full, value));
      else if (full == "synth.labeled_docs") cfg.synth_labeled_docs = static_cast<int>(to_int(full, value));
      else if (full == "synth.planted") cfg.synth_planted = static_cast<int>(to_int(full, value));
      else if (full == "synth.dim") cfg.synth_dim = to_int(full, value);
    }
  }
  return cfg;
}

std::string RunConfig::echo() const {
  std::ostringstream out;
  auto line = [&out](const std::string& key, const std::string& value) {
    out << "  " << key << " = " << value << "\n";
  };
  auto int_list = [](const std::vector<Index>& values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(values[i]);
    }
    return s;
  };

  line("run.seed", std::to_string(seed));
  line("paths.generic_embeddings", generic_embeddings);
  line("paths.ds_embeddings", ds_embeddings);
  line("paths.corpus", corpus);
  line("paths.corpus_b", corpus_b);
  line("paths.dataset", dataset);
  line("paths.gold", gold);
  line("paths.model", model);
  line("paths.encoder_init", encoder_init);
  line("paths.out_dir", out_dir);
  line("embeddings.dim", std::to_string(dim));
  line("embeddings.window", std::to_string(window));
  line("embeddings.min_count", std::to_string(min_count));
  line("kcca.lambda", fmt_double(lambda));
  line("kcca.rank", std::to_string(rank));
  line("kcca.kernel", kernel == KernelKind::linear ? "linear" : "gaussian");
  line("kcca.sigma", fmt_double(sigma));
  line("kcca.landmarks", std::to_string(landmarks));
  line("encoder.kind", encoder.kind == EncoderKind::bow
                           ? "bow"
                           : encoder.kind == EncoderKind::cnn ? "cnn" : "bilstm");
  line("encoder.sentence_dim", std::to_string(encoder.sentence_dim));
  line("encoder.cnn_widths", int_list(encoder.cnn_widths));
  line("encoder.cnn_maps", int_list(encoder.cnn_maps));
  line("encoder.bilstm_hidden", std::to_string(encoder.bilstm_hidden));
  line("encoder.dropout", fmt_double(encoder.dropout));
  line("encoder.max_seq_len", std::to_string(encoder.max_seq_len));
  line("train.mode", mode == TrainMode::vanilla
                         ? "vanilla"
                         : mode == TrainMode::adapt_only ? "adapt-only" : "end-to-end");
  line("train.learning_rate", fmt_double(learning_rate));
  line("train.batch_size", std::to_string(batch_size));
  line("train.max_epochs", std::to_string(max_epochs));
  line("train.patience", std::to_string(patience));
  line("train.train_size", std::to_string(train_size));
  line("train.split_ratios", fmt_double(split_ratios[0]) + "," +
                                 fmt_double(split_ratios[1]) + "," +
                                 fmt_double(split_ratios[2]));
  line("shift.top_n", std::to_string(top_n));
  line("shift.normalize", normalize ? "true" : "false");
  line("synth.docs_per_domain", std::to_string(synth_docs_per_domain));
  line("synth.labeled_docs", std::to_string(synth_labeled_docs));
  line("synth.planted", std::to_string(synth_planted));
  line("synth.dim", std::to_string(synth_dim));
  return out.str();
}

}  // namespace daemb
