#include "daemb/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "daemb/numerics.hpp"

namespace daemb {

Vocabulary Vocabulary::from_words(const std::vector<std::string>& words) {
  Vocabulary v;
  for (const auto& w : words) v.add(w, 0);
  return v;
}

int Vocabulary::add(const std::string& word, std::int64_t freq) {
  auto [it, inserted] = index_.emplace(word, static_cast<int>(words_.size()));
  if (!inserted) {
    throw std::invalid_argument("Vocabulary: duplicate token '" + word + "'");
  }
  words_.push_back(word);
  freq_.push_back(freq);
  return it->second;
}

int Vocabulary::id(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? -1 : it->second;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    const bool word_char = std::isalnum(c) || c >= 0x80;
    if (word_char) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

namespace {

Vocabulary vocab_from_counts(const std::map<std::string, std::int64_t>& counts,
                             std::int64_t min_count) {
  std::vector<std::pair<std::string, std::int64_t>> kept;
  for (const auto& [word, n] : counts) {
    if (n >= min_count) kept.emplace_back(word, n);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  for (const auto& [word, n] : kept) v.add(word, n);
  return v;
}

}  // namespace

Vocabulary build_vocab(const std::vector<Document>& docs, std::int64_t min_count) {
  if (min_count < 1) throw std::invalid_argument("build_vocab: min_count must be >= 1");
  std::map<std::string, std::int64_t> counts;
  for (const auto& doc : docs)
    for (const auto& tok : doc.tokens) ++counts[tok];
  Vocabulary v = vocab_from_counts(counts, min_count);
  if (v.size() == 0) {
    throw std::runtime_error(
        "build_vocab: no token reached min_count; corpus is unusable");
  }
  return v;
}

Vocabulary common_vocab(const Vocabulary& a, const Vocabulary& b) {
  std::map<std::string, std::int64_t> counts;
  for (int i = 0; i < a.size(); ++i) {
    const int j = b.id(a.word(i));
    if (j >= 0) counts[a.word(i)] = a.frequency(i) + b.frequency(j);
  }
  if (counts.empty()) {
    throw std::runtime_error("common_vocab: vocabularies do not intersect");
  }
  return vocab_from_counts(counts, 1);
}

namespace {

// Largest-remainder apportionment of n into three parts.
std::array<std::size_t, 3> apportion(std::size_t n, const std::array<double, 3>& ratios) {
  std::array<std::size_t, 3> out{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = ratios[i] * static_cast<double>(n);
    out[i] = static_cast<std::size_t>(std::floor(exact));
    remainder[i] = exact - std::floor(exact);
    assigned += out[i];
  }
  // Ties favor train, then dev, then test.
  while (assigned < n) {
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if (remainder[i] > remainder[best]) best = i;
    ++out[best];
    remainder[best] = -1.0;
    ++assigned;
  }
  return out;
}

}  // namespace

Splits split(const Dataset& ds, const std::array<double, 3>& ratios,
             std::uint64_t seed) {
  const double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("split: ratios must sum to 1");
  }
  for (double r : ratios)
    if (r < 0.0) throw std::invalid_argument("split: ratios must be non-negative");
  if (ds.docs.empty()) throw std::invalid_argument("split: dataset is empty");

  std::vector<std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < ds.docs.size(); ++i) {
    const int label = ds.docs[i].label;
    if (label == kNoLabel) {
      throw std::invalid_argument("split: all documents must be labeled");
    }
    if (static_cast<std::size_t>(label) >= by_class.size())
      by_class.resize(label + 1);
    by_class[label].push_back(i);
  }

  Splits out;
  for (Dataset* part : {&out.train, &out.dev, &out.test}) {
    part->labels = ds.labels;
    part->source = ds.source;
  }

  Rng rng(seed);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& idx = by_class[c];
    if (idx.empty()) continue;
    if (idx.size() < 3) {
      const std::string name =
          c < ds.labels.size() ? ds.labels[c] : std::to_string(c);
      throw std::runtime_error("split: class '" + name +
                               "' has fewer than 3 examples");
    }
    // Fisher-Yates with the shared seeded stream; class order is fixed.
    for (std::size_t i = idx.size() - 1; i > 0; --i) {
      const std::size_t j = rng.uniform_below(i + 1);
      std::swap(idx[i], idx[j]);
    }
    const auto counts = apportion(idx.size(), ratios);
    std::size_t pos = 0;
    Dataset* parts[3] = {&out.train, &out.dev, &out.test};
    for (int p = 0; p < 3; ++p) {
      for (std::size_t k = 0; k < counts[p]; ++k)
        parts[p]->docs.push_back(ds.docs[idx[pos++]]);
    }
  }
  return out;
}

Dataset load_labeled(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  Dataset ds;
  ds.source = path + " (label<TAB>text)";
  std::unordered_map<std::string, int> label_ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected label<TAB>text");
    }
    const std::string label = line.substr(0, tab);
    auto [it, inserted] = label_ids.emplace(label, static_cast<int>(ds.labels.size()));
    if (inserted) ds.labels.push_back(label);
    Document doc;
    doc.tokens = tokenize(std::string_view(line).substr(tab + 1));
    doc.label = it->second;
    ds.docs.push_back(std::move(doc));
  }
  return ds;
}

std::vector<Document> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  std::vector<Document> docs;
  std::string line;
  while (std::getline(in, line)) {
    Document doc;
    doc.tokens = tokenize(line);
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace daemb
