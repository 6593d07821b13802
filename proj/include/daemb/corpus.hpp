#ifndef DAEMB_CORPUS_HPP
#define DAEMB_CORPUS_HPP

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace daemb {

constexpr int kNoLabel = -1;

struct Document {
  std::vector<std::string> tokens;
  int label = kNoLabel;

  bool labeled() const { return label != kNoLabel; }
};

/// Token <-> dense index bijection with per-token corpus frequencies.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Builds from an ordered word list; frequencies default to zero
  /// (used for externally supplied vocabularies such as embedding files).
  static Vocabulary from_words(const std::vector<std::string>& words);

  int add(const std::string& word, std::int64_t freq);
  int id(std::string_view word) const;  // -1 when absent
  bool contains(std::string_view word) const { return id(word) >= 0; }
  const std::string& word(int index) const { return words_.at(index); }
  std::int64_t frequency(int index) const { return freq_.at(index); }
  int size() const { return static_cast<int>(words_.size()); }
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::unordered_map<std::string, int> index_;
  std::vector<std::string> words_;
  std::vector<std::int64_t> freq_;
};

struct Dataset {
  std::vector<Document> docs;
  std::vector<std::string> labels;  // class names, indexed by Document::label
  std::string source;

  std::size_t size() const { return docs.size(); }
};

struct Splits {
  Dataset train, dev, test;
};

/// Lowercases and splits text into alphanumeric runs; punctuation is dropped.
/// Bytes outside ASCII are treated as word characters so UTF-8 letters stay
/// intact.
std::vector<std::string> tokenize(std::string_view text);

/// Vocabulary over all document tokens with frequency >= min_count. Indices
/// are assigned by descending frequency, ties broken lexicographically.
Vocabulary build_vocab(const std::vector<Document>& docs, std::int64_t min_count);

/// Intersection of two vocabularies with summed frequencies, ordered like
/// build_vocab. Throws when the intersection is empty.
Vocabulary common_vocab(const Vocabulary& a, const Vocabulary& b);

/// Label-stratified split. Sizes per class stay within one document of the
/// exact proportions and the result is deterministic for a given seed.
Splits split(const Dataset& ds, const std::array<double, 3>& ratios,
             std::uint64_t seed);

/// One record per line, `label<TAB>text`; blank lines are skipped.
Dataset load_labeled(const std::string& path);

/// One document per line, unlabeled.
std::vector<Document> load_corpus(const std::string& path);

}  // namespace daemb

#endif
