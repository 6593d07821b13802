#ifndef DAEMB_EMBEDDINGS_HPP
#define DAEMB_EMBEDDINGS_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "daemb/corpus.hpp"
#include "daemb/numerics.hpp"

namespace daemb {

enum class EmbeddingRole { generic, domain_specific, projected, domain_adapted };

struct EmbeddingMatrix {
  Vocabulary vocab;
  Matrix vectors;  // |vocab| x dim
  EmbeddingRole role = EmbeddingRole::generic;

  Index dim() const { return vectors.cols(); }
  Vector row(int word_index) const { return vectors.row(word_index); }
};

/// Symmetric co-occurrence counts stored once per unordered token pair;
/// lookups are symmetric in (i, j).
class CooccurrenceCounts {
 public:
  CooccurrenceCounts(Vocabulary vocab, int window)
      : vocab_(std::move(vocab)), window_(window) {}

  void add(int i, int j, double weight);
  double at(int i, int j) const;
  double total() const { return total_; }
  int window() const { return window_; }
  const Vocabulary& vocab() const { return vocab_; }
  const std::unordered_map<std::uint64_t, double>& cells() const { return cells_; }

  static std::uint64_t key(int i, int j) {
    const std::uint64_t lo = static_cast<std::uint32_t>(std::min(i, j));
    const std::uint64_t hi = static_cast<std::uint32_t>(std::max(i, j));
    return (hi << 32) | lo;
  }

 private:
  Vocabulary vocab_;
  int window_;
  std::unordered_map<std::uint64_t, double> cells_;
  double total_ = 0.0;
};

/// Loads a GloVe-style text vector file: optional `<count> <dim>` header line,
/// then `word v1 ... vd` per line. Problems are reported with line numbers.
EmbeddingMatrix load_pretrained(const std::string& path,
                                const Vocabulary* vocab_filter = nullptr);

/// Writes the same text format, lossless round-trip precision.
void save_embeddings(const EmbeddingMatrix& emb, const std::string& path,
                     bool header = false);

/// Counts token pairs within `window` positions of each other; tokens outside
/// the vocabulary are skipped.
CooccurrenceCounts count_cooccurrence(const std::vector<Document>& docs,
                                      const Vocabulary& vocab, int window);

/// Positive pointwise mutual information matrix of the counts; zero cells map
/// to zero.
Matrix ppmi(const CooccurrenceCounts& counts);

/// LSA-style domain-specific embedding: truncated SVD of the PPMI matrix,
/// rows = U * S.
EmbeddingMatrix build_ds_embeddings(const std::vector<Document>& docs,
                                    const Vocabulary& vocab, Index dim,
                                    int window, Rng& rng);

/// Scales all rows by one common factor so the mean row norm is 1. Pairwise
/// cosines are unchanged.
EmbeddingMatrix standardize_norms(const EmbeddingMatrix& e);

}  // namespace daemb

#endif
