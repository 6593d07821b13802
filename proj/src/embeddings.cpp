#include "daemb/embeddings.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace daemb {

void CooccurrenceCounts::add(int i, int j, double weight) {
  if (weight < 0.0) throw std::invalid_argument("co-occurrence weight must be >= 0");
  cells_[key(i, j)] += weight;
  total_ += weight;
}

double CooccurrenceCounts::at(int i, int j) const {
  auto it = cells_.find(key(i, j));
  return it == cells_.end() ? 0.0 : it->second;
}

namespace {

std::runtime_error parse_error(const std::string& path, std::size_t lineno,
                               const std::string& what) {
  return std::runtime_error(path + ":" + std::to_string(lineno) + ": " + what);
}

bool looks_like_header(const std::string& line) {
  std::istringstream ss(line);
  long long count = 0, dim = 0;
  std::string extra;
  if (!(ss >> count >> dim)) return false;
  if (ss >> extra) return false;
  return count > 0 && dim > 0;
}

}  // namespace

EmbeddingMatrix load_pretrained(const std::string& path,
                                const Vocabulary* vocab_filter) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embedding file: " + path);

  std::vector<std::string> words;
  std::vector<std::vector<double>> rows;
  Index dim = -1;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  Vocabulary seen;

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (looks_like_header(line)) continue;
    }
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    std::vector<double> values;
    std::string field;
    while (ss >> field) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(field, &used);
      } catch (const std::exception&) {
        throw parse_error(path, lineno, "unparsable float '" + field + "'");
      }
      if (used != field.size()) {
        throw parse_error(path, lineno, "unparsable float '" + field + "'");
      }
      values.push_back(v);
    }
    if (values.empty()) throw parse_error(path, lineno, "no vector values");
    if (dim < 0) {
      dim = static_cast<Index>(values.size());
    } else if (static_cast<Index>(values.size()) != dim) {
      throw parse_error(path, lineno,
                        "expected " + std::to_string(dim) + " values, got " +
                            std::to_string(values.size()));
    }
    if (seen.contains(word)) {
      throw parse_error(path, lineno, "duplicate word '" + word + "'");
    }
    seen.add(word, 0);
    if (vocab_filter != nullptr && !vocab_filter->contains(word)) continue;
    words.push_back(word);
    rows.push_back(std::move(values));
  }
  if (words.empty()) {
    throw std::runtime_error(path + ": no embeddings loaded" +
                             (vocab_filter ? " (vocabulary filter matched nothing)" : ""));
  }

  EmbeddingMatrix emb;
  emb.vocab = Vocabulary::from_words(words);
  emb.vectors.resize(static_cast<Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (Index j = 0; j < dim; ++j) emb.vectors(static_cast<Index>(i), j) = rows[i][j];
  emb.role = EmbeddingRole::generic;
  check_finite(emb.vectors, "load_pretrained");
  return emb;
}

void save_embeddings(const EmbeddingMatrix& emb, const std::string& path,
                     bool header) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write embedding file: " + path);
  char buf[40];
  if (header) out << emb.vocab.size() << " " << emb.dim() << "\n";
  for (int i = 0; i < emb.vocab.size(); ++i) {
    out << emb.vocab.word(i);
    for (Index j = 0; j < emb.dim(); ++j) {
      std::snprintf(buf, sizeof buf, " %.17g", emb.vectors(i, j));
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

CooccurrenceCounts count_cooccurrence(const std::vector<Document>& docs,
                                      const Vocabulary& vocab, int window) {
  if (window < 1) throw std::invalid_argument("count_cooccurrence: window must be >= 1");
  CooccurrenceCounts counts(vocab, window);
  std::vector<int> ids;
  for (const auto& doc : docs) {
    ids.clear();
    for (const auto& tok : doc.tokens) ids.push_back(vocab.id(tok));
    const std::size_t n = ids.size();
    for (std::size_t s = 0; s < n; ++s) {
      if (ids[s] < 0) continue;
      const std::size_t stop = std::min(n, s + 1 + static_cast<std::size_t>(window));
      for (std::size_t t = s + 1; t < stop; ++t) {
        if (ids[t] < 0) continue;
        counts.add(ids[s], ids[t], 1.0);
      }
    }
  }
  return counts;
}

Matrix ppmi(const CooccurrenceCounts& counts) {
  const int n = counts.vocab().size();
  const double total = counts.total();
  if (total <= 0.0) throw std::invalid_argument("ppmi: total count must be positive");

  // Marginal mass per token: sum of the cells it participates in.
  Vector marginal = Vector::Zero(n);
  for (const auto& [key, c] : counts.cells()) {
    const int hi = static_cast<int>(key >> 32);
    const int lo = static_cast<int>(key & 0xffffffffu);
    marginal(hi) += c;
    if (lo != hi) marginal(lo) += c;
  }

  Matrix out = Matrix::Zero(n, n);
  for (const auto& [key, c] : counts.cells()) {
    if (c <= 0.0) continue;
    const int hi = static_cast<int>(key >> 32);
    const int lo = static_cast<int>(key & 0xffffffffu);
    const double pmi =
        std::log(c * total / (marginal(hi) * marginal(lo)));
    const double value = std::max(0.0, pmi);
    out(hi, lo) = value;
    out(lo, hi) = value;
  }
  return out;
}

EmbeddingMatrix build_ds_embeddings(const std::vector<Document>& docs,
                                    const Vocabulary& vocab, Index dim,
                                    int window, Rng& rng) {
  if (dim <= 0 || dim > vocab.size()) {
    throw std::invalid_argument("build_ds_embeddings: dim must be in [1, |vocab|]");
  }
  const Matrix weights = ppmi(count_cooccurrence(docs, vocab, window));
  const SvdResult svd = truncated_svd(weights, dim, 10, 4, rng);
  EmbeddingMatrix emb;
  emb.vocab = vocab;
  emb.vectors = svd.u * svd.s.asDiagonal();
  emb.role = EmbeddingRole::domain_specific;
  return emb;
}

EmbeddingMatrix standardize_norms(const EmbeddingMatrix& e) {
  const double mean_norm = e.vectors.rowwise().norm().mean();
  if (mean_norm <= 0.0) {
    throw std::runtime_error("standardize_norms: all rows are zero");
  }
  EmbeddingMatrix out = e;
  out.vectors /= mean_norm;
  return out;
}

}  // namespace daemb
