#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "daemb/embeddings.hpp"

using namespace daemb;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
  const auto dir = std::filesystem::temp_directory_path() / "daemb_emb_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / name).string();
  std::ofstream out(path);
  out << body;
  return path;
}

std::vector<Document> docs_from(std::initializer_list<std::vector<std::string>> lists) {
  std::vector<Document> docs;
  for (const auto& tokens : lists) docs.push_back({tokens, kNoLabel});
  return docs;
}

}  // namespace

TEST_CASE("load_pretrained parses the text format") {
  const auto path = write_temp("plain.txt", "a 1.0 2.0\nb 0.5 0.5\n");
  const EmbeddingMatrix emb = load_pretrained(path);
  CHECK(emb.vocab.size() == 2);
  CHECK(emb.dim() == 2);
  CHECK(emb.vectors(emb.vocab.id("a"), 1) == 2.0);
  CHECK(emb.role == EmbeddingRole::generic);
}

TEST_CASE("load_pretrained honors a vocabulary filter") {
  const auto path = write_temp("filter.txt", "a 1.0 2.0\nb 0.5 0.5\n");
  const Vocabulary keep = Vocabulary::from_words({"a"});
  const EmbeddingMatrix emb = load_pretrained(path, &keep);
  CHECK(emb.vocab.size() == 1);
  CHECK(emb.vocab.contains("a"));
  CHECK(emb.dim() == 2);
}

TEST_CASE("load_pretrained skips a count/dim header") {
  const auto path = write_temp("header.txt", "2 3\nx 1 2 3\ny 4 5 6\n");
  const EmbeddingMatrix emb = load_pretrained(path);
  CHECK(emb.vocab.size() == 2);
  CHECK(emb.dim() == 3);
}

TEST_CASE("load_pretrained reports problems with line numbers") {
  const auto bad_dim = write_temp("baddim.txt", "a 1.0 2.0\nb 0.5 0.5\nc 1.0\n");
  CHECK_THROWS_WITH_AS(load_pretrained(bad_dim), doctest::Contains(":3"),
                       std::runtime_error);
  const auto dup = write_temp("dup.txt", "a 1.0\na 2.0\n");
  CHECK_THROWS_WITH_AS(load_pretrained(dup), doctest::Contains("duplicate"),
                       std::runtime_error);
  const auto junk = write_temp("junk.txt", "a 1.0 oops\n");
  CHECK_THROWS_WITH_AS(load_pretrained(junk), doctest::Contains("float"),
                       std::runtime_error);
}

TEST_CASE("save/load embeddings round-trips losslessly") {
  EmbeddingMatrix emb;
  emb.vocab = Vocabulary::from_words({"w1", "w2", "w3"});
  Rng rng(5);
  emb.vectors = rng_normal(rng, 3, 4);
  const auto path = write_temp("roundtrip.txt", "");
  save_embeddings(emb, path);
  const EmbeddingMatrix back = load_pretrained(path);
  CHECK((back.vectors - emb.vectors).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("count_cooccurrence counts symmetric pairs") {
  const Vocabulary vocab = build_vocab(docs_from({{"a", "b"}}), 1);
  const auto c1 = count_cooccurrence(docs_from({{"a", "b"}}), vocab, 1);
  CHECK(c1.at(vocab.id("a"), vocab.id("b")) == 1.0);
  CHECK(c1.at(vocab.id("b"), vocab.id("a")) == 1.0);

  const auto c2 = count_cooccurrence(docs_from({{"a", "b", "a"}}), vocab, 2);
  CHECK(c2.at(vocab.id("a"), vocab.id("b")) == 2.0);
  CHECK(c2.at(vocab.id("a"), vocab.id("a")) == 1.0);

  const auto empty = count_cooccurrence({}, vocab, 2);
  CHECK(empty.total() == 0.0);

  // Tokens outside the vocabulary are skipped.
  const auto skip = count_cooccurrence(docs_from({{"a", "zzz", "b"}}), vocab, 1);
  CHECK(skip.at(vocab.id("a"), vocab.id("b")) == 0.0);
}

TEST_CASE("ppmi matches hand-computed values") {
  const Vocabulary vocab = Vocabulary::from_words({"a", "b", "c"});

  // Degenerate single-cell table: p(a,b)=1, marginals 1 -> PMI 0.
  CooccurrenceCounts single(vocab, 1);
  single.add(0, 1, 1.0);
  const Matrix m1 = ppmi(single);
  CHECK(m1(0, 1) == 0.0);

  // p(a,b) = 0.5 with p(a) = p(b) = 0.5 -> log 2.
  CooccurrenceCounts toy(vocab, 1);
  toy.add(0, 1, 1.0);
  toy.add(2, 2, 1.0);
  const Matrix m2 = ppmi(toy);
  CHECK(m2(0, 1) == doctest::Approx(std::log(2.0)));
  CHECK(m2(1, 0) == doctest::Approx(std::log(2.0)));

  // Exact independence: c(a,b)*T = m(a)*m(b) -> PMI 0 -> entry 0.
  CooccurrenceCounts indep(vocab, 1);
  indep.add(0, 1, 2.0);
  indep.add(0, 0, 2.0);
  indep.add(1, 1, 2.0);
  indep.add(2, 2, 2.0);  // T = 8, m(a) = m(b) = 4, log(2*8/16) = 0
  const Matrix m3 = ppmi(indep);
  CHECK(m3(0, 1) == 0.0);

  CHECK_THROWS_AS(ppmi(CooccurrenceCounts(vocab, 1)), std::invalid_argument);
}

TEST_CASE("ppmi is non-negative and symmetric on random counts") {
  const Vocabulary vocab =
      Vocabulary::from_words({"w0", "w1", "w2", "w3", "w4"});
  Rng rng(12);
  CooccurrenceCounts counts(vocab, 3);
  for (int trial = 0; trial < 30; ++trial) {
    const int i = static_cast<int>(rng.uniform_below(5));
    const int j = static_cast<int>(rng.uniform_below(5));
    counts.add(i, j, 1.0 + rng.uniform_below(4));
  }
  const Matrix m = ppmi(counts);
  CHECK(m.minCoeff() >= 0.0);
  CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("build_ds_embeddings gives identical rows to words with identical contexts") {
  std::vector<Document> docs;
  for (int i = 0; i < 30; ++i) {
    docs.push_back({{"w1", "c1", "c2"}, kNoLabel});
    docs.push_back({{"w2", "c1", "c2"}, kNoLabel});
    docs.push_back({{"c3", "c4"}, kNoLabel});
  }
  const Vocabulary vocab = build_vocab(docs, 1);
  Rng rng(4);
  const EmbeddingMatrix emb =
      build_ds_embeddings(docs, vocab, vocab.size(), 2, rng);
  const Vector r1 = emb.vectors.row(vocab.id("w1"));
  const Vector r2 = emb.vectors.row(vocab.id("w2"));
  CHECK((r1 - r2).norm() < 1e-6);
  CHECK(emb.role == EmbeddingRole::domain_specific);
}

TEST_CASE("full-rank DS embedding reproduces the PPMI gram matrix") {
  const auto docs = docs_from({{"a", "b", "c"}, {"b", "c", "d"}, {"a", "d"}});
  const Vocabulary vocab = build_vocab(docs, 1);
  const Matrix weights = ppmi(count_cooccurrence(docs, vocab, 2));
  Rng rng(8);
  const EmbeddingMatrix emb =
      build_ds_embeddings(docs, vocab, vocab.size(), 2, rng);
  // rows = U*S for symmetric PPMI M, so rows * rows^T = M * M.
  const Matrix gram = emb.vectors * emb.vectors.transpose();
  const Matrix expected = weights * weights;
  CHECK((gram - expected).norm() < 1e-6 * std::max(1.0, expected.norm()));
}

TEST_CASE("DS reconstruction improves with dimension") {
  std::vector<Document> docs;
  Rng gen(77);
  std::vector<std::string> words;
  for (int i = 0; i < 20; ++i) words.push_back("t" + std::to_string(i));
  for (int d = 0; d < 200; ++d) {
    Document doc;
    const int base = static_cast<int>(gen.uniform_below(20));
    for (int k = 0; k < 5; ++k) {
      doc.tokens.push_back(words[(base + k) % 20]);
    }
    docs.push_back(doc);
  }
  const Vocabulary vocab = build_vocab(docs, 1);
  const Matrix weights = ppmi(count_cooccurrence(docs, vocab, 3));
  double prev_err = std::numeric_limits<double>::infinity();
  for (Index dim : {2, 5, 10, 20}) {
    Rng rng(9);
    const auto svd = truncated_svd(weights, dim, 10, 4, rng);
    const Matrix recon = svd.u * svd.s.asDiagonal() * svd.vt;
    const double err = (weights - recon).norm();
    CHECK(err <= prev_err + 1e-9);
    prev_err = err;
  }
}

TEST_CASE("build_ds_embeddings is deterministic per seed") {
  const auto docs = docs_from({{"a", "b", "c", "a"}, {"c", "b"}});
  const Vocabulary vocab = build_vocab(docs, 1);
  Rng r1(3), r2(3);
  const auto e1 = build_ds_embeddings(docs, vocab, 2, 2, r1);
  const auto e2 = build_ds_embeddings(docs, vocab, 2, 2, r2);
  CHECK((e1.vectors - e2.vectors).cwiseAbs().maxCoeff() == 0.0);

  Rng r3(3);
  CHECK_THROWS_AS(build_ds_embeddings(docs, vocab, 10, 2, r3),
                  std::invalid_argument);
}

TEST_CASE("standardize_norms scales to mean norm one") {
  EmbeddingMatrix emb;
  emb.vocab = Vocabulary::from_words({"a", "b"});
  emb.vectors.resize(2, 2);
  emb.vectors << 2, 0, 0, 2;  // norms (2, 2)
  const auto out = standardize_norms(emb);
  CHECK(out.vectors.row(0).norm() == doctest::Approx(1.0));
  CHECK(out.vectors.row(1).norm() == doctest::Approx(1.0));

  emb.vectors << 1, 0, 0, 3;  // norms (1, 3), mean 2
  const auto out2 = standardize_norms(emb);
  CHECK(out2.vectors.row(0).norm() == doctest::Approx(0.5));
  CHECK(out2.vectors.row(1).norm() == doctest::Approx(1.5));

  // Idempotent once the mean norm is 1.
  const auto out3 = standardize_norms(out2);
  CHECK((out3.vectors - out2.vectors).cwiseAbs().maxCoeff() < 1e-12);

  emb.vectors.setZero();
  CHECK_THROWS_AS(standardize_norms(emb), std::runtime_error);
}

TEST_CASE("standardize_norms preserves cosines") {
  EmbeddingMatrix emb;
  emb.vocab = Vocabulary::from_words({"a", "b", "c"});
  Rng rng(6);
  emb.vectors = rng_normal(rng, 3, 4);
  const auto out = standardize_norms(emb);
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      const double before = emb.vectors.row(i).dot(emb.vectors.row(j)) /
                            (emb.vectors.row(i).norm() * emb.vectors.row(j).norm());
      const double after = out.vectors.row(i).dot(out.vectors.row(j)) /
                           (out.vectors.row(i).norm() * out.vectors.row(j).norm());
      CHECK(before == doctest::Approx(after).epsilon(1e-14));
    }
  }
}
