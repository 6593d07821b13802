#include "daemb/synth.hpp"

#include <array>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "daemb/numerics.hpp"

namespace daemb {

namespace {

constexpr int kTopics = 15;
constexpr int kWordsPerTopic = 6;
constexpr int kAnchorsPerPolarity = 8;
constexpr int kSentimentPairs = 10;
// Generic-space gap between a sentiment pair: small enough that the signal is
// hard to learn from the generic vectors alone, large enough to be learnable
// with ample data.
constexpr double kPairDelta = 0.15;

std::string name(const char* prefix, int i) {
  return std::string(prefix) + std::to_string(i);
}

// The background vocabulary is organized into topics, identical in both
// domains, so ordinary words keep stable co-occurrence geometry. Each planted
// word is tied to two topics per domain with disjoint topic sets across
// domains: its context distribution swaps wholesale while everything else
// stays put.
struct WordBank {
  std::vector<std::string> fillers;  // topic-major: topic t = [t*6, t*6+6)
  std::vector<std::string> pos_anchors, neg_anchors, planted;
  std::vector<std::array<int, 2>> topics_a, topics_b;  // per planted word
  std::vector<std::string> pos_words, neg_words;

  const std::string& topic_word(int topic, Rng& rng) const {
    return fillers[topic * kWordsPerTopic + rng.uniform_below(kWordsPerTopic)];
  }

  std::vector<std::string> everything() const {
    std::vector<std::string> all;
    auto push = [&all](const std::vector<std::string>& v) {
      all.insert(all.end(), v.begin(), v.end());
    };
    push(fillers);
    push(pos_anchors);
    push(neg_anchors);
    push(planted);
    push(pos_words);
    push(neg_words);
    return all;
  }
};

WordBank make_bank(int planted, Rng& rng) {
  WordBank bank;
  for (int i = 0; i < kTopics * kWordsPerTopic; ++i) {
    bank.fillers.push_back(name("fill", i));
  }
  for (int i = 0; i < kAnchorsPerPolarity; ++i) {
    bank.pos_anchors.push_back(name("goodmark", i));
    bank.neg_anchors.push_back(name("badmark", i));
  }
  for (int i = 0; i < planted; ++i) bank.planted.push_back(name("pivot", i));
  for (int i = 0; i < kSentimentPairs; ++i) {
    bank.pos_words.push_back(name("updrift", i));
    bank.neg_words.push_back(name("downdrift", i));
  }

  std::vector<int> topics(kTopics);
  for (int i = 0; i < planted; ++i) {
    std::iota(topics.begin(), topics.end(), 0);
    for (std::size_t j = topics.size(); j > 1; --j) {
      std::swap(topics[j - 1], topics[rng.uniform_below(j)]);
    }
    bank.topics_a.push_back({topics[0], topics[1]});
    bank.topics_b.push_back({topics[2], topics[3]});
  }
  return bank;
}

const std::string& pick(const std::vector<std::string>& pool, Rng& rng) {
  return pool[rng.uniform_below(pool.size())];
}

void shuffle_tokens(std::vector<std::string>& tokens, Rng& rng) {
  for (std::size_t i = tokens.size(); i > 1; --i) {
    std::swap(tokens[i - 1], tokens[rng.uniform_below(i)]);
  }
}

Document filler_doc(const WordBank& bank, Rng& rng) {
  Document doc;
  const int topic = static_cast<int>(rng.uniform_below(kTopics));
  const std::size_t len = 8 + rng.uniform_below(6);
  for (std::size_t i = 0; i < len; ++i) {
    doc.tokens.push_back(rng.uniform() < 0.8 ? bank.topic_word(topic, rng)
                                             : pick(bank.fillers, rng));
  }
  return doc;
}

// One planted word, mentioned repeatedly, in its domain-specific topics.
Document planted_doc(const WordBank& bank, bool domain_a, Rng& rng) {
  Document doc;
  const int p = static_cast<int>(rng.uniform_below(bank.planted.size()));
  const auto& topics = domain_a ? bank.topics_a[p] : bank.topics_b[p];
  const std::size_t mentions = 3 + rng.uniform_below(2);
  for (std::size_t i = 0; i < mentions; ++i) doc.tokens.push_back(bank.planted[p]);
  for (int i = 0; i < 8; ++i) {
    doc.tokens.push_back(bank.topic_word(topics[rng.uniform_below(2)], rng));
  }
  shuffle_tokens(doc.tokens, rng);
  return doc;
}

Document anchor_background_doc(const WordBank& bank, Rng& rng) {
  Document doc;
  const std::size_t len = 8 + rng.uniform_below(5);
  for (std::size_t i = 0; i < len; ++i) {
    const double u = rng.uniform();
    if (u < 0.25) doc.tokens.push_back(pick(bank.pos_anchors, rng));
    else if (u < 0.5) doc.tokens.push_back(pick(bank.neg_anchors, rng));
    else doc.tokens.push_back(pick(bank.fillers, rng));
  }
  return doc;
}

// In-domain usage tying each sentiment word to its polarity anchors; this is
// what the DS embedding can see and the generic vectors cannot.
Document sentiment_doc(const WordBank& bank, Rng& rng) {
  Document doc;
  const bool positive = rng.uniform() < 0.5;
  const auto& words = positive ? bank.pos_words : bank.neg_words;
  const auto& anchors = positive ? bank.pos_anchors : bank.neg_anchors;
  const std::size_t mentions = 1 + rng.uniform_below(2);
  for (std::size_t i = 0; i < mentions; ++i) doc.tokens.push_back(pick(words, rng));
  for (int i = 0; i < 4; ++i) doc.tokens.push_back(pick(anchors, rng));
  for (int i = 0; i < 3; ++i) doc.tokens.push_back(pick(bank.fillers, rng));
  shuffle_tokens(doc.tokens, rng);
  return doc;
}

// Both domains share the same sentence mixture; only the planted words'
// topics differ.
std::vector<Document> make_domain(const WordBank& bank, bool domain_a, int docs,
                                  Rng& rng) {
  std::vector<Document> out;
  out.reserve(docs);
  for (int i = 0; i < docs; ++i) {
    const double u = rng.uniform();
    if (u < 0.45) out.push_back(filler_doc(bank, rng));
    else if (u < 0.70) out.push_back(planted_doc(bank, domain_a, rng));
    else if (u < 0.80) out.push_back(anchor_background_doc(bank, rng));
    else out.push_back(sentiment_doc(bank, rng));
  }
  return out;
}

Dataset make_labeled(const WordBank& bank, int docs, Rng& rng) {
  Dataset ds;
  ds.labels = {"neg", "pos"};
  ds.source = "synthetic";
  for (int i = 0; i < docs; ++i) {
    Document doc;
    doc.label = i % 2;
    const auto& words = doc.label == 1 ? bank.pos_words : bank.neg_words;
    const std::size_t signal = 3 + rng.uniform_below(2);
    for (std::size_t j = 0; j < signal; ++j) doc.tokens.push_back(pick(words, rng));
    const std::size_t noise = 6 + rng.uniform_below(5);
    for (std::size_t j = 0; j < noise; ++j)
      doc.tokens.push_back(pick(bank.fillers, rng));
    shuffle_tokens(doc.tokens, rng);
    ds.docs.push_back(std::move(doc));
  }
  return ds;
}

Vector unit_gaussian(Index dim, Rng& rng) {
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) v(i) = rng.normal();
  const double norm = v.norm();
  return norm > 0 ? Vector(v / norm) : v;
}

EmbeddingMatrix make_generic(const WordBank& bank, Index dim, Rng& rng) {
  EmbeddingMatrix emb;
  emb.vocab = Vocabulary::from_words(bank.everything());
  emb.vectors.resize(emb.vocab.size(), dim);
  emb.role = EmbeddingRole::generic;
  for (int i = 0; i < emb.vocab.size(); ++i) {
    emb.vectors.row(i) = unit_gaussian(dim, rng);
  }
  // Each sentiment pair nearly collides in the generic space.
  for (int i = 0; i < kSentimentPairs; ++i) {
    const int pos = emb.vocab.id(bank.pos_words[i]);
    const int neg = emb.vocab.id(bank.neg_words[i]);
    Vector v = emb.vectors.row(pos).transpose() + kPairDelta * unit_gaussian(dim, rng);
    emb.vectors.row(neg) = v / v.norm();
  }
  return emb;
}

}  // namespace

SynthData generate_synth(const SynthConfig& cfg) {
  if (cfg.planted < 1 || cfg.docs_per_domain < 1 || cfg.labeled_docs < 2 ||
      cfg.dim < 2) {
    throw std::invalid_argument("generate_synth: invalid configuration");
  }
  Rng rng(cfg.seed);
  const WordBank bank = make_bank(cfg.planted, rng);

  SynthData data;
  data.generic = make_generic(bank, cfg.dim, rng);
  data.domain_a = make_domain(bank, true, cfg.docs_per_domain, rng);
  data.domain_b = make_domain(bank, false, cfg.docs_per_domain, rng);
  data.labeled = make_labeled(bank, cfg.labeled_docs, rng);
  data.planted_words = bank.planted;
  for (int i = 0; i < kSentimentPairs; ++i) {
    data.sentiment_pairs.emplace_back(bank.pos_words[i], bank.neg_words[i]);
  }
  return data;
}

SynthPaths write_synth(const SynthData& data, const SynthConfig& cfg,
                       const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  SynthPaths paths;
  paths.domain_a = out_dir + "/domain_a.txt";
  paths.domain_b = out_dir + "/domain_b.txt";
  paths.labeled = out_dir + "/labeled.tsv";
  paths.generic = out_dir + "/generic_vectors.txt";
  paths.gold = out_dir + "/gold.txt";
  paths.manifest = out_dir + "/manifest.json";

  auto write_docs = [](const std::vector<Document>& docs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& doc : docs) {
      for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
        if (i) out << ' ';
        out << doc.tokens[i];
      }
      out << '\n';
    }
  };
  write_docs(data.domain_a, paths.domain_a);
  write_docs(data.domain_b, paths.domain_b);

  {
    std::ofstream out(paths.labeled);
    if (!out) throw std::runtime_error("cannot write " + paths.labeled);
    for (const auto& doc : data.labeled.docs) {
      out << data.labeled.labels[doc.label] << '\t';
      for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
        if (i) out << ' ';
        out << doc.tokens[i];
      }
      out << '\n';
    }
  }

  save_embeddings(data.generic, paths.generic);

  {
    std::ofstream out(paths.gold);
    if (!out) throw std::runtime_error("cannot write " + paths.gold);
    for (const auto& w : data.planted_words) out << w << '\n';
  }

  {
    nlohmann::json manifest;
    manifest["seed"] = cfg.seed;
    manifest["docs_per_domain"] = cfg.docs_per_domain;
    manifest["labeled_docs"] = cfg.labeled_docs;
    manifest["dim"] = cfg.dim;
    manifest["planted"] = data.planted_words;
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& [pos, neg] : data.sentiment_pairs) {
      pairs.push_back({{"pos", pos}, {"neg", neg}});
    }
    manifest["sentiment_pairs"] = pairs;
    std::ofstream out(paths.manifest);
    if (!out) throw std::runtime_error("cannot write " + paths.manifest);
    out << manifest.dump(2) << '\n';
  }
  return paths;
}

}  // namespace daemb
