#ifndef DAEMB_SYNTH_HPP
#define DAEMB_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "daemb/corpus.hpp"
#include "daemb/embeddings.hpp"

namespace daemb {

/// Desk-scale stand-in for a polarized two-domain corpus. A designated set of
/// planted words keeps fully disjoint context distributions across the two
/// domains, and the labeled examples carry their signal through words whose
/// generic vectors nearly collide while their in-domain usage separates them.
struct SynthConfig {
  std::uint64_t seed = 1;
  int docs_per_domain = 1000;
  int labeled_docs = 4000;
  int planted = 10;
  Index dim = 50;
};

struct SynthData {
  std::vector<Document> domain_a;  // unlabeled
  std::vector<Document> domain_b;
  Dataset labeled;                 // binary, labels {neg, pos}
  EmbeddingMatrix generic;         // synthetic pretrained vectors
  std::vector<std::string> planted_words;
  std::vector<std::pair<std::string, std::string>> sentiment_pairs;  // (pos, neg)
};

SynthData generate_synth(const SynthConfig& cfg);

struct SynthPaths {
  std::string domain_a, domain_b, labeled, generic, gold, manifest;
};

/// Writes domain_a.txt, domain_b.txt, labeled.tsv, generic_vectors.txt,
/// gold.txt and manifest.json under out_dir. Byte-identical per seed.
SynthPaths write_synth(const SynthData& data, const SynthConfig& cfg,
                       const std::string& out_dir);

}  // namespace daemb

#endif
