#ifndef DAEMB_SHIFT_HPP
#define DAEMB_SHIFT_HPP

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "daemb/kcca.hpp"

namespace daemb {

/// Per-word shift scores, sorted by descending score with lexicographic
/// tie-break.
struct ShiftReport {
  std::vector<std::pair<std::string, double>> scores;
  Index rank = 0;          // canonical-space dimension the scores came from
  double lambda = 0.0;     // alignment ridge echo
  bool normalized = true;  // views standardized to mean norm 1 first

  std::size_t size() const { return scores.size(); }
};

/// l2 distance between each word's two aligned vectors. When normalize is
/// set, each view is first scaled to mean row norm 1.
ShiftReport shift_scores(const AlignedPairs& aligned, bool normalize,
                         double lambda_echo = 0.0);

/// How many of the top n words are in the gold set. n must not exceed the
/// report length.
int top_k_overlap(const ShiftReport& report, const std::set<std::string>& gold,
                  int n);

/// Population V, gold successes K, draws n, observed successes k.
struct HypergeomParams {
  std::int64_t population = 0;  // V
  std::int64_t successes = 0;   // K
  std::int64_t draws = 0;       // n
  std::int64_t observed = 0;    // k
};

/// Exact pmf Pr(X = k) via log-gamma accumulation; zero outside the support.
double hypergeom_pmf(const HypergeomParams& p);

/// (mu, sigma) with mu = nK/V and the standard finite-population variance.
std::pair<double, double> hypergeom_mean_std(const HypergeomParams& p);

/// Upper tail Pr(X >= k), summed over the support.
double tail_pvalue(const HypergeomParams& p);

struct SignificanceReport {
  HypergeomParams params;
  double mean = 0.0;
  double stddev = 0.0;
  double pmf_at_k = 0.0;
  double p_value = 1.0;
  std::string verdict;
};

/// Assembles the full significance test for a shift ranking against a gold
/// lexicon: V = ranked words, K = gold words present in the ranking,
/// k = gold words among the top n.
SignificanceReport significance_report(const ShiftReport& report,
                                       const std::set<std::string>& gold, int n);

/// Builds the report from raw parameters (used by the hypergeom command).
SignificanceReport significance_from_params(const HypergeomParams& p);

/// One word per line, lowercased; blank lines skipped.
std::set<std::string> load_gold_lexicon(const std::string& path);

}  // namespace daemb

#endif
