#include "daemb/shift.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace daemb {

namespace {

Matrix normalize_view(const Matrix& view) {
  const double mean_norm = view.rowwise().norm().mean();
  if (mean_norm <= 0.0) {
    throw std::runtime_error("shift_scores: view has zero mean norm");
  }
  return view / mean_norm;
}

}  // namespace

ShiftReport shift_scores(const AlignedPairs& aligned, bool normalize,
                         double lambda_echo) {
  if (aligned.vocab.size() == 0) {
    throw std::invalid_argument("shift_scores: empty alignment");
  }
  const Matrix a = normalize ? normalize_view(aligned.xbar) : aligned.xbar;
  const Matrix b = normalize ? normalize_view(aligned.ybar) : aligned.ybar;

  ShiftReport report;
  report.rank = aligned.xbar.cols();
  report.lambda = lambda_echo;
  report.normalized = normalize;
  report.scores.reserve(aligned.vocab.size());
  for (int i = 0; i < aligned.vocab.size(); ++i) {
    report.scores.emplace_back(aligned.vocab.word(i),
                               (a.row(i) - b.row(i)).norm());
  }
  std::sort(report.scores.begin(), report.scores.end(),
            [](const auto& x, const auto& y) {
              if (x.second != y.second) return x.second > y.second;
              return x.first < y.first;
            });
  return report;
}

int top_k_overlap(const ShiftReport& report, const std::set<std::string>& gold,
                  int n) {
  if (n < 1 || static_cast<std::size_t>(n) > report.size()) {
    throw std::invalid_argument("top_k_overlap: n out of range");
  }
  int k = 0;
  for (int i = 0; i < n; ++i) {
    if (gold.count(report.scores[i].first) > 0) ++k;
  }
  return k;
}

namespace {

void check_params(const HypergeomParams& p) {
  if (p.population < 1) {
    throw std::invalid_argument("hypergeometric: population V must be >= 1");
  }
  if (p.successes < 0 || p.successes > p.population) {
    throw std::invalid_argument("hypergeometric: need 0 <= K <= V");
  }
  if (p.draws < 0 || p.draws > p.population) {
    throw std::invalid_argument("hypergeometric: need 0 <= n <= V");
  }
}

double log_choose(std::int64_t n, std::int64_t k) {
  return std::lgamma(static_cast<double>(n + 1)) -
         std::lgamma(static_cast<double>(k + 1)) -
         std::lgamma(static_cast<double>(n - k + 1));
}

std::int64_t support_low(const HypergeomParams& p) {
  return std::max<std::int64_t>(0, p.draws + p.successes - p.population);
}

std::int64_t support_high(const HypergeomParams& p) {
  return std::min(p.draws, p.successes);
}

double pmf_at(const HypergeomParams& p, std::int64_t k) {
  if (k < support_low(p) || k > support_high(p)) return 0.0;
  const double log_p = log_choose(p.successes, k) +
                       log_choose(p.population - p.successes, p.draws - k) -
                       log_choose(p.population, p.draws);
  return std::exp(log_p);
}

}  // namespace

double hypergeom_pmf(const HypergeomParams& p) {
  check_params(p);
  return pmf_at(p, p.observed);
}

std::pair<double, double> hypergeom_mean_std(const HypergeomParams& p) {
  check_params(p);
  if (p.population < 2) {
    throw std::invalid_argument("hypergeom_mean_std: V must be >= 2");
  }
  const double v = static_cast<double>(p.population);
  const double frac = static_cast<double>(p.successes) / v;
  const double n = static_cast<double>(p.draws);
  const double mean = n * frac;
  const double variance = n * frac * (1.0 - frac) * (v - n) / (v - 1.0);
  return {mean, std::sqrt(variance)};
}

double tail_pvalue(const HypergeomParams& p) {
  check_params(p);
  const std::int64_t low = support_low(p);
  const std::int64_t high = support_high(p);
  if (p.observed <= low) return 1.0;
  if (p.observed > high) return 0.0;
  double sum = 0.0;
  for (std::int64_t k = p.observed; k <= high; ++k) sum += pmf_at(p, k);
  return std::min(1.0, sum);
}

namespace {

std::string verdict_for(double p_value) {
  std::ostringstream out;
  if (p_value < 0.001) {
    out << "highly significant";
  } else if (p_value < 0.01) {
    out << "significant";
  } else if (p_value < 0.05) {
    out << "weakly significant";
  } else {
    out << "consistent with chance";
  }
  out << " (p = " << p_value << ")";
  return out.str();
}

}  // namespace

SignificanceReport significance_from_params(const HypergeomParams& p) {
  SignificanceReport report;
  report.params = p;
  std::tie(report.mean, report.stddev) = hypergeom_mean_std(p);
  report.pmf_at_k = hypergeom_pmf(p);
  report.p_value = tail_pvalue(p);
  report.verdict = verdict_for(report.p_value);
  return report;
}

SignificanceReport significance_report(const ShiftReport& report,
                                       const std::set<std::string>& gold, int n) {
  HypergeomParams p;
  p.population = static_cast<std::int64_t>(report.size());
  std::int64_t in_gold = 0;
  for (const auto& [word, score] : report.scores) {
    (void)score;
    if (gold.count(word) > 0) ++in_gold;
  }
  if (in_gold == 0) {
    throw std::runtime_error(
        "significance_report: gold lexicon does not intersect the vocabulary");
  }
  p.successes = in_gold;
  p.draws = n;
  p.observed = top_k_overlap(report, gold, n);
  return significance_from_params(p);
}

std::set<std::string> load_gold_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open gold lexicon: " + path);
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto tokens = tokenize(line);
    for (const auto& tok : tokens) words.insert(tok);
  }
  return words;
}

}  // namespace daemb
