// Acceptance suite: exercises each release criterion end to end and prints
// one pass/fail line per criterion. Exits non-zero if any criterion fails.

#include <boost/multiprecision/cpp_int.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <vector>

#include "daemb/adaptation.hpp"
#include "daemb/commands.hpp"
#include "tiny_net.hpp"

using namespace daemb;

namespace {

namespace fs = std::filesystem;

int failures = 0;

void report(const std::string& name, bool ok, double seconds,
            const std::string& detail) {
  std::printf("[%s] %-28s (%.1fs) %s\n", ok ? "PASS" : "FAIL", name.c_str(),
              seconds, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void run(const std::string& name, const std::function<bool(std::string&)>& body) {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  report(name, ok, seconds, detail);
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "daemb_acceptance" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// ---------------------------------------------------------------------------
// 1. Hypergeometric reproduction

bool hypergeometric_reproduction(std::string& detail) {
  const HypergeomParams params{1573, 74, 200, 20};
  const auto [mean, stddev] = hypergeom_mean_std(params);
  const double pmf = hypergeom_pmf(params);
  const double tail = tail_pvalue(params);
  std::ostringstream msg;
  msg << "mean=" << mean << " stddev=" << stddev << " pmf=" << pmf
      << " p=" << tail;
  detail = msg.str();
  return std::abs(mean - 9.4088) <= 0.0001 && std::abs(stddev - 2.7984) <= 0.0001 &&
         std::abs(pmf - 0.000346) <= 0.000002 && std::abs(tail - 0.000524) <= 0.000002;
}

// ---------------------------------------------------------------------------
// 2. Exact-oracle equivalence

using BigInt = boost::multiprecision::cpp_int;

double exact_pmf(std::int64_t v, std::int64_t successes, std::int64_t n,
                 std::int64_t k, const std::vector<std::vector<BigInt>>& choose) {
  const BigInt num = choose[successes][k] * choose[v - successes][n - k];
  const BigInt den = choose[v][n];
  return boost::multiprecision::cpp_rational(num, den).convert_to<double>();
}

bool exact_oracle_equivalence(std::string& detail) {
  constexpr int kMaxV = 60;
  std::vector<std::vector<BigInt>> choose(kMaxV + 1);
  for (int n = 0; n <= kMaxV; ++n) {
    choose[n].assign(n + 1, 1);
    for (int k = 1; k < n; ++k) {
      choose[n][k] = choose[n - 1][k - 1] + choose[n - 1][k];
    }
  }

  double worst_rel = 0.0;
  long checked = 0;
  for (std::int64_t v = 1; v <= kMaxV; ++v) {
    for (std::int64_t successes = 0; successes <= v; ++successes) {
      for (std::int64_t n = 0; n <= v; ++n) {
        const std::int64_t low = std::max<std::int64_t>(0, n + successes - v);
        const std::int64_t high = std::min(n, successes);
        for (std::int64_t k = low; k <= high; ++k) {
          const double exact = exact_pmf(v, successes, n, k, choose);
          const double approx = hypergeom_pmf({v, successes, n, k});
          worst_rel = std::max(worst_rel, std::abs(approx - exact) / exact);
          ++checked;
        }
      }
    }
  }

  double worst_sum_err = 0.0;
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const std::int64_t v = 2 + static_cast<std::int64_t>(rng.uniform_below(4999));
    const std::int64_t successes =
        static_cast<std::int64_t>(rng.uniform_below(v + 1));
    const std::int64_t n = static_cast<std::int64_t>(rng.uniform_below(v + 1));
    double sum = 0.0;
    const std::int64_t low = std::max<std::int64_t>(0, n + successes - v);
    const std::int64_t high = std::min(n, successes);
    for (std::int64_t k = low; k <= high; ++k) {
      sum += hypergeom_pmf({v, successes, n, k});
    }
    worst_sum_err = std::max(worst_sum_err, std::abs(sum - 1.0));
  }

  std::ostringstream msg;
  msg << checked << " pmf values, worst rel err " << worst_rel
      << "; worst |sum-1| " << worst_sum_err;
  detail = msg.str();
  return worst_rel < 1e-10 && worst_sum_err < 1e-10;
}

// ---------------------------------------------------------------------------
// 3. CCA analytic oracle

bool cca_analytic_oracle(std::string& detail) {
  Rng rng(7);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index m = 200;
    Matrix x = rng_normal(rng, m, 1);
    Matrix y(m, 1);
    const double slope = rng.normal();
    for (Index i = 0; i < m; ++i) {
      y(i, 0) = slope * x(i, 0) + rng.normal();
    }
    CcaConfig cfg;
    cfg.lambda = 1e-9;
    const CcaModel model = fit_cca(x, y, cfg);

    const double mx = x.col(0).mean(), my = y.col(0).mean();
    const Vector cx = x.col(0).array() - mx;
    const Vector cy = y.col(0).array() - my;
    const double pearson =
        std::abs(cx.dot(cy) / std::sqrt(cx.squaredNorm() * cy.squaredNorm()));
    worst = std::max(worst, std::abs(model.correlations(0) - pearson));
  }
  std::ostringstream msg;
  msg << "50 pairs, worst |rho1 - |pearson|| = " << worst;
  detail = msg.str();
  return worst < 1e-6;
}

// ---------------------------------------------------------------------------
// 4. Gradient suite

bool gradient_suite(std::string& detail) {
  using daemb_tests::TinyNet;
  using daemb_tests::max_gradient_error;

  Rng rng(11);
  double worst = 0.0;

  // Adaptation scalars + classifier through the BoW composition.
  {
    TinyNet net;
    net.enc.kind = EncoderKind::bow;
    net.enc.dropout = 0.0;
    net.cnn = daemb_tests::random_cnn(daemb_tests::tiny_cnn_config(), 3, rng);
    net.lstm.fwd = daemb_tests::random_lstm_dir(3, 2, rng);
    net.lstm.bwd = daemb_tests::random_lstm_dir(3, 2, rng);
    net.cls = daemb_tests::random_classifier(3, 3, rng);
    worst = std::max(worst, max_gradient_error(net, 20, rng, 3, 5));
  }
  // CNN parameters (with adaptation and classifier in the loop).
  {
    TinyNet net;
    net.enc = daemb_tests::tiny_cnn_config();
    net.cnn = daemb_tests::random_cnn(net.enc, 4, rng);
    net.lstm.fwd = daemb_tests::random_lstm_dir(1, 1, rng);
    net.lstm.bwd = daemb_tests::random_lstm_dir(1, 1, rng);
    net.cls = daemb_tests::random_classifier(net.enc.sentence_dim, 3, rng);
    worst = std::max(worst, max_gradient_error(net, 20, rng, 4, 6));
  }
  // BiLSTM parameters.
  {
    TinyNet net;
    net.enc = daemb_tests::tiny_bilstm_config();
    net.lstm.fwd = daemb_tests::random_lstm_dir(2, 3, rng);
    net.lstm.bwd = daemb_tests::random_lstm_dir(2, 3, rng);
    net.cnn = daemb_tests::random_cnn(daemb_tests::tiny_cnn_config(), 2, rng);
    net.cls = daemb_tests::random_classifier(6, 3, rng);
    worst = std::max(worst, max_gradient_error(net, 20, rng, 2, 4));
  }

  std::ostringstream msg;
  msg << "60 instances across bow/cnn/bilstm, worst rel err " << worst;
  detail = msg.str();
  return worst < 1e-4;
}

// ---------------------------------------------------------------------------
// 5. SVD properties

bool svd_properties(std::string& detail) {
  Rng rng(13);
  double worst_recon = 0.0;
  bool sorted = true;
  for (int trial = 0; trial < 10; ++trial) {
    const Index rows = 50 + static_cast<Index>(rng.uniform_below(151));  // <= 200
    const Index cols = 20 + static_cast<Index>(rng.uniform_below(81));   // <= 100
    const Index rank = 1 + static_cast<Index>(rng.uniform_below(10));
    const Matrix a =
        rng_normal(rng, rows, rank) * rng_normal(rng, rank, cols);
    const SvdResult svd = truncated_svd(a, rank, 10, 4, rng);
    const Matrix recon = svd.u * svd.s.asDiagonal() * svd.vt;
    worst_recon = std::max(worst_recon, (a - recon).norm() / a.norm());
    for (Index i = 1; i < svd.s.size(); ++i) {
      if (svd.s(i) > svd.s(i - 1)) sorted = false;
    }
  }

  // Agreement with the exact route on small matrices.
  double worst_sv = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Index rows = 5 + static_cast<Index>(rng.uniform_below(26));  // <= 30
    const Index cols = 5 + static_cast<Index>(rng.uniform_below(26));
    const Matrix a = rng_normal(rng, rows, cols);
    const Index rank = std::min<Index>(5, std::min(rows, cols));
    const SvdResult svd = truncated_svd(a, rank, 10, 6, rng);
    auto [values, vectors] = sym_eig(Matrix(a.transpose() * a));
    (void)vectors;
    for (Index i = 0; i < rank; ++i) {
      const double exact = std::sqrt(std::max(0.0, values(i)));
      worst_sv = std::max(worst_sv, std::abs(svd.s(i) - exact) /
                                        std::max(1.0, exact));
    }
  }

  std::ostringstream msg;
  msg << "worst recon err " << worst_recon << ", worst sv err " << worst_sv;
  detail = msg.str();
  return worst_recon < 1e-6 && sorted && worst_sv < 1e-6;
}

// ---------------------------------------------------------------------------
// 6 & 7. Synthetic-pipeline criteria

RunConfig synth_world(const fs::path& dir, std::uint64_t seed) {
  RunConfig synth;
  synth.seed = seed;
  synth.out_dir = (dir / ("synth" + std::to_string(seed))).string();
  const SynthPaths paths = cmd_synth(synth);

  RunConfig world;
  world.seed = seed;
  world.corpus = paths.domain_a;
  world.corpus_b = paths.domain_b;
  world.dataset = paths.labeled;
  world.generic_embeddings = paths.generic;
  world.gold = paths.gold;
  world.dim = 50;
  return world;
}

bool planted_shift_recovery(std::string& detail) {
  const fs::path dir = scratch_dir("shift");
  int seeds_passed = 0;
  std::ostringstream msg;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RunConfig cfg = synth_world(dir, seed);
    cfg.out_dir = (dir / ("out" + std::to_string(seed))).string();
    cfg.lambda = 0.1;
    cfg.rank = 10;
    cfg.top_n = 20;
    const ShiftOutputs out = cmd_shift(cfg);
    const bool ok =
        out.significance.params.observed >= 7 && out.significance.p_value < 0.01;
    if (ok) ++seeds_passed;
    msg << "s" << seed << ":k=" << out.significance.params.observed
        << ",p=" << out.significance.p_value << " ";
  }
  msg << "-> " << seeds_passed << "/5 seeds";
  detail = msg.str();
  return seeds_passed >= 4;
}

bool adaptation_benefit_trend(std::string& detail) {
  const fs::path dir = scratch_dir("benefit");
  std::ostringstream msg;
  bool all_ok = true;

  for (const EncoderKind kind : {EncoderKind::bow, EncoderKind::cnn}) {
    int seeds_with_gap = 0;
    double mean_gap_large = 0.0, mean_gap_small = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      RunConfig cfg = synth_world(dir, seed);
      cfg.max_epochs = 30;
      cfg.encoder.kind = kind;
      if (kind == EncoderKind::cnn) {
        cfg.encoder.cnn_widths = {3, 4, 5};
        cfg.encoder.cnn_maps = {20, 20, 20};
        cfg.encoder.sentence_dim = 60;
      }
      double gap[2] = {0.0, 0.0};
      int idx = 0;
      for (std::size_t train_size : {2500, 1000}) {
        cfg.train_size = train_size;
        cfg.mode = TrainMode::vanilla;
        cfg.out_dir = (dir / "run").string();
        const double vanilla = cmd_train(cfg).test_metrics.accuracy;
        cfg.mode = TrainMode::adapt_only;
        const double adapted = cmd_train(cfg).test_metrics.accuracy;
        gap[idx++] = adapted - vanilla;
      }
      if (gap[0] >= 0.01) ++seeds_with_gap;
      mean_gap_large += gap[0] / 5.0;
      mean_gap_small += gap[1] / 5.0;
    }
    const bool enough_seeds = seeds_with_gap >= 4;
    const bool no_shrink = mean_gap_small >= mean_gap_large;
    all_ok = all_ok && enough_seeds && no_shrink;
    msg << (kind == EncoderKind::bow ? "bow" : "cnn") << ": " << seeds_with_gap
        << "/5 seeds gap>=1pt, mean gap " << 100.0 * mean_gap_large << "pt@2500 "
        << 100.0 * mean_gap_small << "pt@1000; ";
  }
  detail = msg.str();
  return all_ok;
}

// ---------------------------------------------------------------------------
// 8. Baseline identities

bool baseline_identities(std::string& detail) {
  Rng rng(17);

  // micro-F == accuracy, exactly, across random multi-class evaluations.
  bool micro_exact = true;
  for (int trial = 0; trial < 20; ++trial) {
    const int classes = 2 + static_cast<int>(rng.uniform_below(4));
    const Index d = 3;
    EmbeddingMatrix emb;
    std::vector<std::string> words;
    for (int i = 0; i < 12; ++i) words.push_back("w" + std::to_string(i));
    emb.vocab = Vocabulary::from_words(words);
    emb.vectors = rng_normal(rng, 12, d);
    const EmbeddingInput input = EmbeddingInput::from(emb, "random");

    TrainedModel model;
    model.enc.kind = EncoderKind::bow;
    model.cls = daemb_tests::random_classifier(d, classes, rng);
    Dataset data;
    for (int c = 0; c < classes; ++c) data.labels.push_back(std::to_string(c));
    for (int i = 0; i < 60; ++i) {
      Document doc;
      doc.label = static_cast<int>(rng.uniform_below(classes));
      const int len = 1 + static_cast<int>(rng.uniform_below(6));
      for (int t = 0; t < len; ++t) {
        doc.tokens.push_back(words[rng.uniform_below(words.size())]);
      }
      data.docs.push_back(doc);
    }
    const Metrics m = evaluate(model, input, data);
    if (m.micro_f != m.accuracy) micro_exact = false;
  }

  // The 0.5/0.5 adaptation layer reproduces the fixed-mix BoW baseline.
  double worst_mix = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    AlignedPairs pairs;
    std::vector<std::string> words;
    for (int i = 0; i < 8; ++i) words.push_back("w" + std::to_string(i));
    pairs.vocab = Vocabulary::from_words(words);
    pairs.xbar = rng_normal(rng, 8, 5);
    pairs.ybar = rng_normal(rng, 8, 5);
    const EmbeddingMatrix mixed = adapt_matrix({0.5, 0.5}, pairs);

    EmbeddingMatrix view_a{pairs.vocab, pairs.xbar, EmbeddingRole::projected};
    EmbeddingMatrix view_b{pairs.vocab, pairs.ybar, EmbeddingRole::projected};
    Document doc;
    const int len = 1 + static_cast<int>(rng.uniform_below(8));
    for (int t = 0; t < len; ++t) {
      doc.tokens.push_back(words[rng.uniform_below(words.size())]);
    }
    const Vector direct = bow_encode(doc, mixed);
    const Vector two_route =
        0.5 * bow_encode(doc, view_a) + 0.5 * bow_encode(doc, view_b);
    worst_mix = std::max(worst_mix, (direct - two_route).cwiseAbs().maxCoeff());
  }

  std::ostringstream msg;
  msg << "micro-F identity " << (micro_exact ? "exact" : "BROKEN")
      << ", fixed-mix max deviation " << worst_mix;
  detail = msg.str();
  return micro_exact && worst_mix < 1e-12;
}

// ---------------------------------------------------------------------------
// 9. Determinism of CLI commands

bool cli_determinism(std::string& detail) {
  const fs::path dir = scratch_dir("determinism");

  // synth
  RunConfig synth;
  synth.seed = 3;
  synth.synth_docs_per_domain = 300;
  synth.synth_labeled_docs = 400;
  synth.out_dir = (dir / "synth1").string();
  const SynthPaths p1 = cmd_synth(synth);
  synth.out_dir = (dir / "synth2").string();
  const SynthPaths p2 = cmd_synth(synth);
  bool ok = slurp(p1.domain_a) == slurp(p2.domain_a) &&
            slurp(p1.domain_b) == slurp(p2.domain_b) &&
            slurp(p1.labeled) == slurp(p2.labeled) &&
            slurp(p1.generic) == slurp(p2.generic) &&
            slurp(p1.gold) == slurp(p2.gold) &&
            slurp(p1.manifest) == slurp(p2.manifest);

  RunConfig world;
  world.seed = 3;
  world.corpus = p1.domain_a;
  world.corpus_b = p1.domain_b;
  world.dataset = p1.labeled;
  world.generic_embeddings = p1.generic;
  world.gold = p1.gold;
  world.dim = 40;
  world.lambda = 0.1;
  world.rank = 10;
  world.max_epochs = 5;
  world.top_n = 20;

  // build-ds
  world.out_dir = (dir / "ds").string();
  const BuildDsOutputs ds = cmd_build_ds(world);
  const std::string ds_bytes = slurp(ds.embeddings);
  const std::string ds_meta = slurp(ds.sidecar);
  cmd_build_ds(world);
  ok = ok && slurp(ds.embeddings) == ds_bytes && slurp(ds.sidecar) == ds_meta;

  // align
  world.ds_embeddings = ds.embeddings;
  world.out_dir = (dir / "align").string();
  const AlignOutputs align = cmd_align(world);
  const std::string va = slurp(align.view_a), vb = slurp(align.view_b);
  const std::string header = slurp(align.header);
  cmd_align(world);
  ok = ok && slurp(align.view_a) == va && slurp(align.view_b) == vb &&
       slurp(align.header) == header;

  // train (model artifact + canonical report)
  world.mode = TrainMode::adapt_only;
  world.out_dir = (dir / "train").string();
  const TrainOutputs train1 = cmd_train(world);
  const std::string report = slurp(train1.report);
  const std::string model_bytes = slurp(train1.model_path);
  const TrainOutputs train2 = cmd_train(world);
  ok = ok && slurp(train2.report) == report && slurp(train2.model_path) == model_bytes;

  // eval
  world.model = train1.model_path;
  world.out_dir = (dir / "eval").string();
  const EvalOutputs eval1 = cmd_eval(world);
  const std::string eval_report = slurp(eval1.report);
  cmd_eval(world);
  ok = ok && slurp(eval1.report) == eval_report;

  // shift
  world.model.clear();
  world.out_dir = (dir / "shift").string();
  const ShiftOutputs shift1 = cmd_shift(world);
  const std::string csv = slurp(shift1.csv);
  const std::string sig = slurp(shift1.significance_path);
  cmd_shift(world);
  ok = ok && slurp(shift1.csv) == csv && slurp(shift1.significance_path) == sig;

  // hypergeom (stdout is the canonical output)
  std::ostringstream h1, h2;
  cmd_hypergeom(1573, 74, 200, 20, h1);
  cmd_hypergeom(1573, 74, 200, 20, h2);
  ok = ok && h1.str() == h2.str();

  detail = ok ? "synth/build-ds/align/train/eval/shift/hypergeom byte-identical"
              : "at least one command produced differing bytes";
  return ok;
}

// ---------------------------------------------------------------------------
// 10. Gold fixture integrity

bool gold_fixture_integrity(std::string& detail) {
  const std::set<std::string> expected = {
      "action", "amendment", "attack", "budget", "burden", "business",
      "candidate", "care", "class", "college", "congress", "control", "cost",
      "court", "crisis", "deal", "debate", "debt", "decision", "defense",
      "deficit", "democrat", "development", "divide", "dream", "education",
      "fact", "force", "freedom", "fund", "funding", "future", "generation",
      "government", "governor", "health", "help", "honor", "hope", "income",
      "information", "insurance", "justice", "labor", "leader", "leadership",
      "legislation", "media", "need", "order", "pledge", "police", "poll",
      "power", "president", "problem", "program", "protection", "race",
      "reform", "republican", "right", "risk", "rule", "school", "spending",
      "state", "truth", "value", "violence", "wealth", "women", "work",
      "world"};
  const auto gold =
      load_gold_lexicon(std::string(DAEMB_DATA_DIR) + "/gold_libcon.txt");
  std::ostringstream msg;
  msg << gold.size() << " words loaded, expected exactly the 74 fixture words";
  detail = msg.str();
  return expected.size() == 74 && gold == expected;
}

}  // namespace

int main() {
  std::printf("daemb acceptance suite (%s)\n", kToolVersion);
  run("hypergeometric-reproduction", hypergeometric_reproduction);
  run("exact-oracle-equivalence", exact_oracle_equivalence);
  run("cca-analytic-oracle", cca_analytic_oracle);
  run("gradient-suite", gradient_suite);
  run("svd-properties", svd_properties);
  run("planted-shift-recovery", planted_shift_recovery);
  run("adaptation-benefit-trend", adaptation_benefit_trend);
  run("baseline-identities", baseline_identities);
  run("cli-determinism", cli_determinism);
  run("gold-fixture-integrity", gold_fixture_integrity);
  if (failures == 0) {
    std::printf("ACCEPTANCE: all 10 criteria passed\n");
  } else {
    std::printf("ACCEPTANCE: %d criteria FAILED\n", failures);
  }
  return failures == 0 ? 0 : 1;
}
