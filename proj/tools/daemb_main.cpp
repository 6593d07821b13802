#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "daemb/commands.hpp"

namespace {

using daemb::RunConfig;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> train_size;
  std::optional<std::string> mode;
  std::optional<std::string> encoder;
  std::optional<int> top_n;
  bool no_normalize = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--config", flags->config_path, "run configuration file");
  cmd->add_option("--seed", flags->seed, "seed override");
  cmd->add_option("--out", flags->out_dir, "output directory override");
  cmd->add_option("--train-size", flags->train_size,
                  "subsample the train split to this many examples");
  cmd->add_option("--mode", flags->mode,
                  "training mode: vanilla, adapt-only or end-to-end");
  cmd->add_option("--encoder", flags->encoder, "encoder: bow, cnn or bilstm");
  cmd->add_option("--top-n", flags->top_n, "top-n cut for the shift overlap");
  cmd->add_flag("--no-normalize", flags->no_normalize,
                "skip norm standardization before shift scoring");
}

// Flags win over config-file values.
RunConfig resolve(const CommonFlags& flags) {
  RunConfig cfg;
  if (!flags.config_path.empty()) cfg = daemb::load_run_config(flags.config_path);
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.out_dir) cfg.out_dir = *flags.out_dir;
  if (flags.train_size) cfg.train_size = *flags.train_size;
  if (flags.mode) {
    if (*flags.mode == "vanilla") cfg.mode = daemb::TrainMode::vanilla;
    else if (*flags.mode == "adapt-only") cfg.mode = daemb::TrainMode::adapt_only;
    else if (*flags.mode == "end-to-end") cfg.mode = daemb::TrainMode::end_to_end;
    else throw std::runtime_error("unknown --mode: " + *flags.mode);
  }
  if (flags.encoder) {
    if (*flags.encoder == "bow") cfg.encoder.kind = daemb::EncoderKind::bow;
    else if (*flags.encoder == "cnn") cfg.encoder.kind = daemb::EncoderKind::cnn;
    else if (*flags.encoder == "bilstm") cfg.encoder.kind = daemb::EncoderKind::bilstm;
    else throw std::runtime_error("unknown --encoder: " + *flags.encoder);
  }
  if (flags.top_n) cfg.top_n = *flags.top_n;
  if (flags.no_normalize) cfg.normalize = false;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"domain-adapted word embeddings: build, align, train, analyze shift"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::int64_t hg_population = 0, hg_successes = 0, hg_draws = 0, hg_observed = 0;

  auto* build_ds = app.add_subcommand(
      "build-ds", "build LSA domain-specific embeddings from a corpus");
  auto* align = app.add_subcommand(
      "align", "fit KCCA alignment between generic and DS embeddings");
  auto* train = app.add_subcommand("train", "train an encoder + classifier");
  auto* eval = app.add_subcommand("eval", "evaluate a model artifact on a dataset");
  auto* shift = app.add_subcommand(
      "shift", "rank cross-domain word shift and test significance");
  auto* synth = app.add_subcommand(
      "synth", "generate a synthetic two-domain corpus with planted shifts");
  for (auto* cmd : {build_ds, align, train, eval, shift, synth}) {
    add_common_flags(cmd, &flags);
  }

  auto* hypergeom = app.add_subcommand(
      "hypergeom", "exact hypergeometric significance for V K n k");
  hypergeom->add_option("V", hg_population, "population size")->required();
  hypergeom->add_option("K", hg_successes, "successes in the population")->required();
  hypergeom->add_option("n", hg_draws, "draws")->required();
  hypergeom->add_option("k", hg_observed, "observed successes")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (build_ds->parsed()) {
      const auto out = daemb::cmd_build_ds(resolve(flags));
      std::cout << "wrote " << out.embeddings << "\n";
    } else if (align->parsed()) {
      const auto out = daemb::cmd_align(resolve(flags));
      std::cout << "wrote " << out.view_a << ", " << out.view_b << "\n";
    } else if (train->parsed()) {
      const auto out = daemb::cmd_train(resolve(flags));
      std::cout << "wrote " << out.report << "\n";
    } else if (eval->parsed()) {
      const auto out = daemb::cmd_eval(resolve(flags));
      std::cout << "wrote " << out.report << "\n";
    } else if (shift->parsed()) {
      const auto out = daemb::cmd_shift(resolve(flags));
      std::cout << "wrote " << out.csv << "\n";
    } else if (synth->parsed()) {
      const auto out = daemb::cmd_synth(resolve(flags));
      std::cout << "wrote " << out.manifest << "\n";
    } else if (hypergeom->parsed()) {
      daemb::cmd_hypergeom(hg_population, hg_successes, hg_draws, hg_observed,
                           std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
