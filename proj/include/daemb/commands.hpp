#ifndef DAEMB_COMMANDS_HPP
#define DAEMB_COMMANDS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>

#include "daemb/config.hpp"
#include "daemb/shift.hpp"
#include "daemb/synth.hpp"

namespace daemb {

/// Each command writes canonical outputs under cfg.out_dir (byte-identical
/// across reruns with the same config and seed); wall-clock timings go to a
/// separate sidecar. The returned structs expose the written paths plus the
/// key in-memory results so callers need not re-parse files.

struct BuildDsOutputs {
  std::string embeddings;  // GloVe-style text
  std::string sidecar;     // build parameters and warnings
};
BuildDsOutputs cmd_build_ds(const RunConfig& cfg);

struct AlignOutputs {
  std::string view_a;  // projected generic view
  std::string view_b;  // projected DS view
  std::string header;  // config echo + canonical correlations
  Vector correlations;
};
AlignOutputs cmd_align(const RunConfig& cfg);

struct TrainOutputs {
  std::string report;
  std::string timing_sidecar;
  std::string model_path;
  Metrics test_metrics;
  TrainedModel model;
};
TrainOutputs cmd_train(const RunConfig& cfg);

struct EvalOutputs {
  std::string report;
  Metrics metrics;
};
EvalOutputs cmd_eval(const RunConfig& cfg);

struct ShiftOutputs {
  std::string csv;
  std::string significance_path;
  ShiftReport report;
  SignificanceReport significance;
};
ShiftOutputs cmd_shift(const RunConfig& cfg);

/// Prints mean, stddev, pmf and upper-tail p with six significant digits.
SignificanceReport cmd_hypergeom(std::int64_t population, std::int64_t successes,
                                 std::int64_t draws, std::int64_t observed,
                                 std::ostream& out);

SynthPaths cmd_synth(const RunConfig& cfg);

}  // namespace daemb

#endif
