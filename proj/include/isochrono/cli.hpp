#pragma once

#include "isochrono/corpus.hpp"
#include "isochrono/evaluation.hpp"
#include "isochrono/report.hpp"
#include "isochrono/validation.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace isochrono::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_input_error = 2,
    exit_evaluation_failure = 3,
    exit_bridge_failure = 4,
};

struct FilterArgs {
    std::string corpus;
    std::string out; ///< directory receiving corpus.jsonl and histogram.csv
    FilterPolicy policy;
    LanguageCode source_language = "en";
    std::size_t histogram_bin_width = 1;
};

struct EvaluateArgs {
    std::string corpus;
    std::string systems_dir; ///< one subdirectory per system holding <pair>.txt or <pair>.jsonl
    std::string pair;
    std::string predictor; ///< rate:<profiles.json> | bridge[:<address>]
    std::string qe;        ///< file:<scores.jsonl> | bridge[:<address>] | constant:<value>
    std::string out;
    std::size_t max_in_flight = 1;
    IcmMode icm_mode = IcmMode::absolute;
    FlagPolicy flag_policy;
    TableSpec table; ///< pair is filled in from `pair`
};

struct ValidateArgs {
    std::string reference; ///< JSONL {text, language, seconds}
    /// rate:<profiles.json> | rate-fit:<characters|tokens> | table:<durations.jsonl> | bridge[:<address>]
    std::vector<std::string> predictors;
    std::size_t bin_width = 5;
    double tolerance = 0.05;
    BinStatistic statistic = BinStatistic::mean;
    bool raw_points = false;
    std::string out;
};

struct SynthArgs {
    std::string out;
    std::uint64_t seed = 1;
    std::size_t segments = 200;
};

/// Builds a predictor from its command-line spec. `reference` feeds rate-fit.
std::unique_ptr<DurationPredictor> make_predictor(const std::string &spec,
                                                  std::span<const ReferenceDuration> reference = {});
std::unique_ptr<QEProvider> make_qe_provider(const std::string &spec);

int cmd_filter(const FilterArgs &args, std::ostream &log, std::ostream &err);
int cmd_evaluate(const EvaluateArgs &args, std::ostream &log, std::ostream &err);
int cmd_validate(const ValidateArgs &args, std::ostream &log, std::ostream &err);
/// Writes a small synthetic corpus, submissions, QE scores, rate profiles and
/// reference durations for smoke runs. All randomness comes from `seed`.
int cmd_synth(const SynthArgs &args, std::ostream &log, std::ostream &err);

/// Full command-line entry point.
int run(int argc, char **argv);

} // namespace isochrono::cli
