#pragma once

#include "isochrono/duration.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace isochrono {

/// One reference/prediction pair, keyed by the word count of its text.
struct DurationPair {
    std::size_t word_count = 0;
    double reference_seconds = 0.0;
    double predicted_seconds = 0.0;
};

struct ErrorBin {
    std::size_t bin_start = 0;
    double rel_abs_error = 0.0; ///< mean (or median) of |ref - pred| / ref
    std::size_t n = 0;
};

/// Bins sorted by start; empty bins are not emitted.
struct ErrorCurve {
    std::vector<ErrorBin> bins;
};

enum class BinStatistic { mean, median };

ErrorCurve build_error_curve(std::span<const DurationPair> pairs, std::size_t bin_width,
                             BinStatistic statistic = BinStatistic::mean);

/// Smallest bin start from which every later bin stays within `tolerance`.
std::optional<std::size_t> find_reliability_threshold(const ErrorCurve &curve, double tolerance);

struct ReferenceDuration {
    std::string text;
    LanguageCode language;
    double seconds = 0.0;
};

/// Reads JSONL records {text, language, seconds}.
std::vector<ReferenceDuration> read_reference_durations(std::istream &in);

struct CandidateResult {
    std::string predictor_id;
    ErrorCurve curve;
    std::optional<std::size_t> threshold;
    std::vector<DurationPair> points; ///< raw pairs behind the curve
    std::vector<std::string> item_errors;
    bool failed = false; ///< more than half the references could not be predicted
};

struct ValidationOptions {
    std::size_t bin_width = 5;
    double tolerance = 0.05;
    BinStatistic statistic = BinStatistic::mean;
};

/// Runs every candidate over the same references. A candidate that fails on
/// more than half the items is marked failed; the others are unaffected.
std::vector<CandidateResult> compare_predictors(std::span<const ReferenceDuration> reference,
                                                std::span<const DurationPredictor *const> candidates,
                                                const ValidationOptions &options = {});

void write_curve_csv(std::ostream &out, const ErrorCurve &curve);
void write_points_csv(std::ostream &out, std::span<const DurationPair> points);

} // namespace isochrono
