#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace isochrono {

/// Predicted speech duration of one text.
struct DurationEstimate {
    double seconds = 0.0;
    std::string predictor_id;
    std::size_t text_units = 0; ///< token count of the text the estimate is for

    /// Throws InvalidInput if seconds is negative or non-finite, or the id is empty.
    void validate() const;
};

struct SegmentMetrics {
    double icm = 0.0;
    double qe = 0.0;
    double aicm = 0.0;
};

/// Per-system summary. `aicm_from_means` is the headline value.
struct AggregateMetrics {
    double mean_icm = 0.0;
    double mean_qe = 0.0;
    double aicm_from_means = 0.0;
    double mean_segment_aicm = 0.0;
    std::size_t n_segments = 0;
};

enum class IcmMode {
    absolute, ///< |orig - trans| / orig
    squared,  ///< (|orig - trans| / orig)^2, kept for comparison only
};

/// Relative deviation of the translated duration from the original one,
/// normalised by the original. Not symmetric and not clamped: values above 1
/// mean the translation runs more than twice as long.
double compute_icm(const DurationEstimate &original, const DurationEstimate &translated,
                   IcmMode mode = IcmMode::absolute);

/// (1 - icm) * qe. Negative when icm > 1 and qe > 0.
double compute_aicm(double icm, double qe);

/// Builds a SegmentMetrics with aicm derived from icm and qe.
SegmentMetrics make_segment_metrics(double icm, double qe);

/// Arithmetic means over segments, plus both A-ICM variants.
AggregateMetrics aggregate(std::span<const SegmentMetrics> per_segment);

/// Half-up rounding to two decimals.
double round_for_display(double value);

/// Two-decimal rounding with trailing zeros trimmed: 2.90 -> "2.9", 3.00 -> "3".
std::string format_metric(double value);

} // namespace isochrono
