#include "isochrono/metrics.hpp"

#include "isochrono/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace isochrono {

void DurationEstimate::validate() const {
    if (!std::isfinite(seconds) || seconds < 0.0) {
        throw InvalidInput("duration must be a finite nonnegative number of seconds");
    }
    if (predictor_id.empty()) throw InvalidInput("duration estimate has no predictor id");
}

double compute_icm(const DurationEstimate &original, const DurationEstimate &translated,
                   IcmMode mode) {
    original.validate();
    translated.validate();
    if (original.seconds == 0.0) {
        throw InvalidInput("original duration is zero; ICM is undefined");
    }
    const double rel = std::fabs(original.seconds - translated.seconds) / original.seconds;
    return mode == IcmMode::squared ? rel * rel : rel;
}

double compute_aicm(double icm, double qe) {
    if (!std::isfinite(icm) || !std::isfinite(qe)) {
        throw InvalidInput("A-ICM inputs must be finite");
    }
    if (icm < 0.0) throw InvalidInput("ICM must be nonnegative");
    return (1.0 - icm) * qe;
}

SegmentMetrics make_segment_metrics(double icm, double qe) {
    return {icm, qe, compute_aicm(icm, qe)};
}

AggregateMetrics aggregate(std::span<const SegmentMetrics> per_segment) {
    if (per_segment.empty()) throw EmptyAggregateError();

    double sum_icm = 0.0;
    double sum_qe = 0.0;
    double sum_aicm = 0.0;
    for (const auto &m : per_segment) {
        if (!std::isfinite(m.icm) || !std::isfinite(m.qe) || !std::isfinite(m.aicm)) {
            throw InvalidInput("segment metrics must be finite");
        }
        sum_icm += m.icm;
        sum_qe += m.qe;
        sum_aicm += m.aicm;
    }
    const auto n = static_cast<double>(per_segment.size());
    AggregateMetrics out;
    out.mean_icm = sum_icm / n;
    out.mean_qe = sum_qe / n;
    out.aicm_from_means = (1.0 - out.mean_icm) * out.mean_qe;
    out.mean_segment_aicm = sum_aicm / n;
    out.n_segments = per_segment.size();
    return out;
}

double round_for_display(double value) {
    // The nudge keeps decimal halves such as 2.675 (stored as 2.67499...) rounding up.
    const double scaled = value * 100.0;
    const double nudge = 1e-9 * std::max(1.0, std::fabs(scaled));
    return std::floor(scaled + 0.5 + nudge) / 100.0;
}

std::string format_metric(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", round_for_display(value));
    std::string s = buf;
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    if (s == "-0") s = "0";
    return s;
}

} // namespace isochrono
