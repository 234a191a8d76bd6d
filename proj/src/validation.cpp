#include "isochrono/validation.hpp"

#include "isochrono/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>

namespace isochrono {

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace

ErrorCurve build_error_curve(std::span<const DurationPair> pairs, std::size_t bin_width,
                             BinStatistic statistic) {
    if (bin_width == 0) throw InvalidInput("bin width must be at least 1");
    std::map<std::size_t, std::vector<double>> bins;
    for (const auto &p : pairs) {
        if (!(p.reference_seconds > 0.0) || !(p.predicted_seconds > 0.0) ||
            !std::isfinite(p.reference_seconds) || !std::isfinite(p.predicted_seconds)) {
            throw InvalidInput("durations in an error curve must be positive");
        }
        const double err = std::fabs(p.reference_seconds - p.predicted_seconds) / p.reference_seconds;
        bins[(p.word_count / bin_width) * bin_width].push_back(err);
    }
    ErrorCurve curve;
    for (auto &[start, errs] : bins) {
        double stat = 0.0;
        if (statistic == BinStatistic::median) {
            stat = median(errs);
        } else {
            for (double e : errs) stat += e;
            stat /= static_cast<double>(errs.size());
        }
        curve.bins.push_back({start, stat, errs.size()});
    }
    return curve;
}

std::optional<std::size_t> find_reliability_threshold(const ErrorCurve &curve, double tolerance) {
    if (!(tolerance >= 0.0)) throw InvalidInput("tolerance must be nonnegative");
    std::optional<std::size_t> threshold;
    for (auto it = curve.bins.rbegin(); it != curve.bins.rend(); ++it) {
        if (it->rel_abs_error > tolerance) break;
        threshold = it->bin_start;
    }
    return threshold;
}

std::vector<ReferenceDuration> read_reference_durations(std::istream &in) {
    std::vector<ReferenceDuration> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error &e) {
            throw InvalidInput("reference line " + std::to_string(line_no) + ": " + e.what());
        }
        for (const char *key : {"text", "language", "seconds"}) {
            if (!j.contains(key)) throw SchemaError(key);
        }
        ReferenceDuration r;
        try {
            r = {j["text"].get<std::string>(), j["language"].get<std::string>(), j["seconds"].get<double>()};
        } catch (const nlohmann::json::type_error &e) {
            throw InvalidInput("reference line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!(r.seconds > 0.0)) {
            throw InvalidInput("reference line " + std::to_string(line_no) + ": seconds must be positive");
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<CandidateResult> compare_predictors(std::span<const ReferenceDuration> reference,
                                                std::span<const DurationPredictor *const> candidates,
                                                const ValidationOptions &options) {
    if (candidates.empty()) throw InvalidInput("compare_predictors needs at least one candidate");
    std::vector<std::size_t> words;
    words.reserve(reference.size());
    for (const auto &r : reference) {
        if (!(r.seconds > 0.0)) throw InvalidInput("reference durations must be positive");
        words.push_back(text::count_tokens(r.text));
    }

    std::vector<CandidateResult> results;
    for (const auto *candidate : candidates) {
        CandidateResult res;
        res.predictor_id = candidate->id();
        for (std::size_t i = 0; i < reference.size(); ++i) {
            const auto &r = reference[i];
            try {
                const auto est = candidate->predict(r.text, r.language);
                if (!(est.seconds > 0.0)) {
                    res.item_errors.push_back("item " + std::to_string(i) + ": nonpositive prediction");
                    continue;
                }
                res.points.push_back({words[i], r.seconds, est.seconds});
            } catch (const PredictionError &e) {
                res.item_errors.push_back("item " + std::to_string(i) + ": " + e.what());
            } catch (const InvalidInput &e) {
                res.item_errors.push_back("item " + std::to_string(i) + ": " + e.what());
            }
        }
        if (2 * res.item_errors.size() > reference.size()) {
            res.failed = true;
        } else {
            res.curve = build_error_curve(res.points, options.bin_width, options.statistic);
            res.threshold = find_reliability_threshold(res.curve, options.tolerance);
        }
        results.push_back(std::move(res));
    }
    return results;
}

void write_curve_csv(std::ostream &out, const ErrorCurve &curve) {
    out << "bin_start,mean_rel_abs_error,n\n";
    for (const auto &b : curve.bins) {
        out << b.bin_start << ',' << format_double(b.rel_abs_error) << ',' << b.n << '\n';
    }
}

void write_points_csv(std::ostream &out, std::span<const DurationPair> points) {
    out << "word_count,reference_seconds,predicted_seconds,rel_abs_error\n";
    for (const auto &p : points) {
        out << p.word_count << ',' << format_double(p.reference_seconds) << ','
            << format_double(p.predicted_seconds) << ','
            << format_double(std::fabs(p.reference_seconds - p.predicted_seconds) / p.reference_seconds) << '\n';
    }
}

} // namespace isochrono
