#pragma once

#include "isochrono/corpus.hpp"
#include "isochrono/duration.hpp"
#include "isochrono/metrics.hpp"

#include <json.hpp>

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace isochrono {

class BridgeClient;

/// Everything a quality estimator may key on for one segment.
struct QERequest {
    std::string_view segment_id;
    std::string_view system;
    std::string_view source_text;
    std::string_view translated_text;
    std::string_view source_language;
    std::string_view target_language;
};

/// Reference-free quality estimate of a translation. Deterministic per instance.
class QEProvider {
  public:
    virtual ~QEProvider() = default;
    /// Throws PredictionError when no score is available for the request.
    virtual double score(const QERequest &request) const = 0;
    virtual std::string id() const = 0;
    /// Upper bound on concurrent score() calls; 0 means unbounded.
    virtual std::size_t max_concurrency() const { return 0; }
};

/// Returns the same score for every request. Meant for tests and smoke runs.
class ConstantQEProvider final : public QEProvider {
  public:
    explicit ConstantQEProvider(double value);
    double score(const QERequest &) const override { return value_; }
    std::string id() const override;

  private:
    double value_;
};

/// Replays precomputed scores from JSONL records {segment_id, system, score}.
class FileQEProvider final : public QEProvider {
  public:
    explicit FileQEProvider(std::istream &in, std::string name = "file");
    static FileQEProvider from_path(const std::string &path);

    double score(const QERequest &request) const override;
    std::string id() const override { return name_; }
    std::size_t size() const noexcept { return scores_.size(); }

  private:
    std::map<std::pair<std::string, std::string>, double, std::less<>> scores_; // (system, segment)
    std::string name_;
};

/// Delegates to the bridge worker's `qe` operation.
class BridgeQEProvider final : public QEProvider {
  public:
    explicit BridgeQEProvider(std::shared_ptr<BridgeClient> bridge);
    double score(const QERequest &request) const override;
    std::string id() const override { return id_; }
    std::size_t max_concurrency() const override { return 1; }

  private:
    std::shared_ptr<BridgeClient> bridge_;
    std::string id_;
};

enum class Flag { low_quality, suspect_truncation, no_submission };
using FlagSet = std::set<Flag>;

std::string to_string(Flag flag);

struct SystemReport {
    std::string system_name;
    LanguagePair pair;
    std::optional<AggregateMetrics> aggregate; ///< absent iff no_submission is flagged
    double coverage = 0.0;                     ///< scored segments / corpus segments
    FlagSet flags;
    std::vector<std::string> diagnostics;

    /// A report carrying already-published I/Q/A values.
    static SystemReport published(std::string system, LanguagePair pair, double icm, double qe, double aicm);
    /// A report for a system that did not submit for this pair.
    static SystemReport absent(std::string system, LanguagePair pair);
};

struct SegmentResult {
    std::string segment_id;
    std::string system;
    SegmentMetrics metrics;
};

struct SystemEvaluation {
    std::vector<SegmentResult> segments; ///< scored segments, in corpus order
    SystemReport report;
};

struct EvaluationOptions {
    std::size_t max_in_flight = 1;
    IcmMode icm_mode = IcmMode::absolute;
    /// Fraction of attempted segments allowed to fail before the run is rejected.
    double max_error_fraction = 0.5;
};

/// Scores one submission against a filtered corpus.
///
/// Segments the system did not translate are left out of the aggregate and
/// lower coverage. Segments whose prediction or QE lookup fails are recorded
/// in the report diagnostics and also left out; if more than
/// `max_error_fraction` of attempted segments fail, EvaluationError is
/// thrown. Transport failures always propagate.
SystemEvaluation evaluate_system(std::span<const Segment> corpus, const Submission &submission,
                                 const DurationPredictor &predictor, const QEProvider &qe,
                                 const EvaluationOptions &options = {});

struct FlagPolicy {
    double qe_floor = 4.0;                ///< heuristic; BLASER-scale scores below it are suspect
    double icm_suspicion_quantile = 0.25; ///< "best" ICM band, as a fraction of systems

    void validate() const;
};

/// Linear-interpolated quantile of `values` (need not be sorted).
double quantile(std::vector<double> values, double q);

/// LOW_QUALITY when mean QE is under the floor; SUSPECT_TRUNCATION when it is
/// also among the best-ICM systems of the same language pair.
FlagSet flag_system(const SystemReport &report, std::span<const SystemReport> all_reports,
                    const FlagPolicy &policy);

/// Recomputes flags for every report: flag_system() for scored systems and
/// NO_SUBMISSION otherwise.
void apply_flags(std::vector<SystemReport> &reports, const FlagPolicy &policy);

/// Case-insensitive name order with a case-sensitive tie break.
bool system_name_less(std::string_view a, std::string_view b);

/// Descending headline A-ICM, then lower ICM, then name. Unscored systems
/// come last in name order.
std::vector<SystemReport> rank_systems(std::span<const SystemReport> reports);

void write_segment_metrics_jsonl(std::ostream &out, std::span<const SegmentResult> results);

nlohmann::ordered_json report_to_json(const SystemReport &report);

} // namespace isochrono
