#pragma once

#include "isochrono/metrics.hpp"
#include "isochrono/text.hpp"

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace isochrono {

class BridgeClient;

/// Maps text to predicted speech seconds. Implementations must be
/// deterministic for fixed (text, language) and return seconds > 0 for any
/// text containing a word character.
class DurationPredictor {
  public:
    virtual ~DurationPredictor() = default;

    /// Throws PredictionError (or InvalidInput) when the item cannot be scored.
    virtual DurationEstimate predict(std::string_view text, const LanguageCode &language) const = 0;
    virtual std::string id() const = 0;
    virtual std::set<LanguageCode> supported_languages() const = 0;
    /// Upper bound on concurrent predict() calls; 0 means unbounded.
    virtual std::size_t max_concurrency() const { return 0; }
};

enum class UnitKind { characters, tokens };

std::string to_string(UnitKind kind);
UnitKind parse_unit_kind(std::string_view name);

/// Number of speech units in `text`: non-whitespace code points or toolkit tokens.
std::size_t count_units(std::string_view text, UnitKind kind);

/// Per-language speaking-rate parameters of the rate model
/// seconds = pause_floor + units / units_per_second.
struct RatePredictorProfile {
    LanguageCode language;
    double units_per_second = 1.0;
    UnitKind unit_kind = UnitKind::characters;
    double pause_floor = 0.0;

    void validate() const;
};

DurationEstimate rate_predict(const RatePredictorProfile &profile, std::string_view text,
                              std::string predictor_id = "rate");

struct CalibrationSample {
    std::string text;
    double reference_seconds = 0.0;
};

/// Least-squares fit of (1/rate, pause_floor) to reference durations.
///
/// Falls back to pause_floor = 0 and rate = sum(units) / sum(seconds) when the
/// fit is rank deficient (all unit counts equal) or yields a nonpositive rate.
/// A negative fitted floor is refitted through the origin, since a profile
/// cannot carry negative silence.
RatePredictorProfile calibrate_rate(std::span<const CalibrationSample> samples, UnitKind unit_kind,
                                    LanguageCode language = {});

/// Rate model over a set of per-language profiles.
class RatePredictor final : public DurationPredictor {
  public:
    explicit RatePredictor(std::vector<RatePredictorProfile> profiles, std::string name = "rate");

    DurationEstimate predict(std::string_view text, const LanguageCode &language) const override;
    std::string id() const override { return name_; }
    std::set<LanguageCode> supported_languages() const override;

    const RatePredictorProfile &profile(const LanguageCode &language) const;

  private:
    std::map<LanguageCode, RatePredictorProfile> profiles_;
    std::string name_;
};

// Profile files are JSON:
//   {"profiles": [{"language": "en", "units_per_second": 14.0,
//                  "unit_kind": "characters", "pause_floor": 0.2}, ...]}
std::vector<RatePredictorProfile> read_rate_profiles(std::istream &in);
std::vector<RatePredictorProfile> load_rate_profiles(const std::string &path);
void write_rate_profiles(std::ostream &out, std::span<const RatePredictorProfile> profiles);

/// Replays durations measured or predicted elsewhere (a repeat TTS run, a
/// fine-tuned model). Lookups are exact on (language, text).
class TablePredictor final : public DurationPredictor {
  public:
    struct Entry {
        LanguageCode language;
        std::string text;
        double seconds = 0.0;
    };

    TablePredictor(std::vector<Entry> entries, std::string name);
    /// Reads JSONL records {text, language, seconds}.
    static TablePredictor from_jsonl(std::istream &in, std::string name);

    DurationEstimate predict(std::string_view text, const LanguageCode &language) const override;
    std::string id() const override { return name_; }
    std::set<LanguageCode> supported_languages() const override;

  private:
    std::map<std::pair<LanguageCode, std::string>, double, std::less<>> seconds_;
    std::string name_;
};

struct TextItem {
    std::string text;
    LanguageCode language;
};

/// Outcome of one item of a bridged batch. Exactly one of `estimate` or
/// `error_code` is set.
struct DurationOutcome {
    std::optional<DurationEstimate> estimate;
    std::string error_code;
    std::string error_message;

    bool ok() const noexcept { return estimate.has_value(); }
};

/// Scores a batch through the bridge. One outcome per input in input order;
/// per-item refusals do not abort the batch, transport failures throw.
std::vector<DurationOutcome> bridge_predict(BridgeClient &bridge, std::span<const TextItem> items);

/// DurationPredictor backed by a bridge connection.
class BridgeDurationPredictor final : public DurationPredictor {
  public:
    explicit BridgeDurationPredictor(std::shared_ptr<BridgeClient> bridge);

    DurationEstimate predict(std::string_view text, const LanguageCode &language) const override;
    std::string id() const override { return id_; }
    std::set<LanguageCode> supported_languages() const override { return languages_; }
    std::size_t max_concurrency() const override { return 1; }

  private:
    std::shared_ptr<BridgeClient> bridge_;
    std::string id_;
    std::set<LanguageCode> languages_;
};

} // namespace isochrono
