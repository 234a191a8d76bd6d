#include "isochrono/duration.hpp"

#include "isochrono/bridge.hpp"
#include "isochrono/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace isochrono {

std::string to_string(UnitKind kind) {
    return kind == UnitKind::characters ? "characters" : "tokens";
}

UnitKind parse_unit_kind(std::string_view name) {
    if (name == "characters" || name == "chars") return UnitKind::characters;
    if (name == "tokens") return UnitKind::tokens;
    throw InvalidInput("unit_kind must be 'characters' or 'tokens', got '" + std::string(name) + "'");
}

std::size_t count_units(std::string_view text, UnitKind kind) {
    return kind == UnitKind::characters ? text::count_characters(text) : text::count_tokens(text);
}

void RatePredictorProfile::validate() const {
    if (!std::isfinite(units_per_second) || units_per_second <= 0.0) {
        throw InvalidInput("units_per_second must be positive for language '" + language + "'");
    }
    if (!std::isfinite(pause_floor) || pause_floor < 0.0) {
        throw InvalidInput("pause_floor must be nonnegative for language '" + language + "'");
    }
}

DurationEstimate rate_predict(const RatePredictorProfile &profile, std::string_view text,
                              std::string predictor_id) {
    profile.validate();
    if (text::is_blank(text)) throw PredictionError("EMPTY_TEXT", "cannot predict a duration for empty text");
    const auto units = count_units(text, profile.unit_kind);
    DurationEstimate est;
    est.seconds = profile.pause_floor + static_cast<double>(units) / profile.units_per_second;
    est.predictor_id = std::move(predictor_id);
    est.text_units = text::count_tokens(text);
    return est;
}

namespace {

RatePredictorProfile fallback_profile(std::span<const CalibrationSample> samples,
                                      const std::vector<double> &units, UnitKind kind,
                                      LanguageCode language) {
    double sum_units = 0.0;
    double sum_seconds = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        sum_units += units[i];
        sum_seconds += samples[i].reference_seconds;
    }
    if (sum_units <= 0.0) throw InsufficientDataError("calibration samples contain no speech units");
    return {std::move(language), sum_units / sum_seconds, kind, 0.0};
}

} // namespace

RatePredictorProfile calibrate_rate(std::span<const CalibrationSample> samples, UnitKind unit_kind,
                                    LanguageCode language) {
    if (samples.size() < 2) throw InsufficientDataError("calibration needs at least 2 samples");

    std::vector<double> units(samples.size());
    double mean_u = 0.0;
    double mean_s = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double s = samples[i].reference_seconds;
        if (!std::isfinite(s) || s <= 0.0) {
            throw InvalidInput("calibration sample " + std::to_string(i) + " has nonpositive duration");
        }
        units[i] = static_cast<double>(count_units(samples[i].text, unit_kind));
        mean_u += units[i];
        mean_s += s;
    }
    const auto n = static_cast<double>(samples.size());
    mean_u /= n;
    mean_s /= n;

    // Centred normal equations for seconds = floor + slope * units.
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double du = units[i] - mean_u;
        sxx += du * du;
        sxy += du * (samples[i].reference_seconds - mean_s);
    }
    if (sxx <= 0.0) return fallback_profile(samples, units, unit_kind, std::move(language));

    double slope = sxy / sxx;
    double floor = mean_s - slope * mean_u;
    if (floor < 0.0) {
        // Constrained refit with the floor pinned at zero.
        double suu = 0.0;
        double sus = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            suu += units[i] * units[i];
            sus += units[i] * samples[i].reference_seconds;
        }
        slope = sus / suu;
        floor = 0.0;
    }
    if (!(slope > 0.0)) return fallback_profile(samples, units, unit_kind, std::move(language));
    return {std::move(language), 1.0 / slope, unit_kind, floor};
}

// ---------------------------------------------------------------------------

RatePredictor::RatePredictor(std::vector<RatePredictorProfile> profiles, std::string name)
    : name_(std::move(name)) {
    if (name_.empty()) throw InvalidInput("predictor name must not be empty");
    for (auto &p : profiles) {
        p.validate();
        const auto lang = p.language;
        if (!profiles_.emplace(lang, std::move(p)).second) {
            throw InvalidInput("duplicate rate profile for language '" + lang + "'");
        }
    }
}

DurationEstimate RatePredictor::predict(std::string_view text, const LanguageCode &language) const {
    return rate_predict(profile(language), text, name_);
}

std::set<LanguageCode> RatePredictor::supported_languages() const {
    std::set<LanguageCode> out;
    for (const auto &[lang, _] : profiles_) out.insert(lang);
    return out;
}

const RatePredictorProfile &RatePredictor::profile(const LanguageCode &language) const {
    const auto it = profiles_.find(language);
    if (it == profiles_.end()) {
        throw PredictionError("UNSUPPORTED_LANGUAGE", "no rate profile for language '" + language + "'");
    }
    return it->second;
}

std::vector<RatePredictorProfile> read_rate_profiles(std::istream &in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error &e) {
        throw InvalidInput(std::string("rate profile file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("profiles")) throw SchemaError("profiles");
    std::vector<RatePredictorProfile> out;
    for (const auto &p : doc["profiles"]) {
        for (const char *key : {"language", "units_per_second"}) {
            if (!p.contains(key)) throw SchemaError(key);
        }
        RatePredictorProfile prof;
        try {
            prof.language = p["language"].get<std::string>();
            prof.units_per_second = p["units_per_second"].get<double>();
            prof.unit_kind = parse_unit_kind(p.value("unit_kind", std::string("characters")));
            prof.pause_floor = p.value("pause_floor", 0.0);
        } catch (const nlohmann::json::type_error &e) {
            throw InvalidInput(std::string("bad rate profile entry: ") + e.what());
        }
        prof.validate();
        out.push_back(std::move(prof));
    }
    return out;
}

std::vector<RatePredictorProfile> load_rate_profiles(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open rate profile file: " + path);
    return read_rate_profiles(in);
}

void write_rate_profiles(std::ostream &out, std::span<const RatePredictorProfile> profiles) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto &p : profiles) {
        arr.push_back({{"language", p.language},
                       {"units_per_second", p.units_per_second},
                       {"unit_kind", to_string(p.unit_kind)},
                       {"pause_floor", p.pause_floor}});
    }
    out << nlohmann::json{{"profiles", arr}}.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

TablePredictor::TablePredictor(std::vector<Entry> entries, std::string name) : name_(std::move(name)) {
    if (name_.empty()) throw InvalidInput("predictor name must not be empty");
    for (auto &e : entries) {
        if (!std::isfinite(e.seconds) || e.seconds < 0.0) {
            throw InvalidInput("replayed duration must be nonnegative");
        }
        auto key = std::make_pair(std::move(e.language), std::move(e.text));
        seconds_[std::move(key)] = e.seconds;
    }
}

TablePredictor TablePredictor::from_jsonl(std::istream &in, std::string name) {
    std::vector<Entry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
            entries.push_back({j.at("language").get<std::string>(), j.at("text").get<std::string>(),
                               j.at("seconds").get<double>()});
        } catch (const nlohmann::json::exception &e) {
            throw InvalidInput("duration table line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return TablePredictor(std::move(entries), std::move(name));
}

DurationEstimate TablePredictor::predict(std::string_view text, const LanguageCode &language) const {
    const auto it = seconds_.find(std::make_pair(language, std::string(text)));
    if (it == seconds_.end()) throw PredictionError("MISSING_DURATION", "no replayed duration for this text");
    return {it->second, name_, text::count_tokens(text)};
}

std::set<LanguageCode> TablePredictor::supported_languages() const {
    std::set<LanguageCode> out;
    for (const auto &[key, _] : seconds_) out.insert(key.first);
    return out;
}

// ---------------------------------------------------------------------------

std::vector<DurationOutcome> bridge_predict(BridgeClient &bridge, std::span<const TextItem> items) {
    if (items.empty()) throw InvalidInput("bridge_predict needs at least one item");
    const auto &caps = bridge.capabilities();
    const std::string id =
        "bridge:" + (caps.duration_model.empty() ? bridge.describe() : caps.duration_model);

    std::vector<nlohmann::json> payloads;
    payloads.reserve(items.size());
    for (const auto &item : items) payloads.push_back({{"text", item.text}, {"language", item.language}});
    const auto replies = bridge.call("duration", payloads);

    std::vector<DurationOutcome> out(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto &r = replies[i];
        if (!r.ok) {
            out[i].error_code = r.error_code;
            out[i].error_message = r.error_message;
            continue;
        }
        if (!r.result.contains("seconds") || !r.result["seconds"].is_number()) {
            throw ProtocolError("duration result without numeric seconds");
        }
        DurationEstimate est;
        est.seconds = r.result["seconds"].get<double>();
        est.predictor_id = id;
        est.text_units = text::count_tokens(items[i].text);
        if (!std::isfinite(est.seconds) || est.seconds < 0.0) {
            out[i].error_code = std::string(bridge_codes::model_error);
            out[i].error_message = "worker returned an invalid duration";
            continue;
        }
        out[i].estimate = std::move(est);
    }
    return out;
}

BridgeDurationPredictor::BridgeDurationPredictor(std::shared_ptr<BridgeClient> bridge)
    : bridge_(std::move(bridge)) {
    if (!bridge_) throw InvalidInput("bridge predictor needs a client");
    const auto &caps = bridge_->capabilities();
    languages_ = caps.languages;
    id_ = "bridge:" + (caps.duration_model.empty() ? bridge_->describe() : caps.duration_model);
}

DurationEstimate BridgeDurationPredictor::predict(std::string_view text, const LanguageCode &language) const {
    const TextItem item{std::string(text), language};
    auto outcome = bridge_predict(*bridge_, std::span(&item, 1));
    auto &o = outcome.front();
    if (!o.ok()) throw PredictionError(o.error_code, o.error_message);
    return std::move(*o.estimate);
}

} // namespace isochrono
