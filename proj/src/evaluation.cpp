#include "isochrono/evaluation.hpp"

#include "isochrono/bridge.hpp"
#include "isochrono/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace isochrono {

// ---------------------------------------------------------------------------
// QE providers

ConstantQEProvider::ConstantQEProvider(double value) : value_(value) {
    if (!std::isfinite(value)) throw InvalidInput("constant QE must be finite");
}

std::string ConstantQEProvider::id() const {
    std::ostringstream os;
    os << "constant:" << value_;
    return os.str();
}

FileQEProvider::FileQEProvider(std::istream &in, std::string name) : name_(std::move(name)) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error &e) {
            throw InvalidInput("QE file line " + std::to_string(line_no) + ": " + e.what());
        }
        for (const char *key : {"segment_id", "system", "score"}) {
            if (!j.contains(key)) throw SchemaError(key);
        }
        if (!j["score"].is_number() || !std::isfinite(j["score"].get<double>())) {
            throw InvalidInput("QE file line " + std::to_string(line_no) + ": score must be a finite number");
        }
        if (!j["system"].is_string() || !j["segment_id"].is_string()) {
            throw InvalidInput("QE file line " + std::to_string(line_no) + ": system and segment_id must be strings");
        }
        auto key = std::make_pair(j["system"].get<std::string>(), j["segment_id"].get<std::string>());
        if (!scores_.emplace(key, j["score"].get<double>()).second) {
            throw InvalidInput("QE file repeats (" + key.first + ", " + key.second + ")");
        }
    }
}

FileQEProvider FileQEProvider::from_path(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open QE file: " + path);
    return FileQEProvider(in, "file:" + path);
}

double FileQEProvider::score(const QERequest &request) const {
    const auto it = scores_.find(std::make_pair(std::string(request.system), std::string(request.segment_id)));
    if (it == scores_.end()) {
        throw PredictionError("MISSING_QE", "no QE score for system " + std::string(request.system) +
                                                ", segment " + std::string(request.segment_id));
    }
    return it->second;
}

BridgeQEProvider::BridgeQEProvider(std::shared_ptr<BridgeClient> bridge) : bridge_(std::move(bridge)) {
    if (!bridge_) throw InvalidInput("bridge QE provider needs a client");
    const auto &caps = bridge_->capabilities();
    if (!caps.qe) throw InvalidInput(bridge_->describe() + " does not offer quality estimation");
    id_ = "bridge:" + (caps.qe_model.empty() ? bridge_->describe() : caps.qe_model);
}

double BridgeQEProvider::score(const QERequest &request) const {
    const nlohmann::json payload = {{"source_text", request.source_text},
                                    {"translated_text", request.translated_text},
                                    {"source_language", request.source_language},
                                    {"target_language", request.target_language}};
    const auto reply = bridge_->call_one("qe", payload);
    if (!reply.ok) throw PredictionError(reply.error_code, reply.error_message);
    if (!reply.result.contains("score") || !reply.result["score"].is_number()) {
        throw ProtocolError("qe result without numeric score");
    }
    return reply.result["score"].get<double>();
}

// ---------------------------------------------------------------------------
// Reports

std::string to_string(Flag flag) {
    switch (flag) {
    case Flag::low_quality: return "LOW_QUALITY";
    case Flag::suspect_truncation: return "SUSPECT_TRUNCATION";
    case Flag::no_submission: return "NO_SUBMISSION";
    }
    return "UNKNOWN";
}

SystemReport SystemReport::published(std::string system, LanguagePair pair, double icm, double qe,
                                     double aicm) {
    SystemReport r;
    r.system_name = std::move(system);
    r.pair = std::move(pair);
    AggregateMetrics agg;
    agg.mean_icm = icm;
    agg.mean_qe = qe;
    agg.aicm_from_means = aicm;
    agg.mean_segment_aicm = aicm;
    agg.n_segments = 1;
    r.aggregate = agg;
    r.coverage = 1.0;
    return r;
}

SystemReport SystemReport::absent(std::string system, LanguagePair pair) {
    SystemReport r;
    r.system_name = std::move(system);
    r.pair = std::move(pair);
    r.flags.insert(Flag::no_submission);
    return r;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

std::size_t effective_workers(std::size_t requested, std::size_t a, std::size_t b, std::size_t tasks) {
    std::size_t n = std::max<std::size_t>(requested, 1);
    if (a != 0) n = std::min(n, a);
    if (b != 0) n = std::min(n, b);
    return std::max<std::size_t>(std::min(n, tasks), 1);
}

struct SegmentTask {
    const Segment *segment;
    const std::string *translation;
};

struct TaskOutcome {
    std::optional<SegmentMetrics> metrics;
    std::string error;
};

} // namespace

SystemEvaluation evaluate_system(std::span<const Segment> corpus, const Submission &submission,
                                 const DurationPredictor &predictor, const QEProvider &qe,
                                 const EvaluationOptions &options) {
    if (corpus.empty()) throw InvalidInput("cannot evaluate against an empty corpus");
    const auto &pair = submission.pair;
    const auto langs = predictor.supported_languages();
    for (const auto &lang : {pair.source, pair.target}) {
        if (!langs.contains(lang)) {
            throw InvalidInput("predictor " + predictor.id() + " does not support language '" + lang + "'");
        }
    }

    std::vector<SegmentTask> tasks;
    for (const auto &seg : corpus) {
        const auto it = submission.translations.find(seg.id);
        if (it != submission.translations.end()) tasks.push_back({&seg, &it->second});
    }

    SystemEvaluation out;
    out.report.system_name = submission.system_name;
    out.report.pair = pair;
    if (tasks.empty()) {
        out.report.flags.insert(Flag::no_submission);
        return out;
    }

    std::vector<TaskOutcome> outcomes(tasks.size());
    std::exception_ptr fatal;
    std::mutex fatal_mutex;
    std::atomic<std::size_t> next{0};

    auto run_one = [&](std::size_t i) {
        const auto &task = tasks[i];
        try {
            const auto src = predictor.predict(task.segment->source_text, pair.source);
            const auto trg = predictor.predict(*task.translation, pair.target);
            const double icm = compute_icm(src, trg, options.icm_mode);
            const double q = qe.score({task.segment->id, submission.system_name, task.segment->source_text,
                                       *task.translation, pair.source, pair.target});
            outcomes[i].metrics = make_segment_metrics(icm, q);
        } catch (const PredictionError &e) {
            outcomes[i].error = "segment " + task.segment->id + ": " + e.what();
        } catch (const InvalidInput &e) {
            outcomes[i].error = "segment " + task.segment->id + ": " + e.what();
        } catch (...) {
            std::lock_guard lock(fatal_mutex);
            if (!fatal) fatal = std::current_exception();
        }
    };
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            {
                std::lock_guard lock(fatal_mutex);
                if (fatal) return;
            }
            run_one(i);
        }
    };

    const auto n_workers = effective_workers(options.max_in_flight, predictor.max_concurrency(),
                                             qe.max_concurrency(), tasks.size());
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    }
    if (fatal) std::rethrow_exception(fatal);

    // Reduce in corpus order so the aggregate never depends on scheduling.
    std::vector<SegmentMetrics> scored;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (outcomes[i].metrics) {
            scored.push_back(*outcomes[i].metrics);
            out.segments.push_back({tasks[i].segment->id, submission.system_name, *outcomes[i].metrics});
        } else {
            out.report.diagnostics.push_back(std::move(outcomes[i].error));
        }
    }
    const auto errored = tasks.size() - scored.size();
    if (static_cast<double>(errored) > options.max_error_fraction * static_cast<double>(tasks.size())) {
        std::string msg = submission.system_name + " (" + pair.str() + "): " + std::to_string(errored) + " of " +
                          std::to_string(tasks.size()) + " segments failed";
        if (!out.report.diagnostics.empty()) msg += "; first: " + out.report.diagnostics.front();
        throw EvaluationError(msg);
    }
    out.report.aggregate = aggregate(scored);
    out.report.coverage = static_cast<double>(scored.size()) / static_cast<double>(corpus.size());
    return out;
}

// ---------------------------------------------------------------------------
// Flagging and ranking

void FlagPolicy::validate() const {
    if (!std::isfinite(qe_floor)) throw InvalidInput("qe_floor must be finite");
    if (!(icm_suspicion_quantile > 0.0 && icm_suspicion_quantile < 1.0)) {
        throw InvalidInput("icm_suspicion_quantile must lie strictly between 0 and 1");
    }
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw InvalidInput("quantile of an empty set");
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidInput("quantile fraction must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

FlagSet flag_system(const SystemReport &report, std::span<const SystemReport> all_reports,
                    const FlagPolicy &policy) {
    policy.validate();
    if (!report.aggregate) throw InvalidInput("cannot flag " + report.system_name + ": it has no aggregate");
    FlagSet flags;
    if (!(report.aggregate->mean_qe < policy.qe_floor)) return flags;
    flags.insert(Flag::low_quality);

    std::vector<double> icms;
    for (const auto &r : all_reports) {
        if (r.pair == report.pair && r.aggregate) icms.push_back(r.aggregate->mean_icm);
    }
    if (icms.empty()) icms.push_back(report.aggregate->mean_icm);
    const double cutoff = quantile(std::move(icms), policy.icm_suspicion_quantile);
    if (report.aggregate->mean_icm <= cutoff + 1e-12) flags.insert(Flag::suspect_truncation);
    return flags;
}

void apply_flags(std::vector<SystemReport> &reports, const FlagPolicy &policy) {
    std::vector<FlagSet> computed;
    computed.reserve(reports.size());
    for (const auto &r : reports) {
        computed.push_back(r.aggregate ? flag_system(r, reports, policy) : FlagSet{Flag::no_submission});
    }
    for (std::size_t i = 0; i < reports.size(); ++i) reports[i].flags = std::move(computed[i]);
}

bool system_name_less(std::string_view a, std::string_view b) {
    const auto n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto ca = std::tolower(static_cast<unsigned char>(a[i]));
        const auto cb = std::tolower(static_cast<unsigned char>(b[i]));
        if (ca != cb) return ca < cb;
    }
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

std::vector<SystemReport> rank_systems(std::span<const SystemReport> reports) {
    std::vector<SystemReport> out(reports.begin(), reports.end());
    std::sort(out.begin(), out.end(), [](const SystemReport &a, const SystemReport &b) {
        if (a.aggregate.has_value() != b.aggregate.has_value()) return a.aggregate.has_value();
        if (a.aggregate) {
            if (a.aggregate->aicm_from_means != b.aggregate->aicm_from_means) {
                return a.aggregate->aicm_from_means > b.aggregate->aicm_from_means;
            }
            if (a.aggregate->mean_icm != b.aggregate->mean_icm) {
                return a.aggregate->mean_icm < b.aggregate->mean_icm;
            }
        }
        return system_name_less(a.system_name, b.system_name);
    });
    return out;
}

void write_segment_metrics_jsonl(std::ostream &out, std::span<const SegmentResult> results) {
    for (const auto &r : results) {
        nlohmann::ordered_json j;
        j["segment_id"] = r.segment_id;
        j["system"] = r.system;
        j["icm"] = r.metrics.icm;
        j["qe"] = r.metrics.qe;
        j["aicm"] = r.metrics.aicm;
        out << j.dump() << '\n';
    }
}

nlohmann::ordered_json report_to_json(const SystemReport &report) {
    nlohmann::ordered_json j;
    j["system"] = report.system_name;
    j["pair"] = report.pair.str();
    j["coverage"] = report.coverage;
    auto flags = nlohmann::ordered_json::array();
    for (const auto f : report.flags) flags.push_back(to_string(f));
    j["flags"] = flags;
    if (report.aggregate) {
        const auto &a = *report.aggregate;
        j["aggregate"] = {{"mean_icm", a.mean_icm},
                          {"mean_qe", a.mean_qe},
                          {"aicm_from_means", a.aicm_from_means},
                          {"mean_segment_aicm", a.mean_segment_aicm},
                          {"n_segments", a.n_segments}};
    } else {
        j["aggregate"] = nullptr;
    }
    j["diagnostics"] = report.diagnostics;
    return j;
}

} // namespace isochrono
