#include "isochrono/cli.hpp"

#include "isochrono/bridge.hpp"
#include "isochrono/errors.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

namespace fs = std::filesystem;

namespace isochrono::cli {

namespace {

int guarded(std::ostream &err, const std::function<int()> &body) {
    try {
        return body();
    } catch (const TransportError &e) {
        err << "error: bridge: " << e.what() << '\n';
        return exit_bridge_failure;
    } catch (const ProtocolError &e) {
        err << "error: bridge protocol: " << e.what() << '\n';
        return exit_bridge_failure;
    } catch (const EvaluationError &e) {
        err << "error: evaluation failed: " << e.what() << '\n';
        return exit_evaluation_failure;
    } catch (const Error &e) {
        err << "error: " << e.what() << '\n';
        return exit_input_error;
    } catch (const fs::filesystem_error &e) {
        err << "error: " << e.what() << '\n';
        return exit_input_error;
    }
}

std::pair<std::string, std::string> split_spec(const std::string &spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) return {spec, {}};
    return {spec.substr(0, colon), spec.substr(colon + 1)};
}

std::shared_ptr<BridgeClient> open_bridge(const std::string &configured) {
    const auto address = resolve_bridge_address(configured);
    if (address.empty()) {
        throw InvalidInput(std::string("no bridge address given and ") + bridge_env_var + " is unset");
    }
    return std::make_shared<BridgeClient>(connect_bridge(address));
}

// Output files are staged in memory and written only once every step succeeded.
class OutputSet {
  public:
    std::ostringstream &file(const std::string &name) { return files_[name]; }

    void commit(const std::string &dir) {
        fs::create_directories(dir);
        for (const auto &[name, content] : files_) {
            std::ofstream out(fs::path(dir) / name, std::ios::binary | std::ios::trunc);
            if (!out) throw InvalidInput("cannot write " + (fs::path(dir) / name).string());
            out << content.str();
        }
    }

  private:
    std::map<std::string, std::ostringstream> files_;
};

std::string sanitize(std::string_view id) {
    std::string out;
    for (char c : id) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' ? c : '_';
    return out;
}

} // namespace

std::unique_ptr<DurationPredictor> make_predictor(const std::string &spec,
                                                  std::span<const ReferenceDuration> reference) {
    const auto [kind, arg] = split_spec(spec);
    if (kind == "rate") {
        if (arg.empty()) throw InvalidInput("rate predictor needs a profile file: rate:<profiles.json>");
        return std::make_unique<RatePredictor>(load_rate_profiles(arg), spec);
    }
    if (kind == "rate-fit") {
        const auto unit = parse_unit_kind(arg.empty() ? "characters" : arg);
        std::map<LanguageCode, std::vector<CalibrationSample>> by_lang;
        for (const auto &r : reference) by_lang[r.language].push_back({r.text, r.seconds});
        std::vector<RatePredictorProfile> profiles;
        for (const auto &[lang, samples] : by_lang) profiles.push_back(calibrate_rate(samples, unit, lang));
        if (profiles.empty()) throw InvalidInput("rate-fit needs reference durations to calibrate on");
        return std::make_unique<RatePredictor>(std::move(profiles), spec);
    }
    if (kind == "table") {
        std::ifstream in(arg);
        if (!in) throw InvalidInput("cannot open duration table: " + arg);
        return std::make_unique<TablePredictor>(TablePredictor::from_jsonl(in, spec));
    }
    if (kind == "bridge") return std::make_unique<BridgeDurationPredictor>(open_bridge(arg));
    throw InvalidInput("unknown predictor '" + spec + "' (expected rate:, rate-fit:, table: or bridge:)");
}

std::unique_ptr<QEProvider> make_qe_provider(const std::string &spec) {
    const auto [kind, arg] = split_spec(spec);
    if (kind == "file") return std::make_unique<FileQEProvider>(FileQEProvider::from_path(arg));
    if (kind == "constant") {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(arg, &used);
        } catch (const std::exception &) {
            used = 0;
        }
        if (used == 0 || used != arg.size()) throw InvalidInput("constant QE needs a number: " + spec);
        return std::make_unique<ConstantQEProvider>(v);
    }
    if (kind == "bridge") return std::make_unique<BridgeQEProvider>(open_bridge(arg));
    throw InvalidInput("unknown QE source '" + spec + "' (expected file:, constant: or bridge:)");
}

// ---------------------------------------------------------------------------

int cmd_filter(const FilterArgs &args, std::ostream &log, std::ostream &err) {
    return guarded(err, [&] {
        std::vector<std::string> rejected;
        const auto corpus = load_corpus(args.corpus, args.source_language, &rejected);
        for (const auto &r : rejected) err << "warning: skipped " << r << '\n';
        const auto kept = apply_filter(corpus, args.policy);
        const auto hist = token_histogram(corpus, args.histogram_bin_width);

        OutputSet out;
        write_corpus_jsonl(out.file("corpus.jsonl"), kept);
        write_histogram_csv(out.file("histogram.csv"), hist);
        out.commit(args.out);
        log << "kept " << kept.size() << " of " << corpus.size() << " segments (dropped "
            << corpus.size() - kept.size() << ")\n";
        return exit_ok;
    });
}

int cmd_evaluate(const EvaluateArgs &args, std::ostream &log, std::ostream &err) {
    return guarded(err, [&] {
        const auto pair = LanguagePair::parse(args.pair);
        args.flag_policy.validate();
        const auto corpus = load_corpus(args.corpus, pair.source);
        if (!fs::is_directory(args.systems_dir)) {
            throw InvalidInput("systems directory does not exist: " + args.systems_dir);
        }
        std::vector<fs::path> system_dirs;
        for (const auto &entry : fs::directory_iterator(args.systems_dir)) {
            if (entry.is_directory()) system_dirs.push_back(entry.path());
        }
        std::sort(system_dirs.begin(), system_dirs.end(), [](const fs::path &a, const fs::path &b) {
            return system_name_less(a.filename().string(), b.filename().string());
        });

        std::vector<SystemReport> reports;
        std::vector<SegmentResult> segments;
        if (!system_dirs.empty()) {
            const auto predictor = make_predictor(args.predictor);
            const auto qe = make_qe_provider(args.qe);
            EvaluationOptions opts;
            opts.max_in_flight = args.max_in_flight;
            opts.icm_mode = args.icm_mode;

            for (const auto &dir : system_dirs) {
                const auto name = dir.filename().string();
                SubmissionManifest manifest{name, pair, SubmissionFormat::jsonl};
                auto file = dir / (pair.str() + ".jsonl");
                if (!fs::exists(file)) {
                    file = dir / (pair.str() + ".txt");
                    manifest.format = SubmissionFormat::plain_text;
                }
                if (!fs::exists(file)) {
                    reports.push_back(SystemReport::absent(name, pair));
                    continue;
                }
                std::ifstream in(file, std::ios::binary);
                if (!in) throw InvalidInput("cannot read " + file.string());
                const auto submission = load_submission(in, manifest, corpus);
                auto result = evaluate_system(corpus, submission, *predictor, *qe, opts);
                for (const auto &d : result.report.diagnostics) err << "warning: " << name << ": " << d << '\n';
                segments.insert(segments.end(), result.segments.begin(), result.segments.end());
                reports.push_back(std::move(result.report));
            }
        }
        apply_flags(reports, args.flag_policy);

        TableSpec table = args.table;
        table.pair = pair;
        OutputSet out;
        write_segment_metrics_jsonl(out.file("segments.jsonl"), segments);
        auto json_reports = nlohmann::ordered_json::array();
        for (const auto &r : reports) json_reports.push_back(report_to_json(r));
        out.file("reports.json") << json_reports.dump(2) << '\n';
        out.file("table.md") << render_table(reports, table, TableFormat::markdown);
        out.file("table.tex") << render_table(reports, table, TableFormat::latex);
        const auto ranking = render_ranking(reports, TableFormat::markdown);
        out.file("ranking.md") << ranking;
        out.commit(args.out);

        log << ranking;
        return exit_ok;
    });
}

int cmd_validate(const ValidateArgs &args, std::ostream &log, std::ostream &err) {
    return guarded(err, [&] {
        if (args.predictors.empty()) throw InvalidInput("validate needs at least one --predictors entry");
        std::ifstream in(args.reference);
        if (!in) throw InvalidInput("cannot open reference durations: " + args.reference);
        const auto reference = read_reference_durations(in);

        std::vector<std::unique_ptr<DurationPredictor>> owned;
        std::vector<const DurationPredictor *> candidates;
        for (const auto &spec : args.predictors) {
            owned.push_back(make_predictor(spec, reference));
            candidates.push_back(owned.back().get());
        }
        ValidationOptions opts{args.bin_width, args.tolerance, args.statistic};
        const auto results = compare_predictors(reference, candidates, opts);

        OutputSet out;
        auto summary = nlohmann::ordered_json::array();
        for (std::size_t k = 0; k < results.size(); ++k) {
            const auto &r = results[k];
            const auto stem = std::to_string(k) + "_" + sanitize(r.predictor_id);
            nlohmann::ordered_json j;
            j["predictor"] = r.predictor_id;
            j["failed"] = r.failed;
            j["threshold"] = r.threshold ? nlohmann::ordered_json(*r.threshold) : nullptr;
            j["n_points"] = r.points.size();
            j["n_errors"] = r.item_errors.size();
            if (!r.failed) {
                j["curve_csv"] = "curve_" + stem + ".csv";
                write_curve_csv(out.file("curve_" + stem + ".csv"), r.curve);
                if (args.raw_points) write_points_csv(out.file("points_" + stem + ".csv"), r.points);
            }
            summary.push_back(j);
            log << r.predictor_id << ": ";
            if (r.failed) {
                log << "failed on " << r.item_errors.size() << " of " << reference.size() << " items\n";
            } else if (r.threshold) {
                log << "reliable from " << *r.threshold << " words\n";
            } else {
                log << "never within tolerance\n";
            }
        }
        out.file("thresholds.json") << summary.dump(2) << '\n';
        out.commit(args.out);
        return exit_ok;
    });
}

// ---------------------------------------------------------------------------

namespace {

std::string random_word(std::mt19937_64 &rng, std::size_t min_len, std::size_t max_len) {
    static constexpr std::string_view letters = "abcdefghijklmnopqrstuvwxyz";
    std::uniform_int_distribution<std::size_t> len(min_len, max_len);
    std::uniform_int_distribution<std::size_t> pick(0, letters.size() - 1);
    std::string w;
    for (std::size_t i = len(rng); i > 0; --i) w += letters[pick(rng)];
    return w;
}

std::string random_sentence_with_chars(std::mt19937_64 &rng, std::size_t target_chars) {
    std::string s;
    std::size_t chars = 0;
    while (chars < std::max<std::size_t>(target_chars, 1)) {
        auto w = random_word(rng, 2, 9);
        chars += w.size();
        if (!s.empty()) s += ' ';
        s += w;
    }
    return s;
}

std::string random_sentence_with_words(std::mt19937_64 &rng, std::size_t words) {
    std::string s;
    for (std::size_t i = 0; i < words; ++i) {
        if (i) s += ' ';
        s += random_word(rng, 2, 9);
    }
    return s;
}

} // namespace

int cmd_synth(const SynthArgs &args, std::ostream &log, std::ostream &err) {
    return guarded(err, [&] {
        if (args.segments == 0) throw InvalidInput("synth needs at least one segment");
        std::mt19937_64 rng(args.seed);
        std::uniform_int_distribution<std::size_t> tokens(5, 40);
        std::uniform_int_distribution<std::uint32_t> ups(0, 6);
        std::bernoulli_distribution downvoted(0.2);

        OutputSet out;
        std::vector<Segment> corpus;
        auto &tsv = out.file("corpus.tsv");
        tsv << "id\tsentence\ttranslation\tup_votes\tdown_votes\n";
        for (std::size_t i = 0; i < args.segments; ++i) {
            char id[32];
            std::snprintf(id, sizeof id, "seg%05zu", i + 1);
            const auto src = random_sentence_with_words(rng, tokens(rng));
            const auto ref = random_sentence_with_chars(rng, text::count_characters(src));
            const auto up = ups(rng);
            const std::uint32_t down = downvoted(rng) ? 1 : 0;
            tsv << id << '\t' << src << '\t' << ref << '\t' << up << '\t' << down << '\n';
            corpus.push_back(make_segment(id, src, "en", ref, up, down));
        }
        const auto kept = apply_filter(corpus, FilterPolicy{});

        struct SystemShape {
            const char *name;
            double length_factor;
            double length_spread;
            double qe_mean;
            double coverage;
            bool jsonl;
        };
        const SystemShape shapes[] = {
            {"Balanced", 1.00, 0.10, 4.5, 1.0, false},
            {"Verbose", 1.35, 0.15, 4.6, 1.0, false},
            {"Terse", 1.10, 0.03, 3.3, 1.0, false},
            {"Partial", 1.10, 0.10, 4.4, 0.5, true},
        };
        std::normal_distribution<double> unit(0.0, 1.0);
        std::bernoulli_distribution covered_half(0.5);
        auto &qe = out.file("qe.jsonl");
        for (const auto &shape : shapes) {
            auto &sub = out.file(std::string("systems/") + shape.name + "/en-de" + (shape.jsonl ? ".jsonl" : ".txt"));
            for (const auto &seg : kept) {
                if (shape.coverage < 1.0 && !covered_half(rng)) continue;
                const double factor = std::max(0.2, shape.length_factor + shape.length_spread * unit(rng));
                const auto n_chars = static_cast<std::size_t>(
                    std::lround(factor * static_cast<double>(text::count_characters(seg.source_text))));
                const auto translation = random_sentence_with_chars(rng, n_chars);
                if (shape.jsonl) {
                    sub << nlohmann::json{{"id", seg.id}, {"text", translation}}.dump() << '\n';
                } else {
                    sub << translation << '\n';
                }
                const double score = std::clamp(shape.qe_mean + 0.15 * unit(rng), 0.0, 5.0);
                nlohmann::ordered_json rec;
                rec["segment_id"] = seg.id;
                rec["system"] = shape.name;
                rec["score"] = std::round(score * 1e4) / 1e4;
                qe << rec.dump() << '\n';
            }
        }
        // A system directory without an en-de file renders as a dash row.
        out.file("systems/NoShow/README") << "no en-de submission\n";

        const RatePredictorProfile profiles[] = {{"en", 14.0, UnitKind::characters, 0.25},
                                                 {"de", 15.5, UnitKind::characters, 0.25}};
        write_rate_profiles(out.file("profiles.json"), profiles);

        // Reference durations whose noise shrinks with length, plus a second
        // noisy rendering to replay as a "repeat run" candidate.
        auto &ref = out.file("reference_durations.jsonl");
        auto &repeat = out.file("repeat_run.jsonl");
        for (std::size_t words = 1; words <= 40; ++words) {
            for (int k = 0; k < 8; ++k) {
                const auto sentence = random_sentence_with_words(rng, words);
                const double clean = 0.25 + static_cast<double>(text::count_characters(sentence)) / 14.0;
                const double spread = 0.25 / std::sqrt(static_cast<double>(words));
                const double truth = clean * std::max(0.3, 1.0 + spread * unit(rng));
                const double again = truth * std::max(0.3, 1.0 + spread * unit(rng));
                ref << nlohmann::json{{"text", sentence}, {"language", "en"}, {"seconds", truth}}.dump() << '\n';
                repeat << nlohmann::json{{"text", sentence}, {"language", "en"}, {"seconds", again}}.dump() << '\n';
            }
        }

        fs::create_directories(fs::path(args.out) / "systems");
        for (const auto &shape : shapes) fs::create_directories(fs::path(args.out) / "systems" / shape.name);
        fs::create_directories(fs::path(args.out) / "systems" / "NoShow");
        out.commit(args.out);
        log << "wrote " << corpus.size() << " segments (" << kept.size() << " pass the default filter) to "
            << args.out << '\n';
        return exit_ok;
    });
}

// ---------------------------------------------------------------------------

namespace {

std::uint32_t parse_vote_limit(const std::string &s) {
    if (s == "inf" || s == "unlimited") return FilterPolicy::unlimited;
    std::size_t used = 0;
    unsigned long v = 0;
    try {
        v = std::stoul(s, &used);
    } catch (const std::exception &) {
        used = 0;
    }
    if (used == 0 || used != s.size() || v > FilterPolicy::unlimited) {
        throw InvalidInput("vote limit must be a nonnegative integer or 'inf': " + s);
    }
    return static_cast<std::uint32_t>(v);
}

} // namespace

int run(int argc, char **argv) {
    CLI::App app{"Isochrony evaluation toolkit: duration-based isochrony, QE and A-ICM leaderboards"};
    app.require_subcommand(1);

    FilterArgs filter;
    std::string max_down = "0";
    std::string side = "source";
    auto *f = app.add_subcommand("filter", "Filter a corpus by length and votes; write JSONL and a token histogram");
    f->add_option("--corpus", filter.corpus, "Corpus (.tsv import or canonical .jsonl)")->required();
    f->add_option("--out", filter.out, "Output directory")->required();
    f->add_option("--min-tokens", filter.policy.min_tokens, "Minimum token count")->capture_default_str();
    f->add_option("--min-upvotes", filter.policy.min_upvotes, "Minimum up votes")->capture_default_str();
    f->add_option("--max-downvotes", max_down, "Maximum down votes, or 'inf'")->capture_default_str();
    f->add_option("--side", side, "Count tokens on the source or target side")
        ->check(CLI::IsMember({"source", "target"}))
        ->capture_default_str();
    f->add_option("--language", filter.source_language, "Source language of TSV imports")->capture_default_str();
    f->add_option("--bin-width", filter.histogram_bin_width, "Histogram bin width")->capture_default_str();

    EvaluateArgs eval;
    std::string icm_mode = "absolute";
    auto *e = app.add_subcommand("evaluate", "Score every system submission and render the leaderboard");
    e->add_option("--corpus", eval.corpus, "Filtered corpus (.jsonl or .tsv)")->required();
    e->add_option("--systems-dir", eval.systems_dir, "One subdirectory per system")->required();
    e->add_option("--pair", eval.pair, "Language pair, e.g. en-de")->required();
    e->add_option("--predictor", eval.predictor, "rate:<profiles.json> | bridge[:<address>]")->required();
    e->add_option("--qe", eval.qe, "file:<scores.jsonl> | bridge[:<address>] | constant:<value>")->required();
    e->add_option("--out", eval.out, "Output directory")->required();
    e->add_option("--max-in-flight", eval.max_in_flight, "Concurrent segment evaluations")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    e->add_option("--icm-mode", icm_mode, "absolute or squared relative error")
        ->check(CLI::IsMember({"absolute", "squared"}))
        ->capture_default_str();
    e->add_option("--qe-floor", eval.flag_policy.qe_floor, "QE below this is flagged LOW_QUALITY")
        ->capture_default_str();
    e->add_option("--icm-quantile", eval.flag_policy.icm_suspicion_quantile,
                  "Best-ICM fraction checked for SUSPECT_TRUNCATION")
        ->capture_default_str();
    e->add_option("--bold-margin-icm", eval.table.bold_margin_icm)->capture_default_str();
    e->add_option("--bold-margin-qe", eval.table.bold_margin_qe)->capture_default_str();
    e->add_option("--bold-margin-aicm", eval.table.bold_margin_aicm)->capture_default_str();

    ValidateArgs val;
    std::string statistic = "mean";
    auto *v = app.add_subcommand("validate", "Compare duration predictors against reference durations");
    v->add_option("--reference", val.reference, "JSONL {text, language, seconds}")->required();
    v->add_option("--predictors", val.predictors,
                  "rate:<profiles.json> | rate-fit:<characters|tokens> | table:<durations.jsonl> | bridge[:<address>]");
    v->add_option("--bin-width", val.bin_width, "Word-count bin width")->capture_default_str();
    v->add_option("--tolerance", val.tolerance, "Relative error tolerance")->capture_default_str();
    v->add_option("--statistic", statistic, "mean or median per bin")
        ->check(CLI::IsMember({"mean", "median"}))
        ->capture_default_str();
    v->add_flag("--raw", val.raw_points, "Also export raw per-item points");
    v->add_option("--out", val.out, "Output directory")->required();

    SynthArgs synth;
    auto *s = app.add_subcommand("synth", "Write a synthetic demo dataset");
    s->add_option("--out", synth.out, "Output directory")->required();
    s->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
    s->add_option("--segments", synth.segments, "Number of corpus segments")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &ex) {
        return app.exit(ex);
    } catch (const CLI::CallForAllHelp &ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError &ex) {
        app.exit(ex);
        return exit_input_error;
    }

    if (*f) {
        try {
            filter.policy.max_downvotes = parse_vote_limit(max_down);
        } catch (const InvalidInput &ex) {
            std::cerr << "error: " << ex.what() << '\n';
            return exit_input_error;
        }
        filter.policy.side = side == "target" ? FilterSide::target : FilterSide::source;
        return cmd_filter(filter, std::cout, std::cerr);
    }
    if (*e) {
        eval.icm_mode = icm_mode == "squared" ? IcmMode::squared : IcmMode::absolute;
        return cmd_evaluate(eval, std::cout, std::cerr);
    }
    if (*v) {
        val.statistic = statistic == "median" ? BinStatistic::median : BinStatistic::mean;
        return cmd_validate(val, std::cout, std::cerr);
    }
    return cmd_synth(synth, std::cout, std::cerr);
}

} // namespace isochrono::cli
