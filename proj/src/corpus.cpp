#include "isochrono/corpus.hpp"

#include "isochrono/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <ostream>
#include <set>
#include <sstream>

namespace isochrono {

namespace {

std::string slurp(std::istream &in) {
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void require_utf8(std::string_view data) {
    if (const auto bad = text::find_invalid_utf8(data); bad != std::string_view::npos) {
        throw EncodingError("malformed UTF-8", bad);
    }
}

// Splits on LF, strips a trailing CR per line, and drops the empty piece
// after a final newline.
std::vector<std::string_view> split_lines(std::string_view data) {
    auto lines = text::split(data, '\n');
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    for (auto &l : lines) {
        if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    }
    return lines;
}

std::optional<std::uint32_t> parse_count(std::string_view cell) {
    cell = text::trim(cell);
    std::uint32_t v = 0;
    const auto *end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
    if (cell.empty() || ec != std::errc() || ptr != end) return std::nullopt;
    return v;
}

std::uint32_t json_count(const nlohmann::json &j, const char *key) {
    if (!j.contains(key)) throw SchemaError(key);
    const auto &v = j[key];
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0 ||
        v.get<std::int64_t>() > std::numeric_limits<std::uint32_t>::max()) {
        throw InvalidInput(std::string("field '") + key + "' must be a nonnegative integer");
    }
    return v.get<std::uint32_t>();
}

std::string json_string(const nlohmann::json &j, const char *key) {
    if (!j.contains(key)) throw SchemaError(key);
    if (!j[key].is_string()) throw InvalidInput(std::string("field '") + key + "' must be a string");
    return j[key].get<std::string>();
}

nlohmann::json parse_json_line(std::string_view line, std::size_t line_no) {
    try {
        auto j = nlohmann::json::parse(line);
        if (!j.is_object()) throw InvalidInput("line " + std::to_string(line_no) + ": expected a JSON object");
        return j;
    } catch (const nlohmann::json::parse_error &e) {
        throw InvalidInput("line " + std::to_string(line_no) + ": " + e.what());
    }
}

} // namespace

Segment make_segment(std::string id, std::string source_text, LanguageCode source_language,
                     std::optional<std::string> reference_translation, std::uint32_t up_votes,
                     std::uint32_t down_votes) {
    Segment s;
    s.token_count = text::count_tokens(source_text);
    s.id = std::move(id);
    s.source_text = std::move(source_text);
    s.source_language = std::move(source_language);
    s.reference_translation = std::move(reference_translation);
    s.up_votes = up_votes;
    s.down_votes = down_votes;
    return s;
}

TsvImport import_covost_tsv(std::istream &in, const LanguageCode &source_language) {
    const std::string data = slurp(in);
    require_utf8(data);
    const auto lines = split_lines(data);
    if (lines.empty()) throw SchemaError("header");

    const auto header = text::split(lines.front(), '\t');
    auto column = [&](std::string_view name) -> std::optional<std::size_t> {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) return std::nullopt;
        return static_cast<std::size_t>(it - header.begin());
    };
    auto id_col = column("id");
    if (!id_col) id_col = column("path");
    if (!id_col) throw SchemaError("id");
    std::size_t cols[4];
    const char *names[4] = {"sentence", "translation", "up_votes", "down_votes"};
    for (int k = 0; k < 4; ++k) {
        const auto c = column(names[k]);
        if (!c) throw SchemaError(names[k]);
        cols[k] = *c;
    }

    TsvImport out;
    std::set<std::string, std::less<>> seen;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto line_no = li + 1;
        if (lines[li].empty()) continue;
        const auto cells = text::split(lines[li], '\t');
        auto reject = [&](const std::string &why) {
            out.rejected_rows.push_back("line " + std::to_string(line_no) + ": " + why);
        };
        auto cell = [&](std::size_t c) -> std::optional<std::string_view> {
            if (c >= cells.size()) return std::nullopt;
            return cells[c];
        };

        const auto id = cell(*id_col);
        const auto sentence = cell(cols[0]);
        const auto translation = cell(cols[1]);
        const auto up = cell(cols[2]);
        const auto down = cell(cols[3]);
        if (!id || text::trim(*id).empty()) {
            reject("missing id");
            continue;
        }
        if (!sentence || text::is_blank(*sentence)) {
            reject("missing sentence");
            continue;
        }
        const auto up_v = up ? parse_count(*up) : std::nullopt;
        if (!up_v) {
            reject("missing or invalid up_votes");
            continue;
        }
        const auto down_v = down ? parse_count(*down) : std::nullopt;
        if (!down_v) {
            reject("missing or invalid down_votes");
            continue;
        }
        std::string id_str(text::trim(*id));
        if (!seen.insert(id_str).second) throw DuplicateIdError(id_str);

        std::optional<std::string> ref;
        if (translation && !text::is_blank(*translation)) ref = std::string(*translation);
        out.segments.push_back(make_segment(std::move(id_str), std::string(*sentence), source_language,
                                            std::move(ref), *up_v, *down_v));
    }
    return out;
}

std::vector<Segment> read_corpus_jsonl(std::istream &in) {
    const std::string data = slurp(in);
    require_utf8(data);
    std::vector<Segment> out;
    std::set<std::string, std::less<>> seen;
    const auto lines = split_lines(data);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) continue;
        const auto j = parse_json_line(lines[i], i + 1);
        std::optional<std::string> ref;
        if (j.contains("reference_translation") && !j["reference_translation"].is_null()) {
            ref = json_string(j, "reference_translation");
        }
        auto seg = make_segment(json_string(j, "id"), json_string(j, "source_text"),
                                json_string(j, "source_language"), std::move(ref),
                                json_count(j, "up_votes"), json_count(j, "down_votes"));
        if (!seen.insert(seg.id).second) throw DuplicateIdError(seg.id);
        out.push_back(std::move(seg));
    }
    return out;
}

void write_corpus_jsonl(std::ostream &out, std::span<const Segment> segments) {
    for (const auto &s : segments) {
        nlohmann::ordered_json j;
        j["id"] = s.id;
        j["source_text"] = s.source_text;
        j["source_language"] = s.source_language;
        j["reference_translation"] =
            s.reference_translation ? nlohmann::ordered_json(*s.reference_translation) : nullptr;
        j["up_votes"] = s.up_votes;
        j["down_votes"] = s.down_votes;
        out << j.dump() << '\n';
    }
}

std::vector<Segment> load_corpus(const std::string &path, const LanguageCode &source_language,
                                 std::vector<std::string> *rejected_rows) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open corpus: " + path);
    const bool tsv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".tsv") == 0;
    if (!tsv) return read_corpus_jsonl(in);
    auto imported = import_covost_tsv(in, source_language);
    if (rejected_rows) *rejected_rows = std::move(imported.rejected_rows);
    return std::move(imported.segments);
}

Submission load_submission(std::istream &in, const SubmissionManifest &manifest,
                           std::span<const Segment> corpus) {
    if (manifest.system_name.empty()) throw InvalidInput("submission needs a system name");
    const std::string data = slurp(in);
    require_utf8(data);
    const auto lines = split_lines(data);

    Submission sub{manifest.system_name, manifest.pair, {}};
    if (manifest.format == SubmissionFormat::plain_text) {
        if (lines.size() != corpus.size()) throw AlignmentError(corpus.size(), lines.size());
        for (std::size_t i = 0; i < lines.size(); ++i) {
            sub.translations.emplace(corpus[i].id, std::string(lines[i]));
        }
        return sub;
    }

    std::set<std::string, std::less<>> known;
    for (const auto &s : corpus) known.insert(s.id);
    std::vector<std::string> unknown;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) continue;
        const auto j = parse_json_line(lines[i], i + 1);
        auto id = json_string(j, "id");
        auto txt = json_string(j, "text");
        if (!known.contains(id)) {
            unknown.push_back(std::move(id));
            continue;
        }
        if (!sub.translations.emplace(id, std::move(txt)).second) {
            throw InvalidInput("submission repeats segment id " + id);
        }
    }
    if (!unknown.empty()) {
        std::string msg = "submission for " + manifest.system_name + " references unknown ids:";
        for (const auto &u : unknown) msg += " " + u;
        throw UnknownIdError(msg);
    }
    return sub;
}

std::vector<Segment> apply_filter(std::span<const Segment> segments, const FilterPolicy &policy) {
    std::vector<Segment> out;
    for (const auto &s : segments) {
        std::size_t tokens = s.token_count;
        if (policy.side == FilterSide::target) {
            if (!s.reference_translation) continue;
            tokens = text::count_tokens(*s.reference_translation);
        }
        if (tokens >= policy.min_tokens && s.up_votes >= policy.min_upvotes &&
            s.down_votes <= policy.max_downvotes) {
            out.push_back(s);
        }
    }
    return out;
}

std::vector<HistogramBin> token_histogram(std::span<const Segment> segments, std::size_t bin_width) {
    if (bin_width == 0) throw InvalidInput("bin width must be at least 1");
    if (segments.empty()) return {};
    std::size_t max_tokens = 0;
    for (const auto &s : segments) max_tokens = std::max(max_tokens, s.token_count);
    std::vector<HistogramBin> bins(max_tokens / bin_width + 1);
    for (std::size_t b = 0; b < bins.size(); ++b) bins[b].bin_start = b * bin_width;
    for (const auto &s : segments) ++bins[s.token_count / bin_width].count;
    return bins;
}

void write_histogram_csv(std::ostream &out, std::span<const HistogramBin> bins) {
    out << "bin_start,count\n";
    for (const auto &b : bins) out << b.bin_start << ',' << b.count << '\n';
}

} // namespace isochrono
