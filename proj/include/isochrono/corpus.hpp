#pragma once

#include "isochrono/text.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace isochrono {

struct Segment {
    std::string id;
    std::string source_text;
    LanguageCode source_language;
    std::optional<std::string> reference_translation;
    std::uint32_t up_votes = 0;
    std::uint32_t down_votes = 0;
    std::size_t token_count = 0; ///< toolkit token count of source_text

    friend bool operator==(const Segment &, const Segment &) = default;
};

/// Builds a segment and fills in token_count.
Segment make_segment(std::string id, std::string source_text, LanguageCode source_language,
                     std::optional<std::string> reference_translation, std::uint32_t up_votes,
                     std::uint32_t down_votes);

struct TsvImport {
    std::vector<Segment> segments;
    std::vector<std::string> rejected_rows; ///< "line N: reason"
};

/// Reads a CommonVoice/CoVoST-style TSV. Required header columns: `id` (or
/// `path`), `sentence`, `translation`, `up_votes`, `down_votes`. Cells are
/// unquoted; rows missing mandatory cells are skipped and reported.
TsvImport import_covost_tsv(std::istream &in, const LanguageCode &source_language = "en");

/// Canonical corpus: one JSON object per line with id, source_text,
/// source_language, reference_translation (or null), up_votes, down_votes.
std::vector<Segment> read_corpus_jsonl(std::istream &in);
void write_corpus_jsonl(std::ostream &out, std::span<const Segment> segments);

/// Loads `.tsv` files through the TSV importer and anything else as JSONL.
std::vector<Segment> load_corpus(const std::string &path, const LanguageCode &source_language = "en",
                                 std::vector<std::string> *rejected_rows = nullptr);

enum class SubmissionFormat {
    plain_text, ///< one translation per line, aligned to corpus order
    jsonl,      ///< {"id": ..., "text": ...} records
};

struct SubmissionManifest {
    std::string system_name;
    LanguagePair pair;
    SubmissionFormat format = SubmissionFormat::plain_text;
};

struct Submission {
    std::string system_name;
    LanguagePair pair;
    std::map<std::string, std::string> translations; ///< segment id -> text
};

Submission load_submission(std::istream &in, const SubmissionManifest &manifest,
                           std::span<const Segment> corpus);

enum class FilterSide { source, target };

struct FilterPolicy {
    static constexpr std::uint32_t unlimited = std::numeric_limits<std::uint32_t>::max();

    std::size_t min_tokens = 20;
    std::uint32_t min_upvotes = 3;
    std::uint32_t max_downvotes = 0;
    FilterSide side = FilterSide::source;
};

/// Keeps segments with enough tokens, enough up votes and few enough down
/// votes. Order is preserved. Target-side filtering drops segments without a
/// reference translation.
std::vector<Segment> apply_filter(std::span<const Segment> segments, const FilterPolicy &policy);

struct HistogramBin {
    std::size_t bin_start = 0;
    std::size_t count = 0;

    friend bool operator==(const HistogramBin &, const HistogramBin &) = default;
};

/// Token-count histogram with zero bins filled in up to the largest count.
std::vector<HistogramBin> token_histogram(std::span<const Segment> segments, std::size_t bin_width);

void write_histogram_csv(std::ostream &out, std::span<const HistogramBin> bins);

} // namespace isochrono
