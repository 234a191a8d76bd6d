#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace isochrono {

using LanguageCode = std::string;

struct LanguagePair {
    LanguageCode source;
    LanguageCode target;

    /// Parses "en-de" style codes.
    static LanguagePair parse(std::string_view text);
    std::string str() const { return source + "-" + target; }

    friend bool operator==(const LanguagePair &, const LanguagePair &) = default;
    friend auto operator<=>(const LanguagePair &, const LanguagePair &) = default;
};

namespace text {

/// Decodes UTF-8 into code points. Throws EncodingError with the offset of
/// the first malformed byte.
std::vector<char32_t> decode_utf8(std::string_view bytes);

/// Offset of the first malformed byte, or npos when the input is valid UTF-8.
std::size_t find_invalid_utf8(std::string_view bytes) noexcept;

bool is_space(char32_t cp) noexcept;

/// Han ideographs, kana and hangul syllables: each one counts as a token.
bool is_cjk(char32_t cp) noexcept;

/// CJK and fullwidth punctuation. Separates tokens without being one.
bool is_cjk_punctuation(char32_t cp) noexcept;

/// Token count used everywhere in the toolkit: whitespace-delimited tokens,
/// except that every CJK character is its own token.
std::size_t count_tokens(std::string_view utf8);

/// Number of non-whitespace code points.
std::size_t count_characters(std::string_view utf8);

std::string_view trim(std::string_view s) noexcept;

bool is_blank(std::string_view utf8);

std::vector<std::string_view> split(std::string_view s, char sep);

} // namespace text
} // namespace isochrono
