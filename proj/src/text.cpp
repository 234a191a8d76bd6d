#include "isochrono/text.hpp"

#include "isochrono/errors.hpp"

namespace isochrono {

LanguagePair LanguagePair::parse(std::string_view text) {
    const auto dash = text.find('-');
    if (dash == std::string_view::npos || dash == 0 || dash + 1 == text.size() ||
        text.find('-', dash + 1) != std::string_view::npos) {
        throw InvalidInput("language pair must look like 'en-de', got '" + std::string(text) + "'");
    }
    return {std::string(text.substr(0, dash)), std::string(text.substr(dash + 1))};
}

namespace text {

namespace {

// Returns the sequence length and writes the code point, or 0 on malformed input.
std::size_t decode_one(std::string_view s, std::size_t i, char32_t &out) noexcept {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        out = b0;
        return 1;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
        min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
        min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
        min = 0x10000;
    } else {
        return 0;
    }
    if (i + len > s.size()) return 0;
    for (std::size_t k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) return 0;
        cp = (cp << 6) | (b & 0x3F);
    }
    // Overlong forms, surrogates and out-of-range values are all rejected.
    if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
    out = cp;
    return len;
}

} // namespace

std::size_t find_invalid_utf8(std::string_view bytes) noexcept {
    std::size_t i = 0;
    char32_t cp;
    while (i < bytes.size()) {
        const auto n = decode_one(bytes, i, cp);
        if (n == 0) return i;
        i += n;
    }
    return std::string_view::npos;
}

std::vector<char32_t> decode_utf8(std::string_view bytes) {
    std::vector<char32_t> out;
    out.reserve(bytes.size());
    std::size_t i = 0;
    char32_t cp;
    while (i < bytes.size()) {
        const auto n = decode_one(bytes, i, cp);
        if (n == 0) throw EncodingError("malformed UTF-8", i);
        out.push_back(cp);
        i += n;
    }
    return out;
}

bool is_space(char32_t cp) noexcept {
    switch (cp) {
    case U' ': case U'\t': case U'\n': case U'\v': case U'\f': case U'\r':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000: case 0xFEFF:
        return true;
    default:
        return cp >= 0x2000 && cp <= 0x200B;
    }
}

bool is_cjk(char32_t cp) noexcept {
    return (cp >= 0x4E00 && cp <= 0x9FFF) ||   // unified ideographs
           (cp >= 0x3400 && cp <= 0x4DBF) ||   // extension A
           (cp >= 0xF900 && cp <= 0xFAFF) ||   // compatibility ideographs
           (cp >= 0x20000 && cp <= 0x3134F) || // extensions B..G
           (cp >= 0x3040 && cp <= 0x30FF) ||   // hiragana, katakana
           (cp >= 0xAC00 && cp <= 0xD7AF);     // hangul syllables
}

bool is_cjk_punctuation(char32_t cp) noexcept {
    return (cp >= 0x3001 && cp <= 0x303F) || (cp >= 0xFF01 && cp <= 0xFF0F) ||
           (cp >= 0xFF1A && cp <= 0xFF20) || (cp >= 0xFF3B && cp <= 0xFF40) ||
           (cp >= 0xFF5B && cp <= 0xFF65) || (cp >= 0xFE30 && cp <= 0xFE4F);
}

std::size_t count_tokens(std::string_view utf8) {
    std::size_t tokens = 0;
    bool in_word = false;
    for (char32_t cp : decode_utf8(utf8)) {
        if (is_space(cp) || is_cjk_punctuation(cp)) {
            in_word = false;
        } else if (is_cjk(cp)) {
            ++tokens;
            in_word = false;
        } else if (!in_word) {
            ++tokens;
            in_word = true;
        }
    }
    return tokens;
}

std::size_t count_characters(std::string_view utf8) {
    std::size_t n = 0;
    for (char32_t cp : decode_utf8(utf8)) {
        if (!is_space(cp)) ++n;
    }
    return n;
}

std::string_view trim(std::string_view s) noexcept {
    constexpr std::string_view ws = " \t\r\n\v\f";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

bool is_blank(std::string_view utf8) { return count_characters(utf8) == 0; }

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

} // namespace text
} // namespace isochrono
