#include "support/oracles.hpp"

#include "isochrono/errors.hpp"
#include "isochrono/text.hpp"

#include <doctest.h>

using namespace isochrono;

TEST_CASE("language pair parsing") {
    const auto p = LanguagePair::parse("en-de");
    CHECK(p.source == "en");
    CHECK(p.target == "de");
    CHECK(p.str() == "en-de");
    CHECK_THROWS_AS(LanguagePair::parse("ende"), InvalidInput);
    CHECK_THROWS_AS(LanguagePair::parse("-de"), InvalidInput);
    CHECK_THROWS_AS(LanguagePair::parse("en-"), InvalidInput);
}

TEST_CASE("utf-8 validation reports the first bad byte") {
    CHECK(text::find_invalid_utf8("plain ascii") == std::string::npos);
    CHECK(text::find_invalid_utf8("Grüße 你好 \xF0\x9F\x8E\x89") == std::string::npos);
    CHECK(text::find_invalid_utf8("ab\xC3") == 2);         // truncated sequence
    CHECK(text::find_invalid_utf8("\xC0\xAF") == 0);       // overlong slash
    CHECK(text::find_invalid_utf8("x\xED\xA0\x80") == 1);  // UTF-16 surrogate
    CHECK(text::find_invalid_utf8("ok\xFFok") == 2);
    try {
        text::decode_utf8("abc\x80");
        FAIL("expected EncodingError");
    } catch (const EncodingError &e) {
        CHECK(e.byte_offset() == 3);
    }
    CHECK(text::decode_utf8("aü你") == std::vector<char32_t>{U'a', U'ü', U'你'});
}

TEST_CASE("token counting") {
    CHECK(text::count_tokens("a b c") == 3);
    CHECK(text::count_tokens("  spaced\tout \n words ") == 3);
    CHECK(text::count_tokens("") == 0);
    CHECK(text::count_tokens("   ") == 0);
    SUBCASE("CJK characters are tokens of their own") {
        CHECK(text::count_tokens("你好世界") == 4);
        CHECK(text::count_tokens("你好，世界。") == 4);
        CHECK(text::count_tokens("hello 世界 ok") == 4);
        CHECK(text::count_tokens("GPT-4很好") == 3);
        CHECK(text::count_tokens("こんにちは") == 5);
    }
}

TEST_CASE("character counting skips whitespace") {
    CHECK(text::count_characters("a b") == 2);
    CHECK(text::count_characters("Grüße") == 5);
    CHECK(text::count_characters("你好 世界") == 4);
    CHECK(text::count_characters(" \t\n") == 0);
}

TEST_CASE("trim, blank and split helpers") {
    CHECK(text::trim("  x y \t") == "x y");
    CHECK(text::is_blank(" \t "));
    CHECK_FALSE(text::is_blank(" a "));
    const auto parts = text::split("a\t\tb", '\t');
    REQUIRE(parts.size() == 3);
    CHECK(parts[1].empty());
}

TEST_CASE("token and character counts agree with oracles on random ASCII text") {
    gen::Gen g(2024);
    for (int i = 0; i < 1000; ++i) {
        const auto s = g.words(g.integer(0, 40));
        INFO("case ", i, ": '", s, "'");
        REQUIRE(text::count_tokens(s) == oracle::ascii_tokens(s));
        REQUIRE(text::count_characters(s) == oracle::ascii_non_space(s));
    }
}
