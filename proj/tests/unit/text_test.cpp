#include <catch2/catch_amalgamated.hpp>

#include <regex>
#include <string>
#include <vector>

#include "mdf/text.hpp"

#include "common/generators.hpp"

namespace {

/// Regex-split oracle for token counting, ASCII whitespace classes.
std::size_t regex_token_count(const std::string& text) {
    static const std::regex ws("[ \\t\\n\\r\\f\\v]+");
    std::size_t n = 0;
    for (std::sregex_token_iterator it(text.begin(), text.end(), ws, -1), end; it != end; ++it) {
        if (it->length() > 0) ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("count_tokens counts maximal non-whitespace runs") {
    CHECK(mdf::count_tokens("hello world") == 2);
    CHECK(mdf::count_tokens("") == 0);
    CHECK(mdf::count_tokens("a  b\nc") == 3);
    CHECK(mdf::count_tokens("   ") == 0);
    CHECK(mdf::count_tokens("one") == 1);
}

TEST_CASE("count_tokens matches a regex-split oracle on random ASCII text") {
    mdft::rng_t rng(2024);
    for (int i = 0; i < 300; ++i) {
        std::string text;
        const std::size_t len = mdft::pick(rng, 60);
        for (std::size_t j = 0; j < len; ++j) {
            static const char alphabet[] = "ab c\td\ne.f\r";
            text.push_back(alphabet[mdft::pick(rng, sizeof(alphabet) - 1)]);
        }
        INFO("text: " << text);
        CHECK(mdf::count_tokens(text) == regex_token_count(text));
    }
}

TEST_CASE("count_tokens treats non-ASCII whitespace as separators") {
    CHECK(mdf::count_tokens("a\xC2\xA0""b") == 2);          // no-break space
    CHECK(mdf::count_tokens("a\xE2\x80\x83""b") == 2);      // em space
    CHECK(mdf::count_tokens("a\xE3\x80\x80""b") == 2);      // ideographic space
    CHECK(mdf::count_tokens("caf\xC3\xA9 bar") == 2);       // e-acute is not a space
}

TEST_CASE("whitespace_token_spans covers exactly the non-space bytes") {
    const std::string text = "  ab  cd\n\nef ";
    const auto spans = mdf::whitespace_token_spans(text);
    REQUIRE(spans.size() == 3);
    CHECK(text.substr(spans[0].begin, spans[0].end - spans[0].begin) == "ab");
    CHECK(text.substr(spans[1].begin, spans[1].end - spans[1].begin) == "cd");
    CHECK(text.substr(spans[2].begin, spans[2].end - spans[2].begin) == "ef");
}

TEST_CASE("normalize_for_match lowercases, collapses space, strips punctuation") {
    CHECK(mdf::normalize_for_match("September  1999.") == "september 1999");
    CHECK(mdf::normalize_for_match("  A,B ; c  ") == "ab c");
    CHECK(mdf::normalize_for_match("") == "");
    CHECK(mdf::normalize_for_match("...") == "");
}

TEST_CASE("normalize_label keeps punctuation but collapses case and space") {
    CHECK(mdf::normalize_label("Section 1.1 {name}") == "section 1.1 {name}");
    CHECK(mdf::normalize_label("  A\n B ") == "a b");
}

TEST_CASE("search_tokens strips edge punctuation and lowercases") {
    const auto tokens = mdf::search_tokens("The cat, (the) DOG!");
    REQUIRE(tokens.size() == 4);
    CHECK(tokens[0] == "the");
    CHECK(tokens[1] == "cat");
    CHECK(tokens[2] == "the");
    CHECK(tokens[3] == "dog");
    CHECK(mdf::search_tokens("...").empty());
    CHECK(mdf::search_tokens("1.2.3").size() == 1);  // interior punctuation survives
}
