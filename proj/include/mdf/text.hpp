#pragma once

#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mdf {

/// Half-open byte range [begin, end) of one token inside its source string.
struct TokenSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

namespace detail {

// Decodes one UTF-8 code point starting at `pos`. Malformed bytes decode as
// themselves (latin-1 style) so tokenization never throws on binary garbage.
inline char32_t decode_utf8(std::string_view s, std::size_t pos, std::size_t& len) {
    const auto b0 = static_cast<unsigned char>(s[pos]);
    if (b0 < 0x80) {
        len = 1;
        return b0;
    }
    int extra = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        extra = 1;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        extra = 2;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        extra = 3;
        cp = b0 & 0x07;
    } else {
        len = 1;
        return b0;
    }
    if (pos + extra >= s.size()) {
        len = 1;
        return b0;
    }
    for (int i = 1; i <= extra; ++i) {
        const auto bi = static_cast<unsigned char>(s[pos + i]);
        if ((bi & 0xC0) != 0x80) {
            len = 1;
            return b0;
        }
        cp = (cp << 6) | (bi & 0x3F);
    }
    len = static_cast<std::size_t>(extra) + 1;
    return cp;
}

}  // namespace detail

/// Unicode White_Space code points (the set regex \s matches in Unicode mode).
inline bool is_unicode_space(char32_t cp) {
    switch (cp) {
        case U'\t':
        case U'\n':
        case 0x0B:
        case 0x0C:
        case U'\r':
        case U' ':
        case 0x85:
        case 0xA0:
        case 0x1680:
        case 0x2028:
        case 0x2029:
        case 0x202F:
        case 0x205F:
        case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

/// Byte spans of the maximal non-whitespace runs in `text`.
inline std::vector<TokenSpan> whitespace_token_spans(std::string_view text) {
    std::vector<TokenSpan> spans;
    std::size_t pos = 0;
    bool in_token = false;
    std::size_t token_begin = 0;
    while (pos < text.size()) {
        std::size_t len = 0;
        const char32_t cp = detail::decode_utf8(text, pos, len);
        if (is_unicode_space(cp)) {
            if (in_token) {
                spans.push_back({token_begin, pos});
                in_token = false;
            }
        } else if (!in_token) {
            token_begin = pos;
            in_token = true;
        }
        pos += len;
    }
    if (in_token) spans.push_back({token_begin, text.size()});
    return spans;
}

/// Number of maximal non-whitespace runs (the default token unit).
inline std::size_t count_tokens(std::string_view text) {
    return whitespace_token_spans(text).size();
}

inline std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

inline bool is_ascii_punct(char c) {
    const auto u = static_cast<unsigned char>(c);
    return u < 0x80 && std::ispunct(u) != 0;
}

/// Lowercases, drops ASCII punctuation, and collapses whitespace runs to a
/// single space. Used for answer-in-chunk matching.
inline std::string normalize_for_match(std::string_view text) {
    std::string lowered = ascii_lower(text);
    std::string out;
    out.reserve(lowered.size());
    std::size_t pos = 0;
    bool pending_space = false;
    while (pos < lowered.size()) {
        std::size_t len = 0;
        const char32_t cp = detail::decode_utf8(lowered, pos, len);
        if (is_unicode_space(cp)) {
            pending_space = true;
        } else if (len == 1 && is_ascii_punct(lowered[pos])) {
            // dropped
        } else {
            if (pending_space && !out.empty()) out.push_back(' ');
            pending_space = false;
            out.append(lowered, pos, len);
        }
        pos += len;
    }
    return out;
}

/// Lowercase + whitespace-collapse, punctuation kept. Used for tree labels.
inline std::string normalize_label(std::string_view text) {
    std::string lowered = ascii_lower(text);
    std::string out;
    out.reserve(lowered.size());
    std::size_t pos = 0;
    bool pending_space = false;
    while (pos < lowered.size()) {
        std::size_t len = 0;
        const char32_t cp = detail::decode_utf8(lowered, pos, len);
        if (is_unicode_space(cp)) {
            pending_space = true;
        } else {
            if (pending_space && !out.empty()) out.push_back(' ');
            pending_space = false;
            out.append(lowered, pos, len);
        }
        pos += len;
    }
    return out;
}

/// Search tokens: lowercased whitespace runs with leading/trailing ASCII
/// punctuation stripped; tokens that strip to nothing are dropped.
inline std::vector<std::string> search_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    for (const TokenSpan& span : whitespace_token_spans(text)) {
        std::size_t b = span.begin;
        std::size_t e = span.end;
        while (b < e && is_ascii_punct(text[b])) ++b;
        while (e > b && is_ascii_punct(text[e - 1])) --e;
        if (b == e) continue;
        tokens.push_back(ascii_lower(text.substr(b, e - b)));
    }
    return tokens;
}

}  // namespace mdf
