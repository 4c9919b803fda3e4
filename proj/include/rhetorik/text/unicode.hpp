#pragma once

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

namespace rhetorik::text {

/// NFC-normalizes UTF-8 input. Invalid sequences are replaced by U+FFFD.
inline std::string nfc(std::string_view input) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) {
        return std::string(input);
    }
    icu::UnicodeString source = icu::UnicodeString::fromUTF8(
        icu::StringPiece(input.data(), static_cast<int32_t>(input.size())));
    icu::UnicodeString normalized = normalizer->normalize(source, status);
    if (U_FAILURE(status)) {
        return std::string(input);
    }
    std::string out;
    normalized.toUTF8String(out);
    return out;
}

inline std::string fold_case(std::string_view input) {
    icu::UnicodeString s = icu::UnicodeString::fromUTF8(
        icu::StringPiece(input.data(), static_cast<int32_t>(input.size())));
    s.foldCase();
    std::string out;
    s.toUTF8String(out);
    return out;
}

/// Number of Unicode code points in a UTF-8 string.
inline std::size_t code_point_count(std::string_view input) {
    std::size_t count = 0;
    int32_t i = 0;
    const auto length = static_cast<int32_t>(input.size());
    const auto* bytes = reinterpret_cast<const uint8_t*>(input.data());
    while (i < length) {
        UChar32 c;
        U8_NEXT(bytes, i, length, c);
        (void)c;
        ++count;
    }
    return count;
}

/// Decodes UTF-8 into code points (invalid bytes become U+FFFD).
inline std::vector<char32_t> decode(std::string_view input) {
    std::vector<char32_t> out;
    out.reserve(input.size());
    int32_t i = 0;
    const auto length = static_cast<int32_t>(input.size());
    const auto* bytes = reinterpret_cast<const uint8_t*>(input.data());
    while (i < length) {
        UChar32 c;
        U8_NEXT(bytes, i, length, c);
        out.push_back(c < 0 ? U'�' : static_cast<char32_t>(c));
    }
    return out;
}

inline void append_utf8(std::string& out, char32_t c) {
    uint8_t buffer[4];
    int32_t offset = 0;
    UBool error = false;
    U8_APPEND(buffer, offset, 4, static_cast<UChar32>(c), error);
    if (!error) {
        out.append(reinterpret_cast<const char*>(buffer), static_cast<std::size_t>(offset));
    }
}

inline std::string encode(const std::vector<char32_t>& code_points) {
    std::string out;
    out.reserve(code_points.size());
    for (char32_t c : code_points) {
        append_utf8(out, c);
    }
    return out;
}

inline bool is_letter_or_digit(char32_t c) {
    return u_isalnum(static_cast<UChar32>(c)) != 0;
}

inline bool is_space(char32_t c) {
    return u_isUWhiteSpace(static_cast<UChar32>(c)) != 0;
}

/// Strips leading and trailing code points that are neither letters nor digits.
inline std::string strip_punctuation(std::string_view token) {
    auto cps = decode(token);
    std::size_t begin = 0;
    std::size_t end = cps.size();
    while (begin < end && !is_letter_or_digit(cps[begin])) {
        ++begin;
    }
    while (end > begin && !is_letter_or_digit(cps[end - 1])) {
        --end;
    }
    return encode(std::vector<char32_t>(cps.begin() + static_cast<std::ptrdiff_t>(begin),
                                        cps.begin() + static_cast<std::ptrdiff_t>(end)));
}

inline std::string trim(std::string_view s) {
    const char* ws = " \t\r\n\f\v";
    const auto begin = s.find_first_not_of(ws);
    if (begin == std::string_view::npos) {
        return {};
    }
    const auto end = s.find_last_not_of(ws);
    return std::string(s.substr(begin, end - begin + 1));
}

/// Whitespace-delimited tokens (the token unit used for chunking).
inline std::vector<std::string> whitespace_tokens(std::string_view s) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) {
            ++i;
        }
        const std::size_t start = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) {
            ++i;
        }
        if (i > start) {
            tokens.emplace_back(s.substr(start, i - start));
        }
    }
    return tokens;
}

/// Case-folded, punctuation-stripped word tokens; empty tokens dropped.
inline std::vector<std::string> word_tokens(std::string_view s) {
    std::vector<std::string> out;
    for (const auto& raw : whitespace_tokens(s)) {
        auto stripped = strip_punctuation(raw);
        if (!stripped.empty()) {
            out.push_back(fold_case(stripped));
        }
    }
    return out;
}

/// Splits on terminal punctuation (. ! ?) followed by whitespace. Empty pieces are dropped.
inline std::vector<std::string> split_sentences(std::string_view s) {
    std::vector<std::string> sentences;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if ((c == '.' || c == '!' || c == '?') && i + 1 < s.size() &&
            std::isspace(static_cast<unsigned char>(s[i + 1]))) {
            auto piece = trim(s.substr(start, i + 1 - start));
            if (!piece.empty()) {
                sentences.push_back(std::move(piece));
            }
            start = i + 1;
        }
    }
    auto tail = trim(s.substr(start));
    if (!tail.empty()) {
        sentences.push_back(std::move(tail));
    }
    return sentences;
}

/// Case-folded maximal runs of letters and digits; every other code point separates words.
inline std::vector<std::string> letter_runs(std::string_view s) {
    std::vector<std::string> out;
    std::string current;
    for (char32_t c : decode(s)) {
        if (is_letter_or_digit(c)) {
            append_utf8(current, c);
        } else if (!current.empty()) {
            out.push_back(fold_case(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        out.push_back(fold_case(current));
    }
    return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view separator) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) {
            out.append(separator);
        }
        out.append(parts[i]);
    }
    return out;
}

}  // namespace rhetorik::text
