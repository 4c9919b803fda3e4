#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>

#include "rhetorik/text/unicode.hpp"

namespace rhetorik::annot {

inline constexpr std::size_t kMinRepeatedTokenLength = 2;

/// True iff some case-folded word of at least two code points occurs twice or more.
inline bool check_lexical_repetition(std::string_view raw) {
    std::unordered_map<std::string, std::size_t> counts;
    for (auto& token : text::letter_runs(text::nfc(raw))) {
        if (text::code_point_count(token) < kMinRepeatedTokenLength) {
            continue;
        }
        if (++counts[std::move(token)] >= 2) {
            return true;
        }
    }
    return false;
}

}  // namespace rhetorik::annot
