#pragma once

#include <initializer_list>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "rhetorik/rag/chunking.hpp"
#include "rhetorik/rag/index.hpp"
#include "rhetorik/rag/merge.hpp"

namespace rhetorik::oracle {

/// Random text with mixed whitespace runs, punctuation and non-ASCII words.
inline std::string random_document(std::mt19937& rng, std::size_t tokens) {
    static const std::vector<std::string> words = {"Anapher", "Wort", "Satz", "die", "Wiederholung", "am",
                                                   "Anfang", "Ende", "Figur.", "\xC3\xA4hnlich,", "x", "(Goethe)"};
    static const std::vector<std::string> gaps = {" ", "  ", "\n", "\t", " \n\n"};
    std::string doc;
    if (rng() % 2 == 0) {
        doc += gaps[rng() % gaps.size()];
    }
    for (std::size_t i = 0; i < tokens; ++i) {
        if (i > 0) {
            doc += gaps[rng() % gaps.size()];
        }
        doc += words[rng() % words.size()];
    }
    return doc;
}

/// Splits on ASCII whitespace by hand.
inline std::vector<std::string> oracle_tokens(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ' ' || c == '\n' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
            if (!cur.empty()) {
                out.push_back(cur);
                cur.clear();
            }
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) {
        out.push_back(cur);
    }
    return out;
}

inline std::vector<std::string> concat_tokens(const std::vector<rag::Chunk>& chunks) {
    std::vector<std::string> out;
    for (const auto& c : chunks) {
        auto t = oracle_tokens(c.text);
        out.insert(out.end(), t.begin(), t.end());
    }
    return out;
}

/// First violated reconstruction or containment invariant, or nullopt.
inline std::optional<std::string> tree_violation(const rag::ChunkTree& tree, const std::vector<std::string>& tokens,
                                                 const std::vector<std::size_t>& sizes) {
    if (tree.levels().size() != sizes.size() || tree.sizes() != sizes) {
        return "level count or sizes differ";
    }
    std::set<rag::ChunkId> ids;
    for (std::size_t l = 0; l < tree.levels().size(); ++l) {
        const auto& level = tree.levels()[l];
        const auto where = " at level " + std::to_string(l);
        if (concat_tokens(level) != tokens) {
            return "concatenation does not reconstruct the document" + where;
        }
        std::size_t expected_start = 0;
        for (const auto& c : level) {
            if (!ids.insert(c.id).second) {
                return "duplicate id " + std::to_string(c.id);
            }
            if (c.level != static_cast<int>(sizes.size() - 1 - l)) {
                return "wrong level number" + where;
            }
            if (c.span.size() < 1 || c.span.size() > sizes[l] || c.span.start != expected_start) {
                return "bad span" + where;
            }
            expected_start = c.span.end;
            if (oracle_tokens(c.text) != std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(c.span.start),
                                                                  tokens.begin() + static_cast<std::ptrdiff_t>(c.span.end))) {
                return "chunk text does not match its span" + where;
            }
            if (l == 0) {
                if (c.parent_id) {
                    return "root with parent";
                }
            } else {
                if (!c.parent_id) {
                    return "non-root without parent" + where;
                }
                const auto& parent = tree.at(*c.parent_id);
                if (parent.level != c.level + 1 || !parent.span.contains(c.span)) {
                    return "parent does not contain child" + where;
                }
            }
        }
        if (expected_start != tokens.size()) {
            return "level does not cover the document" + where;
        }
        if (l + 1 < tree.levels().size()) {
            for (const auto& parent : level) {
                const auto& kids = tree.children(parent.id);
                if (kids.empty()) {
                    return "parent without children" + where;
                }
                std::size_t cursor = parent.span.start;
                for (auto k : kids) {
                    if (tree.at(k).span.start != cursor) {
                        return "children do not tile the parent" + where;
                    }
                    cursor = tree.at(k).span.end;
                }
                if (cursor != parent.span.end) {
                    return "children do not tile the parent" + where;
                }
            }
        }
    }
    return std::nullopt;
}

/// Two roots of 3 and 4 leaves, built by hand: ids 0,1 roots; 2..4 under 0; 5..8 under 1.
inline rag::ChunkTree two_level_tree() {
    std::vector<rag::Chunk> roots = {{0, "r0", 1, std::nullopt, {0, 3}}, {1, "r1", 1, std::nullopt, {3, 7}}};
    std::vector<rag::Chunk> leaves;
    for (rag::ChunkId i = 0; i < 7; ++i) {
        const rag::ChunkId parent = i < 3 ? 0 : 1;
        leaves.push_back({i + 2, "l" + std::to_string(i + 2), 0, parent, {i, i + 1}});
    }
    return rag::ChunkTree({roots, leaves}, {3, 1});
}

/// Retrieval result in the given order with strictly decreasing scores.
inline std::vector<rag::Scored> ranked(std::initializer_list<rag::ChunkId> ids) {
    std::vector<rag::Scored> out;
    double score = 1.0;
    for (auto id : ids) {
        out.push_back({id, score});
        score -= 0.01;
    }
    return out;
}

inline std::vector<rag::ChunkId> ids_of(const std::vector<rag::Candidate>& cs) {
    std::vector<rag::ChunkId> out;
    for (const auto& c : cs) {
        out.push_back(c.chunk_id);
    }
    return out;
}

}  // namespace rhetorik::oracle
