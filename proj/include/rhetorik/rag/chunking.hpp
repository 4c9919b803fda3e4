#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "rhetorik/text/unicode.hpp"

namespace rhetorik::rag {

using ChunkId = std::uint64_t;

/// Half-open range of whitespace-token offsets into the source document.
struct Span {
    std::size_t start = 0;
    std::size_t end = 0;

    [[nodiscard]] std::size_t size() const { return end - start; }
    [[nodiscard]] bool contains(const Span& other) const { return start <= other.start && other.end <= end; }
    bool operator==(const Span&) const = default;
};

struct Chunk {
    ChunkId id = 0;
    std::string text;
    /// Height above the leaves; 0 = leaf.
    int level = 0;
    std::optional<ChunkId> parent_id;
    Span span;
};

/// levels[0] holds the coarsest chunks, levels.back() the leaves.
class ChunkTree {
public:
    ChunkTree() = default;
    ChunkTree(std::vector<std::vector<Chunk>> levels, std::vector<std::size_t> sizes)
        : levels_(std::move(levels)), sizes_(std::move(sizes)) {
        reindex();
    }

    [[nodiscard]] const std::vector<std::vector<Chunk>>& levels() const { return levels_; }
    [[nodiscard]] const std::vector<std::size_t>& sizes() const { return sizes_; }
    [[nodiscard]] const std::vector<Chunk>& leaves() const {
        static const std::vector<Chunk> none;
        return levels_.empty() ? none : levels_.back();
    }
    [[nodiscard]] bool empty() const { return leaves().empty(); }

    [[nodiscard]] const Chunk& at(ChunkId id) const {
        const auto it = position_.find(id);
        if (it == position_.end()) {
            throw std::out_of_range("unknown chunk " + std::to_string(id));
        }
        return levels_[it->second.first][it->second.second];
    }
    [[nodiscard]] bool contains(ChunkId id) const { return position_.contains(id); }

    [[nodiscard]] const std::vector<ChunkId>& children(ChunkId id) const {
        static const std::vector<ChunkId> none;
        const auto it = children_.find(id);
        return it == children_.end() ? none : it->second;
    }

    [[nodiscard]] std::size_t chunk_count() const { return position_.size(); }

private:
    void reindex() {
        position_.clear();
        children_.clear();
        for (std::size_t l = 0; l < levels_.size(); ++l) {
            for (std::size_t i = 0; i < levels_[l].size(); ++i) {
                const auto& c = levels_[l][i];
                if (!position_.emplace(c.id, std::make_pair(l, i)).second) {
                    throw std::invalid_argument("duplicate chunk id " + std::to_string(c.id));
                }
                if (c.parent_id) {
                    children_[*c.parent_id].push_back(c.id);
                }
            }
        }
    }

    std::vector<std::vector<Chunk>> levels_;
    std::vector<std::size_t> sizes_;
    std::unordered_map<ChunkId, std::pair<std::size_t, std::size_t>> position_;
    std::unordered_map<ChunkId, std::vector<ChunkId>> children_;
};

namespace detail {

inline std::string join_tokens(const std::vector<std::string>& tokens, Span span) {
    std::string out;
    for (std::size_t i = span.start; i < span.end; ++i) {
        if (i > span.start) {
            out += ' ';
        }
        out += tokens[i];
    }
    return out;
}

/// Consecutive windows of at most `size` tokens covering `within`.
inline std::vector<Span> windows(Span within, std::size_t size) {
    std::vector<Span> out;
    for (std::size_t start = within.start; start < within.end; start += size) {
        out.push_back({start, std::min(within.end, start + size)});
    }
    return out;
}

}  // namespace detail

/// Non-overlapping windows of at most `size` whitespace tokens; ids 0..n-1.
inline std::vector<Chunk> chunk_basic(std::string_view document, std::size_t size) {
    if (size == 0) {
        throw std::invalid_argument("chunk size must be positive");
    }
    const auto tokens = text::whitespace_tokens(document);
    std::vector<Chunk> chunks;
    for (const auto& span : detail::windows({0, tokens.size()}, size)) {
        chunks.push_back(Chunk{chunks.size(), detail::join_tokens(tokens, span), 0, std::nullopt, span});
    }
    return chunks;
}

/// Coarsest windows first, then each parent re-chunked independently with the next size.
/// Ids are assigned level by level, coarse to fine.
inline ChunkTree chunk_hierarchical(std::string_view document, const std::vector<std::size_t>& sizes) {
    if (sizes.size() < 2) {
        throw std::invalid_argument("hierarchical chunking needs at least two sizes");
    }
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] == 0 || (i > 0 && sizes[i] >= sizes[i - 1])) {
            throw std::invalid_argument("chunk sizes must be positive and strictly decreasing");
        }
    }
    const auto tokens = text::whitespace_tokens(document);
    const int height = static_cast<int>(sizes.size()) - 1;
    std::vector<std::vector<Chunk>> levels(sizes.size());
    ChunkId next = 0;
    for (const auto& span : detail::windows({0, tokens.size()}, sizes[0])) {
        levels[0].push_back(Chunk{next++, detail::join_tokens(tokens, span), height, std::nullopt, span});
    }
    for (std::size_t l = 1; l < sizes.size(); ++l) {
        for (const auto& parent : levels[l - 1]) {
            for (const auto& span : detail::windows(parent.span, sizes[l])) {
                levels[l].push_back(Chunk{next++, detail::join_tokens(tokens, span), height - static_cast<int>(l),
                                          parent.id, span});
            }
        }
    }
    return ChunkTree(std::move(levels), sizes);
}

/// Single-level tree wrapping basic chunks (no merging possible).
inline ChunkTree chunk_flat(std::string_view document, std::size_t size) {
    return ChunkTree({chunk_basic(document, size)}, {size});
}

inline nlohmann::json to_json(const Chunk& c) {
    return {{"id", c.id},
            {"text", c.text},
            {"level", c.level},
            {"parent_id", c.parent_id ? nlohmann::json(*c.parent_id) : nlohmann::json()},
            {"span", {c.span.start, c.span.end}}};
}

inline Chunk chunk_from_json(const nlohmann::json& j) {
    Chunk c;
    c.id = j.at("id").get<ChunkId>();
    c.text = j.at("text").get<std::string>();
    c.level = j.at("level").get<int>();
    if (!j.at("parent_id").is_null()) {
        c.parent_id = j.at("parent_id").get<ChunkId>();
    }
    c.span = {j.at("span").at(0).get<std::size_t>(), j.at("span").at(1).get<std::size_t>()};
    return c;
}

inline nlohmann::json to_json(const ChunkTree& tree) {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& level : tree.levels()) {
        nlohmann::json chunks = nlohmann::json::array();
        for (const auto& c : level) {
            chunks.push_back(to_json(c));
        }
        levels.push_back(std::move(chunks));
    }
    return {{"sizes", tree.sizes()}, {"levels", std::move(levels)}};
}

inline ChunkTree tree_from_json(const nlohmann::json& j) {
    std::vector<std::vector<Chunk>> levels;
    for (const auto& level : j.at("levels")) {
        auto& out = levels.emplace_back();
        for (const auto& c : level) {
            out.push_back(chunk_from_json(c));
        }
    }
    return ChunkTree(std::move(levels), j.at("sizes").get<std::vector<std::size_t>>());
}

}  // namespace rhetorik::rag
