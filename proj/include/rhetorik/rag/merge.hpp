#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rhetorik/rag/chunking.hpp"
#include "rhetorik/rag/index.hpp"

namespace rhetorik::rag {

/// A context passage handed to reranking, with its retrieval rank (0 = best).
struct Candidate {
    ChunkId chunk_id = 0;
    std::string text;
    std::size_t rank = 0;
    bool operator==(const Candidate&) const = default;
};

inline std::vector<Candidate> as_candidates(const std::vector<Scored>& retrieved, const ChunkTree& tree) {
    std::vector<Candidate> out;
    for (std::size_t i = 0; i < retrieved.size(); ++i) {
        out.push_back({retrieved[i].chunk_id, tree.at(retrieved[i].chunk_id).text, i});
    }
    return out;
}

/// Bottom-up merging: a parent replaces its retrieved descendants when the share of its direct
/// children present reaches `threshold`. Output keeps the rank of each group's best member.
inline std::vector<Candidate> auto_merge(const std::vector<Scored>& retrieved, const ChunkTree& tree,
                                         double threshold = 0.5) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw std::invalid_argument("merge threshold must lie in (0, 1]");
    }
    std::map<ChunkId, std::size_t> selected;  // chunk id -> best rank
    for (std::size_t i = 0; i < retrieved.size(); ++i) {
        const auto id = retrieved[i].chunk_id;
        if (tree.at(id).level != 0) {
            throw std::invalid_argument("retrieved chunk " + std::to_string(id) + " is not a leaf");
        }
        selected.emplace(id, i);
    }
    const auto is_descendant = [&](ChunkId node, ChunkId ancestor) {
        for (auto p = tree.at(node).parent_id; p; p = tree.at(*p).parent_id) {
            if (*p == ancestor) {
                return true;
            }
        }
        return false;
    };

    const auto& levels = tree.levels();
    for (std::size_t l = levels.size(); l-- > 1;) {
        for (const auto& parent : levels[l - 1]) {
            const auto& children = tree.children(parent.id);
            if (children.empty()) {
                continue;
            }
            std::size_t present = 0;
            for (auto c : children) {
                present += selected.contains(c) ? 1 : 0;
            }
            if (present == 0 ||
                static_cast<double>(present) / static_cast<double>(children.size()) < threshold) {
                continue;
            }
            std::size_t best = static_cast<std::size_t>(-1);
            for (auto it = selected.begin(); it != selected.end();) {
                if (is_descendant(it->first, parent.id)) {
                    best = std::min(best, it->second);
                    it = selected.erase(it);
                } else {
                    ++it;
                }
            }
            selected.emplace(parent.id, best);
        }
    }

    std::vector<Candidate> out;
    for (const auto& [id, rank] : selected) {
        out.push_back({id, tree.at(id).text, rank});
    }
    std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) { return a.rank < b.rank; });
    return out;
}

}  // namespace rhetorik::rag
