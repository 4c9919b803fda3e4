#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "rhetorik/rag/chunking.hpp"
#include "rhetorik/rag/embedding.hpp"

namespace rhetorik::rag {

struct IndexEntry {
    ChunkId chunk_id = 0;
    Vector vector;
    bool operator==(const IndexEntry&) const = default;
};

struct Scored {
    ChunkId chunk_id = 0;
    double score = 0.0;
    bool operator==(const Scored&) const = default;
};

class IndexFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline double squared_norm(const Vector& v) {
    double n = 0.0;
    for (float x : v) {
        n += static_cast<double>(x) * static_cast<double>(x);
    }
    return n;
}

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out += static_cast<char>((v >> (8 * i)) & 0xFFU);
    }
}

inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out += static_cast<char>((v >> (8 * i)) & 0xFFU);
    }
}

class Reader {
public:
    explicit Reader(const std::string& bytes) : bytes_(bytes) {}

    std::uint64_t uint(int width) {
        if (pos_ + static_cast<std::size_t>(width) > bytes_.size()) {
            throw IndexFormatError("truncated index file");
        }
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_++])) << (8 * i);
        }
        return v;
    }
    [[nodiscard]] bool done() const { return pos_ == bytes_.size(); }

private:
    const std::string& bytes_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Exact cosine index. Layout on disk (little-endian): u32 dim, u32 count, then per record
/// u32 byte length, u64 chunk id, dim x f32.
class VectorIndex {
public:
    explicit VectorIndex(std::size_t dim = 0) : dim_(dim) {}

    [[nodiscard]] std::size_t dim() const { return dim_; }
    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] const std::vector<IndexEntry>& entries() const { return entries_; }

    void add(ChunkId id, Vector v) {
        if (v.size() != dim_) {
            throw std::invalid_argument("vector dimension " + std::to_string(v.size()) + " != " +
                                        std::to_string(dim_));
        }
        if (!ids_.insert(id).second) {
            throw std::invalid_argument("duplicate chunk id " + std::to_string(id));
        }
        norms_.push_back(detail::squared_norm(v));
        entries_.push_back({id, std::move(v)});
    }

    /// Top-k by cosine similarity; ties by ascending chunk id.
    [[nodiscard]] std::vector<Scored> search(const Vector& query, std::size_t k) const {
        if (query.size() != dim_ && !entries_.empty()) {
            throw std::invalid_argument("query dimension mismatch");
        }
        const double qn = detail::squared_norm(query);
        std::vector<Scored> scored;
        scored.reserve(entries_.size());
        for (std::size_t e = 0; e < entries_.size(); ++e) {
            const auto& v = entries_[e].vector;
            double dot = 0.0;
            for (std::size_t i = 0; i < dim_; ++i) {
                dot += static_cast<double>(v[i]) * static_cast<double>(query[i]);
            }
            const double score = (norms_[e] == 0.0 || qn == 0.0) ? 0.0 : dot / (std::sqrt(norms_[e]) * std::sqrt(qn));
            scored.push_back({entries_[e].chunk_id, score});
        }
        const auto better = [](const Scored& a, const Scored& b) {
            return a.score != b.score ? a.score > b.score : a.chunk_id < b.chunk_id;
        };
        const std::size_t n = std::min(k, scored.size());
        std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), better);
        scored.resize(n);
        return scored;
    }

    [[nodiscard]] std::string serialize() const {
        std::string out;
        detail::put_u32(out, static_cast<std::uint32_t>(dim_));
        detail::put_u32(out, static_cast<std::uint32_t>(entries_.size()));
        for (const auto& e : entries_) {
            detail::put_u32(out, static_cast<std::uint32_t>(8 + 4 * dim_));
            detail::put_u64(out, e.chunk_id);
            for (float x : e.vector) {
                detail::put_u32(out, std::bit_cast<std::uint32_t>(x));
            }
        }
        return out;
    }

    static VectorIndex deserialize(const std::string& bytes) {
        detail::Reader in(bytes);
        VectorIndex index(static_cast<std::size_t>(in.uint(4)));
        const auto count = in.uint(4);
        for (std::uint64_t r = 0; r < count; ++r) {
            const auto length = in.uint(4);
            if (length != 8 + 4 * index.dim_) {
                throw IndexFormatError("record " + std::to_string(r) + " has length " + std::to_string(length));
            }
            const ChunkId id = in.uint(8);
            Vector v(index.dim_);
            for (auto& x : v) {
                x = std::bit_cast<float>(static_cast<std::uint32_t>(in.uint(4)));
            }
            try {
                index.add(id, std::move(v));
            } catch (const std::invalid_argument& e) {
                throw IndexFormatError(e.what());
            }
        }
        if (!in.done()) {
            throw IndexFormatError("trailing bytes after last record");
        }
        return index;
    }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        const auto bytes = serialize();
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw std::runtime_error("cannot write index " + path);
        }
    }

    static VectorIndex load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw std::runtime_error("cannot read index " + path);
        }
        const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return deserialize(bytes);
    }

private:
    std::size_t dim_;
    std::vector<IndexEntry> entries_;
    std::vector<double> norms_;
    std::unordered_set<ChunkId> ids_;
};

/// Embeds every chunk in one batch; nothing is returned if the embedder fails.
inline VectorIndex build_index(const std::vector<Chunk>& chunks, Embedder& embedder) {
    std::vector<std::string> texts;
    texts.reserve(chunks.size());
    for (const auto& c : chunks) {
        texts.push_back(c.text);
    }
    auto vectors = texts.empty() ? std::vector<Vector>{} : embedder.embed(texts);
    if (vectors.size() != chunks.size()) {
        throw net::TransportError("embedder returned " + std::to_string(vectors.size()) + " vectors for " +
                                  std::to_string(chunks.size()) + " chunks");
    }
    VectorIndex index(embedder.dim());
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        index.add(chunks[i].id, std::move(vectors[i]));
    }
    return index;
}

/// Only the leaf level is embedded.
inline VectorIndex build_index(const ChunkTree& tree, Embedder& embedder) { return build_index(tree.leaves(), embedder); }

inline std::vector<Scored> retrieve(const VectorIndex& index, const std::string& query, std::size_t k,
                                    Embedder& embedder) {
    if (k == 0) {
        throw std::invalid_argument("k must be at least 1");
    }
    if (index.size() == 0) {
        return {};
    }
    return index.search(embedder.embed_one(query), k);
}

}  // namespace rhetorik::rag
