#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rhetorik/net/chat.hpp"
#include "rhetorik/net/transport.hpp"
#include "rhetorik/text/unicode.hpp"

namespace rhetorik::rag {

using Vector = std::vector<float>;

class Embedder {
public:
    virtual ~Embedder() = default;
    [[nodiscard]] virtual std::size_t dim() const = 0;
    /// One vector per input, in order. Throws net::TransportError on failure.
    virtual std::vector<Vector> embed(const std::vector<std::string>& texts) = 0;

    Vector embed_one(const std::string& text) { return embed({text}).at(0); }
};

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

/// Case-folded word counts hashed into `dim` buckets, L2-normalized. Deterministic test double.
class HashedBagOfWordsEmbedder : public Embedder {
public:
    explicit HashedBagOfWordsEmbedder(std::size_t dim = 256) : dim_(dim) {}

    [[nodiscard]] std::size_t dim() const override { return dim_; }

    std::vector<Vector> embed(const std::vector<std::string>& texts) override {
        std::vector<Vector> out;
        out.reserve(texts.size());
        for (const auto& t : texts) {
            out.push_back(embed_text(t));
        }
        return out;
    }

private:
    [[nodiscard]] Vector embed_text(std::string_view t) const {
        std::vector<double> acc(dim_, 0.0);
        for (const auto& word : text::letter_runs(text::nfc(t))) {
            acc[fnv1a(word) % dim_] += 1.0;
        }
        double norm = 0.0;
        for (double x : acc) {
            norm += x * x;
        }
        Vector v(dim_, 0.0F);
        if (norm > 0.0) {
            norm = std::sqrt(norm);
            for (std::size_t i = 0; i < dim_; ++i) {
                v[i] = static_cast<float>(acc[i] / norm);
            }
        }
        return v;
    }

    std::size_t dim_;
};

/// OpenAI-style `/embeddings` endpoint (`data[i].embedding`).
class HttpEmbedder : public Embedder {
public:
    HttpEmbedder(std::shared_ptr<net::Transport> transport, net::EndpointConfig endpoint, std::size_t dim)
        : transport_(std::move(transport)), endpoint_(std::move(endpoint)), dim_(dim) {}

    [[nodiscard]] std::size_t dim() const override { return dim_; }

    std::vector<Vector> embed(const std::vector<std::string>& texts) override {
        const nlohmann::json payload{{"model", endpoint_.model}, {"input", texts}};
        const auto response = transport_->post(
            {endpoint_.url, payload.dump(), "application/json", net::auth_headers(endpoint_.api_key)});
        std::vector<Vector> out(texts.size());
        try {
            const auto body = nlohmann::json::parse(response.body);
            const auto& data = body.at("data");
            if (data.size() != texts.size()) {
                throw net::TransportError("embedding count mismatch");
            }
            for (std::size_t i = 0; i < data.size(); ++i) {
                const auto index = data[i].contains("index") ? data[i]["index"].get<std::size_t>() : i;
                out.at(index) = data[i].at("embedding").get<Vector>();
                if (out[index].size() != dim_) {
                    throw net::TransportError("embedding dimension " + std::to_string(out[index].size()) +
                                              " != " + std::to_string(dim_));
                }
            }
        } catch (const nlohmann::json::exception& e) {
            throw net::TransportError(std::string("malformed embedding response: ") + e.what());
        } catch (const std::out_of_range& e) {
            throw net::TransportError(std::string("malformed embedding response: ") + e.what());
        }
        return out;
    }

private:
    std::shared_ptr<net::Transport> transport_;
    net::EndpointConfig endpoint_;
    std::size_t dim_;
};

}  // namespace rhetorik::rag
