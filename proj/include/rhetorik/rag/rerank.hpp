#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rhetorik/net/chat.hpp"
#include "rhetorik/net/transport.hpp"
#include "rhetorik/rag/merge.hpp"
#include "rhetorik/text/unicode.hpp"

namespace rhetorik::rag {

class Reranker {
public:
    virtual ~Reranker() = default;
    /// One relevance score per document. Throws net::TransportError on failure.
    virtual std::vector<double> score(const std::string& query, const std::vector<std::string>& documents) = 0;
};

/// Share of distinct query words that occur in the document. Deterministic test double.
class TokenOverlapReranker : public Reranker {
public:
    std::vector<double> score(const std::string& query, const std::vector<std::string>& documents) override {
        const auto q = words(query);
        std::vector<double> out;
        for (const auto& d : documents) {
            const auto w = words(d);
            std::size_t hits = 0;
            for (const auto& t : q) {
                hits += w.contains(t) ? 1 : 0;
            }
            out.push_back(q.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(q.size()));
        }
        return out;
    }

private:
    static std::set<std::string> words(const std::string& s) {
        auto runs = text::letter_runs(text::nfc(s));
        return {runs.begin(), runs.end()};
    }
};

/// Cross-encoder style `/rerank` endpoint: `{"results": [{"index", "relevance_score"}]}`.
class HttpReranker : public Reranker {
public:
    HttpReranker(std::shared_ptr<net::Transport> transport, net::EndpointConfig endpoint)
        : transport_(std::move(transport)), endpoint_(std::move(endpoint)) {}

    std::vector<double> score(const std::string& query, const std::vector<std::string>& documents) override {
        const nlohmann::json payload{{"model", endpoint_.model}, {"query", query}, {"documents", documents}};
        const auto response = transport_->post(
            {endpoint_.url, payload.dump(), "application/json", net::auth_headers(endpoint_.api_key)});
        std::vector<std::optional<double>> scores(documents.size());
        try {
            const auto body = nlohmann::json::parse(response.body);
            for (const auto& r : body.at("results")) {
                scores.at(r.at("index").get<std::size_t>()) = r.at("relevance_score").get<double>();
            }
        } catch (const std::exception& e) {
            throw net::TransportError(std::string("malformed rerank response: ") + e.what());
        }
        std::vector<double> out;
        for (const auto& s : scores) {
            if (!s) {
                throw net::TransportError("rerank response misses a document");
            }
            out.push_back(*s);
        }
        return out;
    }

private:
    std::shared_ptr<net::Transport> transport_;
    net::EndpointConfig endpoint_;
};

struct RerankResult {
    std::vector<Candidate> selected;
    /// Set when the reranker failed and the first candidates were kept instead.
    bool fallback = false;
    std::optional<std::string> error;
};

/// Top `rerank_k` by reranker score, ties by retrieval rank. `rerank_k` is clamped to the candidate count.
inline RerankResult rerank(const std::string& query, const std::vector<Candidate>& candidates, Reranker& reranker,
                           std::size_t rerank_k) {
    RerankResult result;
    const std::size_t k = std::min(rerank_k, candidates.size());
    if (k == 0) {
        return result;
    }
    std::vector<std::string> texts;
    for (const auto& c : candidates) {
        texts.push_back(c.text);
    }
    std::vector<double> scores;
    try {
        scores = reranker.score(query, texts);
        if (scores.size() != candidates.size()) {
            throw net::TransportError("reranker returned " + std::to_string(scores.size()) + " scores");
        }
    } catch (const net::TransportError& e) {
        result.fallback = true;
        result.error = e.what();
        result.selected.assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k));
        return result;
    }
    std::vector<std::size_t> order(candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) {
            return scores[a] > scores[b];
        }
        return candidates[a].rank < candidates[b].rank;
    });
    for (std::size_t i = 0; i < k; ++i) {
        result.selected.push_back(candidates[order[i]]);
    }
    return result;
}

}  // namespace rhetorik::rag
