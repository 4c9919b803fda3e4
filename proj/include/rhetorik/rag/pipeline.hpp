#pragma once

#include <cstddef>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rhetorik/net/chat.hpp"
#include "rhetorik/rag/chunking.hpp"
#include "rhetorik/rag/index.hpp"
#include "rhetorik/rag/merge.hpp"
#include "rhetorik/rag/rerank.hpp"

namespace rhetorik::rag {

inline constexpr std::string_view kGermanDirective = "Bitte antworte nur auf Deutsch!";
inline constexpr double kAnswerTemperature = 0.1;

enum class ChunkingMethod { basic, auto_merging };

struct RagConfig {
    std::vector<std::size_t> chunk_sizes{2048};
    ChunkingMethod method = ChunkingMethod::basic;
    std::size_t retrieve_k = 12;
    std::size_t rerank_k = 6;
    double merge_threshold = 0.5;

    void validate() const {
        if (chunk_sizes.empty()) {
            throw std::invalid_argument("chunk_sizes must not be empty");
        }
        if (method == ChunkingMethod::basic && chunk_sizes.size() != 1) {
            throw std::invalid_argument("basic chunking takes exactly one chunk size");
        }
        if (method == ChunkingMethod::auto_merging && chunk_sizes.size() < 2) {
            throw std::invalid_argument("auto-merging needs at least two chunk sizes");
        }
        if (retrieve_k == 0 || rerank_k == 0 || rerank_k > retrieve_k) {
            throw std::invalid_argument("need 1 <= rerank_k <= retrieve_k");
        }
        if (!(merge_threshold > 0.0 && merge_threshold <= 1.0)) {
            throw std::invalid_argument("merge_threshold must lie in (0, 1]");
        }
    }

    /// e.g. "2048-512-128/AMR/12-6".
    [[nodiscard]] std::string label() const {
        std::string sizes;
        for (std::size_t i = 0; i < chunk_sizes.size(); ++i) {
            sizes += (i > 0 ? "-" : "") + std::to_string(chunk_sizes[i]);
        }
        return sizes + (method == ChunkingMethod::basic ? "/basic/" : "/AMR/") + std::to_string(retrieve_k) + "-" +
               std::to_string(rerank_k);
    }
};

NLOHMANN_JSON_SERIALIZE_ENUM(ChunkingMethod, {{ChunkingMethod::basic, "basic"},
                                              {ChunkingMethod::auto_merging, "auto_merging"}})

inline void to_json(nlohmann::json& j, const RagConfig& c) {
    j = {{"chunk_sizes", c.chunk_sizes},
         {"method", c.method},
         {"retrieve_k", c.retrieve_k},
         {"rerank_k", c.rerank_k},
         {"merge_threshold", c.merge_threshold}};
}

inline void from_json(const nlohmann::json& j, RagConfig& c) {
    RagConfig d;
    c.chunk_sizes = j.value("chunk_sizes", d.chunk_sizes);
    c.method = j.value("method", d.method);
    if (j.contains("method") && j.at("method").get<std::string>() != "basic" &&
        j.at("method").get<std::string>() != "auto_merging") {
        throw std::invalid_argument("unknown chunking method " + j.at("method").dump());
    }
    c.retrieve_k = j.value("retrieve_k", d.retrieve_k);
    c.rerank_k = j.value("rerank_k", d.rerank_k);
    c.merge_threshold = j.value("merge_threshold", d.merge_threshold);
    c.validate();
}

/// Chunk tree plus leaf index for one configuration. Immutable after build.
struct KnowledgeBase {
    RagConfig config;
    ChunkTree tree;
    VectorIndex index;

    static KnowledgeBase build(std::string_view document, const RagConfig& config, Embedder& embedder) {
        config.validate();
        KnowledgeBase kb{config, {}, VectorIndex(embedder.dim())};
        kb.tree = config.method == ChunkingMethod::basic ? chunk_flat(document, config.chunk_sizes[0])
                                                         : chunk_hierarchical(document, config.chunk_sizes);
        kb.index = build_index(kb.tree, embedder);
        return kb;
    }

    /// Writes the binary index to `path` and the chunk tree and config to `path`.chunks.json.
    void save(const std::string& path) const {
        index.save(path);
        std::ofstream out(path + ".chunks.json", std::ios::trunc);
        out << nlohmann::json{{"config", config}, {"tree", to_json(tree)}}.dump() << '\n';
        if (!out) {
            throw std::runtime_error("cannot write " + path + ".chunks.json");
        }
    }

    static KnowledgeBase load(const std::string& path) {
        std::ifstream in(path + ".chunks.json");
        if (!in) {
            throw std::runtime_error("cannot read " + path + ".chunks.json");
        }
        const auto j = nlohmann::json::parse(in);
        KnowledgeBase kb{j.at("config").get<RagConfig>(), tree_from_json(j.at("tree")), VectorIndex::load(path)};
        if (kb.index.size() != kb.tree.leaves().size()) {
            throw IndexFormatError("index holds " + std::to_string(kb.index.size()) + " vectors for " +
                                   std::to_string(kb.tree.leaves().size()) + " leaves");
        }
        return kb;
    }
};

struct PromptBundle {
    std::string system_instruction;
    std::vector<std::string> context_chunks;
    std::string question;
};

inline constexpr std::string_view kSystemInstruction =
    "Du bist ein Assistent f\xC3\xBCr rhetorische Figuren. Beantworte die Frage ausschlie\xC3\x9F" "lich mit Hilfe "
    "des folgenden Kontexts aus der Ontologie. Wenn der Kontext keine Antwort enth\xC3\xA4lt, sage das.";

inline PromptBundle make_prompt(const std::string& question, const std::vector<std::string>& contexts) {
    return {std::string(kSystemInstruction) + " " + std::string(kGermanDirective), contexts, question};
}

inline constexpr std::string_view kContextHeader = "Kontext:\n";
inline constexpr std::string_view kContextSeparator = "\n---\n";
inline constexpr std::string_view kQuestionHeader = "\n\nFrage: ";

inline net::ChatRequest chat_request(const PromptBundle& bundle) {
    std::string user(kContextHeader);
    for (std::size_t i = 0; i < bundle.context_chunks.size(); ++i) {
        if (i > 0) {
            user += kContextSeparator;
        }
        user += bundle.context_chunks[i];
    }
    user += kQuestionHeader;
    user += bundle.question;
    user += "\n";
    user += kGermanDirective;
    net::ChatRequest request;
    request.temperature = kAnswerTemperature;
    request.messages = {{"system", bundle.system_instruction}, {"user", std::move(user)}};
    return request;
}

/// Answers with the context block of the prompt verbatim. Deterministic test double.
class EchoChatModel : public net::ChatModel {
public:
    std::string complete(const net::ChatRequest& request) override {
        const std::string& user = request.messages.back().content;
        const auto start = user.find(kContextHeader);
        const auto end = user.rfind(kQuestionHeader);
        if (start == std::string::npos || end == std::string::npos || end < start) {
            return user;
        }
        return user.substr(start + kContextHeader.size(), end - start - kContextHeader.size());
    }
};

struct AnswerResult {
    std::optional<std::string> answer;
    /// Exact context passages sent to the model, in prompt order.
    std::vector<std::string> contexts;
    bool rerank_fallback = false;
    std::optional<std::string> error;
};

/// retrieve -> auto-merge (if configured) -> rerank -> prompt -> chat model.
inline AnswerResult answer(const std::string& question, const KnowledgeBase& kb, Embedder& embedder,
                           Reranker& reranker, net::ChatModel& llm) {
    AnswerResult result;
    std::vector<Scored> retrieved;
    try {
        retrieved = retrieve(kb.index, question, kb.config.retrieve_k, embedder);
    } catch (const net::TransportError& e) {
        result.error = std::string("embedding failed: ") + e.what();
        return result;
    }
    const auto candidates = kb.config.method == ChunkingMethod::auto_merging
                                ? auto_merge(retrieved, kb.tree, kb.config.merge_threshold)
                                : as_candidates(retrieved, kb.tree);
    auto reranked = rerank(question, candidates, reranker, kb.config.rerank_k);
    result.rerank_fallback = reranked.fallback;
    for (const auto& c : reranked.selected) {
        result.contexts.push_back(c.text);
    }
    try {
        result.answer = llm.complete(chat_request(make_prompt(question, result.contexts)));
    } catch (const net::TransportError& e) {
        result.error = e.what();
    }
    return result;
}

namespace detail {

enum class QuoteKind { ascii_double, ascii_single, low_double, low_single, high_double, high_single };

struct OpenQuote {
    QuoteKind kind;
    std::size_t position;
};

inline bool is_letter_at(const std::vector<char32_t>& cps, std::size_t i) {
    return i < cps.size() && text::is_letter_or_digit(cps[i]);
}

/// One pass: pair quotes with a stack, return positions of unmatched quote characters.
inline std::vector<bool> unmatched_quotes(const std::vector<char32_t>& cps) {
    std::vector<bool> drop(cps.size(), false);
    std::vector<OpenQuote> stack;
    // Closes the nearest open quote accepted by `accepts`; openers above it are unmatched.
    const auto close = [&](auto accepts) {
        for (std::size_t s = stack.size(); s-- > 0;) {
            if (accepts(stack[s].kind)) {
                for (std::size_t t = s + 1; t < stack.size(); ++t) {
                    drop[stack[t].position] = true;
                }
                stack.resize(s);
                return true;
            }
        }
        return false;
    };
    for (std::size_t i = 0; i < cps.size(); ++i) {
        const char32_t c = cps[i];
        const bool after_letter = i > 0 && is_letter_at(cps, i - 1);
        const bool before_letter = is_letter_at(cps, i + 1);
        switch (c) {
            case U'"':
                if (!close([](QuoteKind k) { return k == QuoteKind::ascii_double; })) {
                    stack.push_back({QuoteKind::ascii_double, i});
                }
                break;
            case U'\'':
                if (after_letter && before_letter) {
                    break;  // apostrophe inside a word
                }
                if (close([](QuoteKind k) { return k == QuoteKind::ascii_single; })) {
                    break;
                }
                if (after_letter) {
                    break;  // elision apostrophe
                }
                stack.push_back({QuoteKind::ascii_single, i});
                break;
            case U'„':  // low double opener
                stack.push_back({QuoteKind::low_double, i});
                break;
            case U'‚':  // low single opener
                stack.push_back({QuoteKind::low_single, i});
                break;
            case U'“':  // closes a low double, otherwise opens
                if (!close([](QuoteKind k) { return k == QuoteKind::low_double; })) {
                    stack.push_back({QuoteKind::high_double, i});
                }
                break;
            case U'”':
                if (!close([](QuoteKind k) { return k == QuoteKind::low_double || k == QuoteKind::high_double; })) {
                    drop[i] = true;
                }
                break;
            case U'‘':  // closes a low single, otherwise opens
                if (!close([](QuoteKind k) { return k == QuoteKind::low_single; })) {
                    stack.push_back({QuoteKind::high_single, i});
                }
                break;
            case U'’':
                if (after_letter && before_letter) {
                    break;
                }
                if (close([](QuoteKind k) { return k == QuoteKind::low_single || k == QuoteKind::high_single; })) {
                    break;
                }
                if (!after_letter) {
                    drop[i] = true;
                }
                break;
            default:
                break;
        }
    }
    for (const auto& open : stack) {
        drop[open.position] = true;
    }
    return drop;
}

}  // namespace detail

/// Removes unmatched quotation marks; balanced pairs and in-word apostrophes stay.
inline std::string postprocess_answer(std::string_view input) {
    auto cps = text::decode(input);
    while (true) {
        const auto drop = detail::unmatched_quotes(cps);
        std::vector<char32_t> kept;
        for (std::size_t i = 0; i < cps.size(); ++i) {
            if (!drop[i]) {
                kept.push_back(cps[i]);
            }
        }
        if (kept.size() == cps.size()) {
            return text::encode(cps);
        }
        cps = std::move(kept);
    }
}

}  // namespace rhetorik::rag
