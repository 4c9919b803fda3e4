#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rhetorik/evaluation/records.hpp"
#include "rhetorik/net/chat.hpp"
#include "rhetorik/rag/embedding.hpp"
#include "rhetorik/text/unicode.hpp"

namespace rhetorik::eval {

struct Claim {
    std::string text;
    bool supported = false;
};

/// Statements of answer and ground truth sorted into true positives, false positives, false negatives.
struct ClaimComparison {
    std::vector<std::string> tp;
    std::vector<std::string> fp;
    std::vector<std::string> fn;
};

/// Judgement primitives behind the metrics. Implementations may throw on failure.
class Judge {
public:
    virtual ~Judge() = default;
    /// Answer statements, each marked as supported by the contexts.
    virtual std::vector<Claim> answer_claims(const std::string& answer, const std::vector<std::string>& contexts) = 0;
    /// One flag per context: useful for arriving at the ground truth.
    virtual std::vector<bool> context_relevance(const std::string& question, const std::string& ground_truth,
                                                const std::vector<std::string>& contexts) = 0;
    /// Ground-truth sentences, each marked as attributable to the contexts.
    virtual std::vector<Claim> ground_truth_attribution(const std::string& ground_truth,
                                                        const std::vector<std::string>& contexts) = 0;
    /// Up to `n` questions the answer would respond to.
    virtual std::vector<std::string> generate_questions(const std::string& answer, std::size_t n) = 0;
    virtual ClaimComparison compare_claims(const std::string& answer, const std::string& ground_truth) = 0;
};

namespace detail {

inline std::set<std::string> word_set(std::string_view s) {
    auto runs = text::letter_runs(text::nfc(s));
    return {runs.begin(), runs.end()};
}

/// Share of `part`'s words found in `whole`; 0 for an empty `part`.
inline double coverage(const std::set<std::string>& part, const std::set<std::string>& whole) {
    if (part.empty()) {
        return 0.0;
    }
    std::size_t hits = 0;
    for (const auto& w : part) {
        hits += whole.contains(w) ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(part.size());
}

inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) {
        return 1.0;
    }
    std::size_t common = 0;
    for (const auto& w : a) {
        common += b.contains(w) ? 1 : 0;
    }
    return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

}  // namespace detail

/// Word-overlap judge: deterministic, no model calls. Sentences come from text::split_sentences.
class LexicalJudge : public Judge {
public:
    explicit LexicalJudge(double threshold = 0.5) : threshold_(threshold) {}

    std::vector<Claim> answer_claims(const std::string& answer, const std::vector<std::string>& contexts) override {
        return mark_sentences(answer, contexts);
    }

    std::vector<bool> context_relevance(const std::string&, const std::string& ground_truth,
                                        const std::vector<std::string>& contexts) override {
        const auto truth = detail::word_set(ground_truth);
        std::vector<bool> out;
        for (const auto& c : contexts) {
            out.push_back(detail::coverage(truth, detail::word_set(c)) >= threshold_);
        }
        return out;
    }

    std::vector<Claim> ground_truth_attribution(const std::string& ground_truth,
                                                const std::vector<std::string>& contexts) override {
        return mark_sentences(ground_truth, contexts);
    }

    std::vector<std::string> generate_questions(const std::string& answer, std::size_t n) override {
        auto sentences = text::split_sentences(answer);
        if (sentences.size() > n) {
            sentences.resize(n);
        }
        return sentences;
    }

    ClaimComparison compare_claims(const std::string& answer, const std::string& ground_truth) override {
        const auto a = text::split_sentences(answer);
        const auto g = text::split_sentences(ground_truth);
        std::vector<std::set<std::string>> gw;
        for (const auto& s : g) {
            gw.push_back(detail::word_set(s));
        }
        std::vector<bool> g_matched(g.size(), false);
        ClaimComparison out;
        for (const auto& s : a) {
            const auto w = detail::word_set(s);
            bool matched = false;
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (detail::jaccard(w, gw[i]) >= threshold_) {
                    matched = true;
                    g_matched[i] = true;
                }
            }
            (matched ? out.tp : out.fp).push_back(s);
        }
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!g_matched[i]) {
                out.fn.push_back(g[i]);
            }
        }
        return out;
    }

private:
    std::vector<Claim> mark_sentences(const std::string& body, const std::vector<std::string>& contexts) const {
        std::set<std::string> context_words;
        for (const auto& c : contexts) {
            auto w = detail::word_set(c);
            context_words.insert(w.begin(), w.end());
        }
        std::vector<Claim> out;
        for (auto& s : text::split_sentences(body)) {
            const bool supported = detail::coverage(detail::word_set(s), context_words) >= threshold_;
            out.push_back({std::move(s), supported});
        }
        return out;
    }

    double threshold_;
};

class JudgeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Chat-model judge answering JSON-only prompts at temperature 0.
class LlmJudge : public Judge {
public:
    explicit LlmJudge(std::shared_ptr<net::ChatModel> model) : model_(std::move(model)) {}

    std::vector<Claim> answer_claims(const std::string& answer, const std::vector<std::string>& contexts) override {
        const auto j = ask("Split the answer into short self-contained statements. For each statement decide "
                           "whether it can be inferred from the context. Reply with a JSON array of objects "
                           "{\"statement\": string, \"supported\": boolean}.\n\nContext:\n" +
                           joined(contexts) + "\n\nAnswer:\n" + answer);
        std::vector<Claim> out;
        for (const auto& item : j) {
            out.push_back({item.at("statement").get<std::string>(), item.at("supported").get<bool>()});
        }
        return out;
    }

    std::vector<bool> context_relevance(const std::string& question, const std::string& ground_truth,
                                        const std::vector<std::string>& contexts) override {
        std::string numbered;
        for (std::size_t i = 0; i < contexts.size(); ++i) {
            numbered += "[" + std::to_string(i) + "] " + contexts[i] + "\n";
        }
        const auto j = ask("For each numbered context decide whether it was useful in arriving at the given "
                           "answer to the question. Reply with a JSON array of booleans, one per context, in "
                           "order.\n\nQuestion: " +
                           question + "\nAnswer: " + ground_truth + "\n\nContexts:\n" + numbered);
        auto out = j.get<std::vector<bool>>();
        if (out.size() != contexts.size()) {
            throw JudgeError("relevance verdict count mismatch");
        }
        return out;
    }

    std::vector<Claim> ground_truth_attribution(const std::string& ground_truth,
                                                const std::vector<std::string>& contexts) override {
        const auto sentences = text::split_sentences(ground_truth);
        std::string numbered;
        for (std::size_t i = 0; i < sentences.size(); ++i) {
            numbered += "[" + std::to_string(i) + "] " + sentences[i] + "\n";
        }
        const auto j = ask("For each numbered sentence decide whether it can be attributed to the context. "
                           "Reply with a JSON array of booleans, one per sentence, in order.\n\nContext:\n" +
                           joined(contexts) + "\n\nSentences:\n" + numbered);
        const auto flags = j.get<std::vector<bool>>();
        if (flags.size() != sentences.size()) {
            throw JudgeError("attribution verdict count mismatch");
        }
        std::vector<Claim> out;
        for (std::size_t i = 0; i < sentences.size(); ++i) {
            out.push_back({sentences[i], flags[i]});
        }
        return out;
    }

    std::vector<std::string> generate_questions(const std::string& answer, std::size_t n) override {
        const auto j = ask("Write " + std::to_string(n) +
                           " different questions in German that the following answer responds to. Reply with a "
                           "JSON array of strings.\n\nAnswer:\n" +
                           answer);
        auto out = j.get<std::vector<std::string>>();
        if (out.size() > n) {
            out.resize(n);
        }
        return out;
    }

    ClaimComparison compare_claims(const std::string& answer, const std::string& ground_truth) override {
        const auto j = ask("Compare the answer with the ground truth. Classify statements as TP (in the answer "
                           "and supported by the ground truth), FP (in the answer only) and FN (in the ground "
                           "truth only). Reply with a JSON object {\"TP\": [..], \"FP\": [..], \"FN\": [..]} "
                           "of strings.\n\nAnswer:\n" +
                           answer + "\n\nGround truth:\n" + ground_truth);
        return {j.at("TP").get<std::vector<std::string>>(), j.at("FP").get<std::vector<std::string>>(),
                j.at("FN").get<std::vector<std::string>>()};
    }

private:
    static std::string joined(const std::vector<std::string>& contexts) { return text::join(contexts, "\n---\n"); }

    nlohmann::json ask(const std::string& prompt) {
        net::ChatRequest request;
        request.temperature = 0.0;
        request.messages = {{"system", "You are a strict evaluator. Reply with JSON only."}, {"user", prompt}};
        std::string reply = model_->complete(request);
        // tolerate a fenced code block around the JSON
        const auto first = reply.find_first_of("[{");
        const auto last = reply.find_last_of("]}");
        if (first == std::string::npos || last == std::string::npos || last < first) {
            throw JudgeError("judge reply holds no JSON: " + reply);
        }
        try {
            return nlohmann::json::parse(reply.substr(first, last - first + 1));
        } catch (const nlohmann::json::exception& e) {
            throw JudgeError(std::string("judge reply is not valid JSON: ") + e.what());
        }
    }

    std::shared_ptr<net::ChatModel> model_;
};

struct MetricOptions {
    std::size_t relevancy_questions = 3;
    double factual_weight = 0.75;
    double semantic_weight = 0.25;
};

inline void to_json(nlohmann::json& j, const MetricOptions& o) {
    j = {{"relevancy_questions", o.relevancy_questions},
         {"factual_weight", o.factual_weight},
         {"semantic_weight", o.semantic_weight}};
}

inline void from_json(const nlohmann::json& j, MetricOptions& o) {
    MetricOptions d;
    o.relevancy_questions = j.value("relevancy_questions", d.relevancy_questions);
    o.factual_weight = j.value("factual_weight", d.factual_weight);
    o.semantic_weight = j.value("semantic_weight", d.semantic_weight);
    if (o.relevancy_questions == 0) {
        throw std::invalid_argument("relevancy_questions must be at least 1");
    }
}

enum class Metric { faithfulness, context_precision, context_recall, answer_correctness, answer_similarity,
                    answer_relevancy };

inline constexpr std::array<Metric, 6> kMetrics = {Metric::faithfulness,       Metric::context_precision,
                                                   Metric::context_recall,     Metric::answer_correctness,
                                                   Metric::answer_similarity,  Metric::answer_relevancy};

inline std::string_view metric_name(Metric m) {
    switch (m) {
        case Metric::faithfulness: return "faithfulness";
        case Metric::context_precision: return "context_precision";
        case Metric::context_recall: return "context_recall";
        case Metric::answer_correctness: return "answer_correctness";
        case Metric::answer_similarity: return "answer_similarity";
        case Metric::answer_relevancy: return "answer_relevancy";
    }
    return "";
}

/// Column heading used in the plain-text report.
inline std::string_view metric_short_name(Metric m) {
    switch (m) {
        case Metric::faithfulness: return "faithf.";
        case Metric::context_precision: return "c_precision";
        case Metric::context_recall: return "c_recall";
        case Metric::answer_correctness: return "a_correctn.";
        case Metric::answer_similarity: return "a_similarity";
        case Metric::answer_relevancy: return "a_relevancy";
    }
    return "";
}

/// A metric value; nullopt means undefined for this input (never reported as 0).
struct MetricValue {
    std::optional<double> value;
    /// Set when the value was computed from degraded input (e.g. fewer generated questions).
    std::optional<std::string> note;
};

struct MetricScores {
    std::array<MetricValue, 6> values;

    MetricValue& operator[](Metric m) { return values[static_cast<std::size_t>(m)]; }
    const MetricValue& operator[](Metric m) const { return values[static_cast<std::size_t>(m)]; }
};

inline double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

inline double cosine(const rag::Vector& a, const rag::Vector& b) {
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
        dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
        na += static_cast<double>(a[i]) * static_cast<double>(a[i]);
        nb += static_cast<double>(b[i]) * static_cast<double>(b[i]);
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

/// supported claims / claims; undefined without claims.
inline MetricValue faithfulness(const EvalRecord& r, Judge& judge) {
    if (text::trim(r.answer).empty()) {
        return {std::nullopt, "empty answer"};
    }
    const auto claims = judge.answer_claims(r.answer, r.retrieved_contexts);
    if (claims.empty()) {
        return {std::nullopt, "no claims extracted"};
    }
    const auto supported = std::count_if(claims.begin(), claims.end(), [](const Claim& c) { return c.supported; });
    return {static_cast<double>(supported) / static_cast<double>(claims.size()), std::nullopt};
}

/// Mean precision@k over the ranks of relevant contexts.
inline double precision_at_relevant_ranks(const std::vector<bool>& relevance) {
    double sum = 0.0;
    std::size_t relevant = 0;
    for (std::size_t k = 0; k < relevance.size(); ++k) {
        if (relevance[k]) {
            ++relevant;
            sum += static_cast<double>(relevant) / static_cast<double>(k + 1);
        }
    }
    return relevant == 0 ? 0.0 : sum / static_cast<double>(relevant);
}

inline MetricValue context_precision(const EvalRecord& r, Judge& judge) {
    if (r.retrieved_contexts.empty()) {
        return {std::nullopt, "no retrieved contexts"};
    }
    const auto relevance = judge.context_relevance(r.truth.question, r.truth.ground_truth, r.retrieved_contexts);
    if (relevance.size() != r.retrieved_contexts.size()) {
        throw JudgeError("relevance verdict count mismatch");
    }
    return {precision_at_relevant_ranks(relevance), std::nullopt};
}

/// attributable ground-truth sentences / ground-truth sentences.
inline MetricValue context_recall(const EvalRecord& r, Judge& judge) {
    if (text::trim(r.truth.ground_truth).empty()) {
        return {std::nullopt, "empty ground truth"};
    }
    if (r.retrieved_contexts.empty()) {
        return {0.0, std::nullopt};
    }
    const auto sentences = judge.ground_truth_attribution(r.truth.ground_truth, r.retrieved_contexts);
    if (sentences.empty()) {
        return {std::nullopt, "no ground-truth sentences"};
    }
    const auto hits = std::count_if(sentences.begin(), sentences.end(), [](const Claim& c) { return c.supported; });
    return {static_cast<double>(hits) / static_cast<double>(sentences.size()), std::nullopt};
}

inline MetricValue answer_similarity(const EvalRecord& r, rag::Embedder& embedder) {
    if (text::trim(r.answer).empty() || text::trim(r.truth.ground_truth).empty()) {
        return {std::nullopt, "empty text"};
    }
    const auto v = embedder.embed({r.answer, r.truth.ground_truth});
    return {clamp01(cosine(v.at(0), v.at(1))), std::nullopt};
}

/// TP / (TP + (FP + FN) / 2); nullopt when all three are empty.
inline std::optional<double> factual_f1(const ClaimComparison& c) {
    const double tp = static_cast<double>(c.tp.size());
    const double wrong = static_cast<double>(c.fp.size() + c.fn.size());
    if (tp + wrong == 0.0) {
        return std::nullopt;
    }
    return tp / (tp + 0.5 * wrong);
}

inline MetricValue answer_correctness(const EvalRecord& r, Judge& judge, rag::Embedder& embedder,
                                      const MetricOptions& options = {}) {
    const auto similarity = answer_similarity(r, embedder);
    if (!similarity.value) {
        return {std::nullopt, similarity.note};
    }
    const auto f1 = factual_f1(judge.compare_claims(r.answer, r.truth.ground_truth));
    if (!f1) {
        return {options.semantic_weight * *similarity.value, "no claims; semantic component only"};
    }
    return {clamp01(options.factual_weight * *f1 + options.semantic_weight * *similarity.value), std::nullopt};
}

/// Mean cosine between the question and questions regenerated from the answer, clamped to [0, 1].
inline MetricValue answer_relevancy(const EvalRecord& r, Judge& judge, rag::Embedder& embedder,
                                    const MetricOptions& options = {}) {
    if (text::trim(r.answer).empty()) {
        return {std::nullopt, "empty answer"};
    }
    const auto questions = judge.generate_questions(r.answer, options.relevancy_questions);
    if (questions.empty()) {
        return {std::nullopt, "no questions generated"};
    }
    std::vector<std::string> texts{r.truth.question};
    texts.insert(texts.end(), questions.begin(), questions.end());
    const auto vectors = embedder.embed(texts);
    double sum = 0.0;
    for (std::size_t i = 1; i < vectors.size(); ++i) {
        sum += cosine(vectors[0], vectors[i]);
    }
    MetricValue out{clamp01(sum / static_cast<double>(questions.size())), std::nullopt};
    if (questions.size() < options.relevancy_questions) {
        out.note = "averaged over " + std::to_string(questions.size()) + " of " +
                   std::to_string(options.relevancy_questions) + " questions";
    }
    return out;
}

inline MetricScores score_record(const EvalRecord& r, Judge& judge, rag::Embedder& embedder,
                                 const MetricOptions& options = {}) {
    MetricScores s;
    s[Metric::faithfulness] = faithfulness(r, judge);
    s[Metric::context_precision] = context_precision(r, judge);
    s[Metric::context_recall] = context_recall(r, judge);
    s[Metric::answer_correctness] = answer_correctness(r, judge, embedder, options);
    s[Metric::answer_similarity] = answer_similarity(r, embedder);
    s[Metric::answer_relevancy] = answer_relevancy(r, judge, embedder, options);
    return s;
}

}  // namespace rhetorik::eval
