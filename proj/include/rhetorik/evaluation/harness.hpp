#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rhetorik/evaluation/metrics.hpp"
#include "rhetorik/evaluation/records.hpp"
#include "rhetorik/rag/pipeline.hpp"

namespace rhetorik::eval {

/// External interfaces used by one evaluation run.
struct EvalServices {
    rag::Embedder& rag_embedder;
    rag::Reranker& reranker;
    net::ChatModel& llm;
    Judge& judge;
    rag::Embedder& metric_embedder;
};

struct ExcludedRecord {
    std::size_t index;
    std::string reason;
};

struct ConfigResult {
    rag::RagConfig config;
    std::array<std::optional<double>, 6> means;
    /// Number of records that contributed to each mean.
    std::array<std::size_t, 6> defined_counts{};
    std::array<bool, 6> best{};
    std::size_t evaluated = 0;
    std::vector<ExcludedRecord> excluded;
    std::vector<EvalRecord> records;
    std::vector<MetricScores> scores;

    std::optional<double>& mean(Metric m) { return means[static_cast<std::size_t>(m)]; }
    [[nodiscard]] const std::optional<double>& mean(Metric m) const { return means[static_cast<std::size_t>(m)]; }
};

struct EvalReport {
    std::vector<ConfigResult> rows;
};

using EvalLogger = std::function<void(const std::string&)>;

inline std::string method_label(rag::ChunkingMethod m) {
    return m == rag::ChunkingMethod::basic ? "basic" : "AMR";
}

inline std::string chunk_sizes_label(const rag::RagConfig& c) {
    std::string out;
    for (std::size_t i = 0; i < c.chunk_sizes.size(); ++i) {
        out += (i > 0 ? "-" : "") + std::to_string(c.chunk_sizes[i]);
    }
    return out;
}

inline std::string reranker_label(const rag::RagConfig& c) {
    return "top-" + std::to_string(c.retrieve_k) + "/" + std::to_string(c.rerank_k);
}

/// Marks the highest defined value of each column; ties are all marked.
inline void mark_best(EvalReport& report) {
    for (std::size_t col = 0; col < kMetrics.size(); ++col) {
        std::optional<double> top;
        for (const auto& row : report.rows) {
            if (row.means[col] && (!top || *row.means[col] > *top)) {
                top = row.means[col];
            }
        }
        for (auto& row : report.rows) {
            row.best[col] = top && row.means[col] && *row.means[col] == *top;
        }
    }
}

/// Answers every question of `dataset` under `config` and scores the results.
inline ConfigResult evaluate_config(const std::vector<GroundTruthRecord>& dataset, const rag::RagConfig& config,
                                    std::string_view document, EvalServices services,
                                    const MetricOptions& options = {}, const EvalLogger& log = {}) {
    ConfigResult result;
    result.config = config;
    const auto kb = rag::KnowledgeBase::build(document, config, services.rag_embedder);
    std::array<double, 6> sums{};
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto answered =
            rag::answer(dataset[i].question, kb, services.rag_embedder, services.reranker, services.llm);
        if (!answered.answer) {
            result.excluded.push_back({i, answered.error.value_or("no answer")});
            if (log) {
                log(config.label() + " record " + std::to_string(i) + " excluded: " + result.excluded.back().reason);
            }
            continue;
        }
        EvalRecord record{dataset[i], rag::postprocess_answer(*answered.answer), answered.contexts};
        MetricScores scores;
        try {
            scores = score_record(record, services.judge, services.metric_embedder, options);
        } catch (const std::exception& e) {
            result.excluded.push_back({i, std::string("scoring failed: ") + e.what()});
            if (log) {
                log(config.label() + " record " + std::to_string(i) + " excluded: " + result.excluded.back().reason);
            }
            continue;
        }
        for (std::size_t m = 0; m < kMetrics.size(); ++m) {
            if (scores.values[m].value) {
                sums[m] += *scores.values[m].value;
                ++result.defined_counts[m];
            }
        }
        ++result.evaluated;
        result.records.push_back(std::move(record));
        result.scores.push_back(std::move(scores));
    }
    for (std::size_t m = 0; m < kMetrics.size(); ++m) {
        if (result.defined_counts[m] > 0) {
            result.means[m] = sums[m] / static_cast<double>(result.defined_counts[m]);
        }
    }
    return result;
}

inline EvalReport run_evaluation(const std::vector<GroundTruthRecord>& dataset,
                                 const std::vector<rag::RagConfig>& configs, std::string_view document,
                                 EvalServices services, const MetricOptions& options = {},
                                 const EvalLogger& log = {}) {
    if (dataset.empty()) {
        throw std::invalid_argument("evaluation dataset is empty");
    }
    if (configs.empty()) {
        throw std::invalid_argument("no RAG configurations given");
    }
    for (const auto& c : configs) {
        c.validate();
    }
    EvalReport report;
    for (const auto& c : configs) {
        report.rows.push_back(evaluate_config(dataset, c, document, services, options, log));
    }
    mark_best(report);
    return report;
}

inline nlohmann::json to_json(const EvalReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : report.rows) {
        nlohmann::json metrics = nlohmann::json::object();
        nlohmann::json best = nlohmann::json::array();
        for (const auto m : kMetrics) {
            const auto& v = row.mean(m);
            metrics[std::string(metric_name(m))] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
            if (row.best[static_cast<std::size_t>(m)]) {
                best.push_back(metric_name(m));
            }
        }
        nlohmann::json excluded = nlohmann::json::array();
        for (const auto& e : row.excluded) {
            excluded.push_back({{"index", e.index}, {"reason", e.reason}});
        }
        rows.push_back({{"label", row.config.label()},
                        {"chunk_sizes", chunk_sizes_label(row.config)},
                        {"method", method_label(row.config.method)},
                        {"reranker", reranker_label(row.config)},
                        {"config", row.config},
                        {"metrics", std::move(metrics)},
                        {"best", std::move(best)},
                        {"evaluated", row.evaluated},
                        {"excluded", std::move(excluded)}});
    }
    nlohmann::json columns = nlohmann::json::array();
    for (const auto m : kMetrics) {
        columns.push_back(metric_name(m));
    }
    return {{"columns", std::move(columns)}, {"rows", std::move(rows)}};
}

/// Fixed-width table; '*' follows the best value of each column, "n/a" marks undefined means.
inline std::string render_table(const EvalReport& report) {
    std::ostringstream out;
    out << std::left << std::setw(14) << "chunk_sizes" << std::setw(7) << "method" << std::setw(11) << "reranker";
    for (const auto m : kMetrics) {
        out << std::right << std::setw(14) << metric_short_name(m);
    }
    out << '\n';
    for (const auto& row : report.rows) {
        out << std::left << std::setw(14) << chunk_sizes_label(row.config) << std::setw(7)
            << method_label(row.config.method) << std::setw(11) << reranker_label(row.config);
        for (std::size_t m = 0; m < kMetrics.size(); ++m) {
            std::ostringstream cell;
            if (row.means[m]) {
                cell << std::fixed << std::setprecision(4) << *row.means[m] << (row.best[m] ? "*" : " ");
            } else {
                cell << "n/a ";
            }
            out << std::right << std::setw(14) << cell.str();
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace rhetorik::eval
