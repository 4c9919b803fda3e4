#pragma once

#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>

#include "rhetorik/annotation/verification.hpp"
#include "rhetorik/net/chat.hpp"
#include "rhetorik/net/transport.hpp"
#include "rhetorik/ontology/figures.hpp"
#include "rhetorik/ontology/reify.hpp"
#include "rhetorik/ontology/turtle.hpp"
#include "rhetorik/rag/embedding.hpp"
#include "rhetorik/rag/pipeline.hpp"
#include "rhetorik/rag/rerank.hpp"
#include "rhetorik/service/config.hpp"
#include "rhetorik/service/server.hpp"

namespace rhetorik::service {

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Parses the ontology, reifies it when a mapping is given, and checks the figure hierarchy.
inline onto::TripleStore load_ontology(const std::string& ontology_path, const std::optional<std::string>& mapping) {
    auto store = onto::parse_turtle(read_text_file(ontology_path));
    if (mapping) {
        auto config = onto::parse_mapping(read_text_file(*mapping), store.prefixes());
        store = onto::reify(store, config).store;
    }
    onto::check_hierarchy_acyclic(store);
    if (onto::all_figures(store).empty()) {
        throw std::runtime_error("ontology " + ontology_path + " defines no rhetorical figures");
    }
    return store;
}

inline rag::RagConfig load_rag_config(const std::optional<std::string>& path) {
    if (!path) {
        return {};
    }
    return nlohmann::json::parse(read_text_file(*path)).get<rag::RagConfig>();
}

/// HTTP adapters for configured endpoints, deterministic local stand-ins otherwise.
inline ExternalServices make_services(const ServiceConfig& config) {
    std::shared_ptr<net::Transport> transport = std::make_shared<net::HttplibTransport>();
    if (config.upstream_log) {
        transport = std::make_shared<net::AuditedTransport>(transport,
                                                            std::make_shared<net::JsonLinesLog>(*config.upstream_log));
    }
    ExternalServices s;
    s.language = std::make_shared<annot::StopwordLanguageDetector>();
    if (config.languagetool_url) {
        s.grammar = std::make_shared<annot::LanguageToolChecker>(transport, *config.languagetool_url);
    } else {
        s.grammar = std::make_shared<annot::PermissiveGrammarChecker>();
    }
    if (config.llm) {
        auto model = std::make_shared<net::HttpChatModel>(transport, *config.llm);
        s.llm = model;
        s.gibberish = std::make_shared<annot::ChatGibberishJudge>(model);
    } else {
        s.llm = std::make_shared<rag::EchoChatModel>();
        s.gibberish = std::make_shared<UnavailableGibberishJudge>();
    }
    if (config.embedder) {
        s.embedder = std::make_shared<rag::HttpEmbedder>(transport, *config.embedder, config.embedder_dim);
    } else {
        s.embedder = std::make_shared<rag::HashedBagOfWordsEmbedder>(config.embedder_dim);
    }
    if (config.reranker) {
        s.reranker = std::make_shared<rag::HttpReranker>(transport, *config.reranker);
    } else {
        s.reranker = std::make_shared<rag::TokenOverlapReranker>();
    }
    return s;
}

inline AppOptions make_app_options(const ServiceConfig& config) {
    AppOptions o;
    o.db_path = config.db_path;
    o.rag = load_rag_config(config.rag_config_path);
    o.index_path = config.index_path;
    o.admin_token = config.admin_token;
    o.seed = config.seed;
    if (config.request_log) {
        o.request_log = std::make_shared<net::JsonLinesLog>(*config.request_log);
    }
    return o;
}

}  // namespace rhetorik::service
