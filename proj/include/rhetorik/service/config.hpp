#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "rhetorik/net/chat.hpp"

namespace rhetorik::service {

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

inline std::optional<std::string> process_env(const std::string& name) {
    const char* value = std::getenv(name.c_str());
    if (value == nullptr || *value == '\0') {
        return std::nullopt;
    }
    return std::string(value);
}

/// Service settings, read from RHETORIK_* environment variables.
struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string ontology_path = "data/figures.ttl";
    /// Mapping file; when unset the ontology is taken as already reified.
    std::optional<std::string> mapping_path;
    std::string db_path = "rhetorik.sqlite";
    std::optional<std::string> rag_config_path;
    /// Prebuilt index (see `rhetorik index`); built from the ontology at startup when unset.
    std::optional<std::string> index_path;
    std::optional<net::EndpointConfig> llm;
    std::optional<net::EndpointConfig> embedder;
    std::size_t embedder_dim = 256;
    std::optional<net::EndpointConfig> reranker;
    std::optional<std::string> languagetool_url;
    std::optional<std::string> admin_token;
    /// Fixed seed for /examples/random; nondeterministic when unset.
    std::optional<std::uint64_t> seed;
    std::optional<std::string> request_log;
    std::optional<std::string> upstream_log;
    std::size_t threads = 8;

    static ServiceConfig from_env(const EnvLookup& env = process_env) {
        ServiceConfig c;
        auto str = [&](const char* name, std::string& out) {
            if (auto v = env(name)) {
                out = *v;
            }
        };
        auto opt = [&](const char* name, std::optional<std::string>& out) {
            if (auto v = env(name)) {
                out = *v;
            }
        };
        auto number = [&](const char* name) -> std::optional<std::uint64_t> {
            auto v = env(name);
            if (!v) {
                return std::nullopt;
            }
            try {
                std::size_t used = 0;
                const auto n = std::stoull(*v, &used);
                if (used != v->size()) {
                    throw std::invalid_argument(*v);
                }
                return n;
            } catch (const std::exception&) {
                throw std::invalid_argument(std::string(name) + " must be a non-negative integer");
            }
        };
        auto endpoint = [&](const std::string& stem) -> std::optional<net::EndpointConfig> {
            auto url = env("RHETORIK_" + stem + "_URL");
            if (!url) {
                return std::nullopt;
            }
            return net::EndpointConfig{*url, env("RHETORIK_" + stem + "_API_KEY").value_or(""),
                                       env("RHETORIK_" + stem + "_MODEL").value_or("")};
        };
        str("RHETORIK_HOST", c.host);
        if (auto p = number("RHETORIK_PORT")) {
            if (*p > 65535) {
                throw std::invalid_argument("RHETORIK_PORT out of range");
            }
            c.port = static_cast<int>(*p);
        }
        str("RHETORIK_ONTOLOGY", c.ontology_path);
        opt("RHETORIK_MAPPING", c.mapping_path);
        str("RHETORIK_DB", c.db_path);
        opt("RHETORIK_RAG_CONFIG", c.rag_config_path);
        opt("RHETORIK_INDEX", c.index_path);
        c.llm = endpoint("LLM");
        c.embedder = endpoint("EMBED");
        if (auto d = number("RHETORIK_EMBED_DIM")) {
            c.embedder_dim = static_cast<std::size_t>(*d);
        }
        c.reranker = endpoint("RERANK");
        opt("RHETORIK_LANGUAGETOOL_URL", c.languagetool_url);
        opt("RHETORIK_ADMIN_TOKEN", c.admin_token);
        c.seed = number("RHETORIK_SEED");
        opt("RHETORIK_REQUEST_LOG", c.request_log);
        opt("RHETORIK_UPSTREAM_LOG", c.upstream_log);
        if (auto t = number("RHETORIK_THREADS")) {
            c.threads = std::max<std::size_t>(1, static_cast<std::size_t>(*t));
        }
        return c;
    }
};

}  // namespace rhetorik::service
