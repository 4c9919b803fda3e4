#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "rhetorik/annotation/store.hpp"
#include "rhetorik/annotation/verification.hpp"
#include "rhetorik/net/chat.hpp"
#include "rhetorik/net/transport.hpp"
#include "rhetorik/ontology/figures.hpp"
#include "rhetorik/rag/pipeline.hpp"
#include "rhetorik/rag/serialize.hpp"
#include "rhetorik/service/api.hpp"

namespace rhetorik::service {

/// External interfaces; every member must be safe to call from several request threads.
struct ExternalServices {
    std::shared_ptr<annot::LanguageDetector> language;
    std::shared_ptr<annot::GrammarChecker> grammar;
    std::shared_ptr<annot::GibberishJudge> gibberish;
    std::shared_ptr<rag::Embedder> embedder;
    std::shared_ptr<rag::Reranker> reranker;
    std::shared_ptr<net::ChatModel> llm;
};

struct AppOptions {
    std::string db_path = ":memory:";
    rag::RagConfig rag;
    /// Load this index instead of building one from the ontology.
    std::optional<std::string> index_path;
    std::optional<std::string> admin_token;
    std::optional<std::uint64_t> seed;
    std::shared_ptr<net::JsonLinesLog> request_log;
};

/// Stand-in gibberish judge when no chat endpoint is configured; verification then warns with a note.
class UnavailableGibberishJudge : public annot::GibberishJudge {
public:
    bool is_gibberish(std::string_view) override { throw net::TransportError("no gibberish judge configured"); }
};

/// Route handlers and shared state of the HTTP API.
class App {
public:
    App(onto::TripleStore ontology, ExternalServices services, AppOptions options)
        : ontology_(std::move(ontology)),
          services_(std::move(services)),
          options_(std::move(options)),
          store_(options_.db_path),
          payloads_(ontology_),
          rng_(options_.seed.value_or(std::random_device{}())) {
        options_.rag.validate();
    }

    App(const App&) = delete;
    App& operator=(const App&) = delete;

    ~App() {
        if (index_thread_.joinable()) {
            index_thread_.join();
        }
    }

    /// Builds (or loads) the knowledge base on a background thread; /chat answers 503 until it is ready.
    void start_index_build() {
        index_thread_ = std::thread([this] {
            try {
                auto kb = options_.index_path
                              ? rag::KnowledgeBase::load(*options_.index_path)
                              : rag::KnowledgeBase::build(rag::serialize_ontology(ontology_), options_.rag,
                                                          *services_.embedder);
                std::lock_guard lock(kb_mutex_);
                kb_ = std::make_shared<const rag::KnowledgeBase>(std::move(kb));
            } catch (const std::exception& e) {
                std::lock_guard lock(kb_mutex_);
                index_error_ = e.what();
            }
        });
    }

    void wait_for_index() {
        if (index_thread_.joinable()) {
            index_thread_.join();
        }
    }

    [[nodiscard]] bool index_ready() const {
        std::lock_guard lock(kb_mutex_);
        return kb_ != nullptr;
    }

    [[nodiscard]] const onto::TripleStore& ontology() const { return ontology_; }
    annot::AnnotationStore& store() { return store_; }

    void mount(httplib::Server& server) {
        server.Get("/health", wrap([this](const auto& req, auto& res) { health(req, res); }));
        server.Get("/meta/prefixes", wrap([this](const auto& req, auto& res) { prefixes(req, res); }));
        server.Get("/vocabulary", wrap([this](const auto& req, auto& res) { vocabulary(req, res); }));
        server.Get(R"(/vocabulary/([^/]+))", wrap([this](const auto& req, auto& res) { vocabulary(req, res); }));
        server.Get("/figures", wrap([this](const auto& req, auto& res) { figures(req, res); }));
        server.Get(R"(/figures/([^/]+))", wrap([this](const auto& req, auto& res) { figure(req, res); }));
        server.Post("/examples", wrap([this](const auto& req, auto& res) { create_example(req, res); }));
        server.Get("/examples/random", wrap([this](const auto& req, auto& res) { random_example(req, res); }));
        server.Get(R"(/examples/(\d+))", wrap([this](const auto& req, auto& res) { get_example(req, res); }));
        server.Post("/fyf/search", wrap([this](const auto& req, auto& res) { search(req, res); }));
        server.Post("/fyf/annotate", wrap([this](const auto& req, auto& res) { annotate(req, res); }));
        server.Post("/chat", wrap([this](const auto& req, auto& res) { chat(req, res); }));
        server.Post("/admin/flags", wrap([this](const auto& req, auto& res) { flags(req, res); }));
        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (res.body.empty()) {
                const int status = res.status;
                send(res, ApiError(status, status == 404 ? "not_found" : "http_error",
                                   status == 404 ? msg::kNotFound : msg::kInvalidRequest));
            }
        });
        server.set_logger([log = options_.request_log](const httplib::Request& req, const httplib::Response& res) {
            if (log) {
                log->write({{"ts", net::utc_timestamp()},
                            {"method", req.method},
                            {"path", req.path},
                            {"status", res.status},
                            {"remote", req.remote_addr}});
            }
        });
    }

private:
    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

    static void send(httplib::Response& res, const ApiError& e) {
        res.status = e.status();
        res.set_content(e.body().dump(), "application/json; charset=utf-8");
    }

    static void send(httplib::Response& res, int status, const nlohmann::json& body) {
        res.status = status;
        res.set_content(body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace),
                        "application/json; charset=utf-8");
    }

    static Handler wrap(Handler inner) {
        return [inner = std::move(inner)](const httplib::Request& req, httplib::Response& res) {
            try {
                inner(req, res);
            } catch (const ApiError& e) {
                send(res, e);
            } catch (const std::exception& e) {
                send(res, ApiError(500, "internal", msg::kInternal, {{"reason", e.what()}}));
            }
        };
    }

    void health(const httplib::Request&, httplib::Response& res) {
        const auto counts = store_.counts();
        nlohmann::json body{{"status", "ok"},
                            {"ontology_figures", onto::all_figures(ontology_).size()},
                            {"index_built", index_ready()},
                            {"rag_config", options_.rag.label()},
                            {"examples", counts.examples},
                            {"annotations", counts.annotations}};
        std::lock_guard lock(kb_mutex_);
        if (index_error_) {
            body["index_error"] = *index_error_;
        }
        send(res, 200, body);
    }

    void prefixes(const httplib::Request&, httplib::Response& res) {
        nlohmann::json body = nlohmann::json::object();
        for (const auto& [prefix, ns] : ontology_.prefixes().entries()) {
            body[prefix] = ns;
        }
        send(res, 200, body);
    }

    [[nodiscard]] nlohmann::json vocabulary_of(onto::Dimension d) const {
        nlohmann::json values = nlohmann::json::array();
        for (const auto& v : onto::property_vocabulary(ontology_, d)) {
            values.push_back(payloads_.vocabulary_entry(v));
        }
        return values;
    }

    void vocabulary(const httplib::Request& req, httplib::Response& res) {
        if (req.matches.size() > 1) {
            const auto d = onto::parse_dimension(req.matches[1].str());
            if (!d) {
                throw ApiError(404, "unknown_dimension", msg::kUnknownDimension, {{"dimension", req.matches[1].str()}});
            }
            send(res, 200, vocabulary_of(*d));
            return;
        }
        nlohmann::json body = nlohmann::json::object();
        for (auto d : onto::kDimensions) {
            body[std::string(onto::dimension_name(d))] = vocabulary_of(d);
        }
        send(res, 200, body);
    }

    void figures(const httplib::Request&, httplib::Response& res) {
        std::vector<onto::FigureClass> list;
        for (const auto& f : onto::all_figures(ontology_)) {
            list.push_back(onto::figure_class(ontology_, f));
        }
        std::sort(list.begin(), list.end(), [](const onto::FigureClass& a, const onto::FigureClass& b) {
            const auto fa = text::fold_case(a.label);
            const auto fb = text::fold_case(b.label);
            return fa != fb ? fa < fb : a.iri < b.iri;
        });
        nlohmann::json body = nlohmann::json::array();
        for (const auto& f : list) {
            body.push_back(payloads_.figure(f));
        }
        send(res, 200, body);
    }

    void figure(const httplib::Request& req, httplib::Response& res) {
        const auto iri = payloads_.resolve_figure(req.matches[1].str());
        if (!iri) {
            throw ApiError(404, "unknown_figure", msg::kUnknownFigure, {{"figure", req.matches[1].str()}});
        }
        send(res, 200, payloads_.figure_info(onto::figure_info(ontology_, *iri)));
    }

    void create_example(const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req.body);
        annot::NewExample input{required_string(body, "text"), optional_string(body, "context"),
                                optional_string(body, "author"), optional_string(body, "source"),
                                optional_bool(body, "confirm").value_or(false)};
        auto blank = [](const std::optional<std::string>& s) { return !s || text::trim(*s).empty(); };
        if (blank(input.author) && blank(input.source)) {
            throw ApiError(422, "provenance_required", msg::kProvenance);
        }
        const auto report =
            annot::verify_text(input.text, *services_.language, *services_.grammar, *services_.gibberish);
        try {
            const auto record = store_.submit_example(input, report);
            auto out = annot::AnnotationStore::to_json(record);
            out["verification"] = annot::to_json(report);
            send(res, 201, out);
        } catch (const annot::ConfirmationRequired& e) {
            throw ApiError(428, "confirmation_required", msg::kConfirm, {{"verification", annot::to_json(e.report())}});
        } catch (const annot::ProvenanceRequired&) {
            throw ApiError(422, "provenance_required", msg::kProvenance);
        }
    }

    void random_example(const httplib::Request&, httplib::Response& res) {
        try {
            std::lock_guard lock(rng_mutex_);
            send(res, 200, annot::AnnotationStore::to_json(store_.random_example(rng_)));
        } catch (const annot::NoEligibleExample&) {
            throw ApiError(404, "no_eligible_example", msg::kNoExample);
        }
    }

    void get_example(const httplib::Request& req, httplib::Response& res) {
        const auto id = std::stoll(req.matches[1].str());
        const auto example = store_.example(id);
        if (!example) {
            throw ApiError(404, "unknown_example", msg::kUnknownExample, {{"example_id", id}});
        }
        nlohmann::json annotations = nlohmann::json::array();
        for (const auto& a : store_.annotations_for(id)) {
            annotations.push_back(payloads_.annotation(a));
        }
        auto body = annot::AnnotationStore::to_json(*example);
        body["annotations"] = std::move(annotations);
        send(res, 200, body);
    }

    void search(const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req.body);
        onto::PropertySelection selection;
        for (const auto& [key, value] : body.items()) {
            const auto d = onto::parse_dimension(key);
            if (!d) {
                throw ApiError(422, "unknown_dimension", msg::kUnknownDimension, {{"dimension", key}});
            }
            if (value.is_null() || (value.is_string() && value.get<std::string>() == "NoIdea")) {
                continue;
            }
            if (!value.is_string()) {
                throw ApiError(422, "invalid_request", msg::kInvalidRequest, {{"field", key}});
            }
            const auto name = value.get<std::string>();
            std::optional<onto::Iri> iri;
            try {
                iri = ontology_.prefixes().expand(name);
            } catch (const std::invalid_argument&) {
            }
            const auto allowed = onto::property_vocabulary(ontology_, *d);
            if (!iri || std::find(allowed.begin(), allowed.end(), *iri) == allowed.end()) {
                throw ApiError(422, "unknown_value", msg::kUnknownValue, {{"dimension", key}, {"value", name}});
            }
            selection[*d] = *iri;
        }
        nlohmann::json out = nlohmann::json::array();
        for (const auto& f : onto::search_figures(ontology_, selection)) {
            out.push_back(payloads_.figure_info(onto::figure_info(ontology_, f.iri)));
        }
        send(res, 200, out);
    }

    void annotate(const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req.body);
        const auto example_id = optional_id(body, "example_id");
        if (!example_id || !body.contains("figure_iris") || !body.at("figure_iris").is_array() ||
            body.at("figure_iris").empty()) {
            throw ApiError(422, "invalid_request", msg::kInvalidRequest);
        }
        std::vector<onto::Iri> figures;
        for (const auto& item : body.at("figure_iris")) {
            if (!item.is_string()) {
                throw ApiError(422, "invalid_request", msg::kInvalidRequest, {{"field", "figure_iris"}});
            }
            const auto iri = payloads_.resolve_figure(item.get<std::string>());
            if (!iri) {
                throw ApiError(404, "unknown_figure", msg::kUnknownFigure, {{"figure", item}});
            }
            figures.push_back(*iri);
        }
        try {
            nlohmann::json out = nlohmann::json::array();
            for (const auto& a : store_.annotate(*example_id, figures, ontology_)) {
                out.push_back(payloads_.annotation(a));
            }
            send(res, 201, out);
        } catch (const annot::UnknownRecord&) {
            throw ApiError(404, "unknown_example", msg::kUnknownExample, {{"example_id", *example_id}});
        } catch (const onto::UnknownFigure& e) {
            throw ApiError(404, "unknown_figure", msg::kUnknownFigure, {{"reason", e.what()}});
        } catch (const annot::RepetitionCheckFailed& e) {
            nlohmann::json names = nlohmann::json::array();
            for (const auto& f : e.figures()) {
                names.push_back(payloads_.iri(f));
            }
            throw ApiError(422, "repetition_check_failed", msg::kRepetition, {{"figures", names}});
        } catch (const annot::DuplicateAnnotation& e) {
            throw ApiError(409, "duplicate_annotation", msg::kDuplicate,
                           {{"example_id", e.example_id()}, {"figure", payloads_.iri(e.figure())}});
        }
    }

    void chat(const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req.body);
        std::string question = required_string(body, "question");
        if (const auto id = optional_id(body, "example_id")) {
            const auto example = store_.example(*id);
            if (!example) {
                throw ApiError(404, "unknown_example", msg::kUnknownExample, {{"example_id", *id}});
            }
            question += "\n\nBeispieltext: \"" + example->text + "\"";
        }
        std::shared_ptr<const rag::KnowledgeBase> kb;
        {
            std::lock_guard lock(kb_mutex_);
            kb = kb_;
        }
        if (!kb) {
            throw ApiError(503, "index_not_ready", msg::kIndexNotReady);
        }
        const auto result = rag::answer(question, *kb, *services_.embedder, *services_.reranker, *services_.llm);
        if (!result.answer) {
            throw ApiError(502, "upstream_unavailable", msg::kUpstream,
                           {{"contexts", result.contexts}, {"reason", result.error.value_or("")}});
        }
        send(res, 200,
             {{"answer", rag::postprocess_answer(*result.answer)},
              {"contexts", result.contexts},
              {"rerank_fallback", result.rerank_fallback}});
    }

    [[nodiscard]] bool authorized(const httplib::Request& req) const {
        if (!options_.admin_token || options_.admin_token->empty()) {
            return false;
        }
        const std::string expected = "Bearer " + *options_.admin_token;
        const auto& given = req.get_header_value("Authorization");
        if (given.size() != expected.size()) {
            return false;
        }
        unsigned char diff = 0;
        for (std::size_t i = 0; i < given.size(); ++i) {
            diff |= static_cast<unsigned char>(given[i] ^ expected[i]);
        }
        return diff == 0;
    }

    void flags(const httplib::Request& req, httplib::Response& res) {
        if (!authorized(req)) {
            throw ApiError(401, "unauthorized", admin_msg::kUnauthorized);
        }
        const auto body = parse_body(req.body);
        const annot::FlagUpdate update{optional_id(body, "example_id"), optional_bool(body, "is_harmful"),
                                       optional_bool(body, "is_invalid"), optional_id(body, "annotation_id"),
                                       optional_bool(body, "is_verified")};
        try {
            const auto result = store_.set_flags(update);
            send(res, 200,
                 {{"example", result.example ? annot::AnnotationStore::to_json(*result.example) : nlohmann::json()},
                  {"annotation", result.annotation ? payloads_.annotation(*result.annotation) : nlohmann::json()}});
        } catch (const annot::UnknownRecord& e) {
            throw ApiError(404, "unknown_record", admin_msg::kUnknownRecord, {{"reason", e.what()}});
        } catch (const std::invalid_argument& e) {
            throw ApiError(422, "invalid_flags", admin_msg::kInvalidFlags, {{"reason", e.what()}});
        }
    }

    onto::TripleStore ontology_;
    ExternalServices services_;
    AppOptions options_;
    annot::AnnotationStore store_;
    Payloads payloads_;

    mutable std::mutex kb_mutex_;
    std::shared_ptr<const rag::KnowledgeBase> kb_;
    std::optional<std::string> index_error_;
    std::thread index_thread_;

    std::mutex rng_mutex_;
    std::mt19937_64 rng_;
};

}  // namespace rhetorik::service
