// Command-line entry points: serve, reify, index, eval, gen-cqs.

#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "rhetorik/evaluation/cq.hpp"
#include "rhetorik/evaluation/harness.hpp"
#include "rhetorik/evaluation/metrics.hpp"
#include "rhetorik/evaluation/records.hpp"
#include "rhetorik/ontology/reify.hpp"
#include "rhetorik/ontology/turtle.hpp"
#include "rhetorik/rag/pipeline.hpp"
#include "rhetorik/rag/serialize.hpp"
#include "rhetorik/service/bootstrap.hpp"
#include "rhetorik/service/config.hpp"
#include "rhetorik/service/server.hpp"

namespace {

namespace svc = rhetorik::service;
namespace eval = rhetorik::eval;
namespace onto = rhetorik::onto;
namespace rag = rhetorik::rag;

httplib::Server* g_server = nullptr;

void stop_server(int) {
    if (g_server != nullptr) {
        g_server->stop();
    }
}

void write_output(const std::optional<std::string>& path, const std::string& content) {
    if (!path || *path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(*path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) {
        throw std::runtime_error("cannot write " + *path);
    }
}

int serve(const svc::ServiceConfig& config) {
    onto::TripleStore ontology;
    try {
        ontology = svc::load_ontology(config.ontology_path, config.mapping_path);
    } catch (const std::exception& e) {
        std::cerr << "error: cannot load ontology: " << e.what() << '\n';
        return 1;
    }
    svc::App app(std::move(ontology), svc::make_services(config), svc::make_app_options(config));
    app.start_index_build();
    httplib::Server server;
    server.new_task_queue = [n = config.threads] { return new httplib::ThreadPool(n); };
    app.mount(server);
    g_server = &server;
    std::signal(SIGINT, stop_server);
    std::signal(SIGTERM, stop_server);
    std::cerr << "listening on " << config.host << ':' << config.port << '\n';
    if (!server.listen(config.host, config.port)) {
        std::cerr << "error: cannot listen on " << config.host << ':' << config.port << '\n';
        return 1;
    }
    return 0;
}

struct OntologyArgs {
    std::string ontology = "data/figures.ttl";
    std::optional<std::string> mapping;

    void add(CLI::App* cmd) {
        cmd->add_option("--ontology", ontology, "Turtle ontology")->capture_default_str();
        cmd->add_option("--mapping", mapping, "reification mapping; omit for an already reified ontology");
    }

    [[nodiscard]] onto::TripleStore load() const { return svc::load_ontology(ontology, mapping); }
};

std::unique_ptr<eval::Judge> make_judge(const std::string& kind, const svc::ExternalServices& services,
                                        const svc::ServiceConfig& config) {
    if (kind == "lexical") {
        return std::make_unique<eval::LexicalJudge>();
    }
    if (!config.llm) {
        throw std::runtime_error("--judge llm needs RHETORIK_LLM_URL");
    }
    return std::make_unique<eval::LlmJudge>(services.llm);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Rhetorical figure ontology tools"};
    cli.require_subcommand(1);

    auto* serve_cmd = cli.add_subcommand("serve", "run the HTTP API (configured through RHETORIK_* variables)");
    std::optional<int> port;
    std::optional<std::string> host;
    serve_cmd->add_option("--port", port, "overrides RHETORIK_PORT");
    serve_cmd->add_option("--host", host, "overrides RHETORIK_HOST");

    auto* reify_cmd = cli.add_subcommand("reify", "rewrite an ontology into the fine-grained form");
    std::string reify_in;
    std::string reify_mapping;
    std::optional<std::string> reify_out;
    std::optional<std::string> reify_report;
    reify_cmd->add_option("input", reify_in, "Turtle ontology")->required();
    reify_cmd->add_option("--mapping", reify_mapping, "reification mapping")->required();
    reify_cmd->add_option("-o,--output", reify_out, "reified Turtle (default stdout)");
    reify_cmd->add_option("--report", reify_report, "report file (default stderr)");

    auto* index_cmd = cli.add_subcommand("index", "serialize the ontology, chunk it and write a vector index");
    OntologyArgs index_onto;
    index_onto.add(index_cmd);
    std::optional<std::string> index_config;
    std::string index_out;
    index_cmd->add_option("--config", index_config, "RagConfig JSON");
    index_cmd->add_option("-o,--output", index_out, "index file; chunks go to <file>.chunks.json")->required();

    auto* eval_cmd = cli.add_subcommand("eval", "answer and score a question set under several RAG configurations");
    OntologyArgs eval_onto;
    eval_onto.add(eval_cmd);
    std::string eval_configs = "data/eval_configs.json";
    std::optional<std::string> eval_dataset;
    std::optional<std::string> eval_json;
    std::optional<std::string> eval_answers;
    std::optional<std::string> eval_options;
    std::string judge_kind = "lexical";
    eval_cmd->add_option("--configs", eval_configs, "JSON array of RagConfig")->capture_default_str();
    eval_cmd->add_option("--dataset", eval_dataset, "ground-truth JSONL (default: template questions)");
    eval_cmd->add_option("--json", eval_json, "write the machine-readable report here");
    eval_cmd->add_option("--answers", eval_answers, "write answered records (JSONL, one block per config)");
    eval_cmd->add_option("--metric-options", eval_options, "JSON with relevancy_questions and weights");
    eval_cmd->add_option("--judge", judge_kind, "lexical or llm")
        ->check(CLI::IsMember({"lexical", "llm"}))
        ->capture_default_str();

    auto* cq_cmd = cli.add_subcommand("gen-cqs", "write template competency questions as JSONL");
    OntologyArgs cq_onto;
    cq_onto.add(cq_cmd);
    std::optional<std::string> cq_out;
    cq_cmd->add_option("-o,--output", cq_out, "JSONL file (default stdout)");

    CLI11_PARSE(cli, argc, argv);

    try {
        auto config = svc::ServiceConfig::from_env();
        if (*serve_cmd) {
            if (port) {
                config.port = *port;
            }
            if (host) {
                config.host = *host;
            }
            return serve(config);
        }
        if (*reify_cmd) {
            const auto store = onto::parse_turtle(svc::read_text_file(reify_in));
            const auto mapping = onto::parse_mapping(svc::read_text_file(reify_mapping), store.prefixes());
            const auto result = onto::reify(store, mapping);
            write_output(reify_out, onto::write_turtle(result.store));
            const auto report = result.report.render(result.store.prefixes());
            if (reify_report) {
                write_output(reify_report, report);
            } else {
                std::cerr << report;
            }
            return 0;
        }
        if (*index_cmd) {
            const auto store = index_onto.load();
            const auto rag_config = svc::load_rag_config(index_config);
            auto services = svc::make_services(config);
            const auto kb = rag::KnowledgeBase::build(rag::serialize_ontology(store), rag_config, *services.embedder);
            kb.save(index_out);
            std::cerr << "indexed " << kb.index.size() << " leaves of " << kb.tree.chunk_count() << " chunks ("
                      << rag_config.label() << ")\n";
            return 0;
        }
        if (*eval_cmd) {
            const auto store = eval_onto.load();
            std::vector<eval::GroundTruthRecord> dataset;
            if (eval_dataset) {
                std::ifstream in(*eval_dataset);
                if (!in) {
                    throw std::runtime_error("cannot read " + *eval_dataset);
                }
                dataset = eval::read_ground_truth(in);
            } else {
                dataset = eval::generate_template_cqs(store);
            }
            const auto configs =
                nlohmann::json::parse(svc::read_text_file(eval_configs)).get<std::vector<rag::RagConfig>>();
            eval::MetricOptions metric_options;
            if (eval_options) {
                metric_options = nlohmann::json::parse(svc::read_text_file(*eval_options)).get<eval::MetricOptions>();
            }
            auto services = svc::make_services(config);
            auto judge = make_judge(judge_kind, services, config);
            const auto report = eval::run_evaluation(
                dataset, configs, rag::serialize_ontology(store),
                {*services.embedder, *services.reranker, *services.llm, *judge, *services.embedder}, metric_options,
                [](const std::string& line) { std::cerr << line << '\n'; });
            std::cout << eval::render_table(report);
            if (eval_json) {
                write_output(eval_json, eval::to_json(report).dump(2) + "\n");
            }
            if (eval_answers) {
                std::ofstream out(*eval_answers, std::ios::trunc);
                for (const auto& row : report.rows) {
                    eval::write_jsonl(out, row.records);
                }
            }
            return 0;
        }
        if (*cq_cmd) {
            std::ostringstream out;
            eval::write_jsonl(out, eval::generate_template_cqs(cq_onto.load()));
            write_output(cq_out, out.str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
