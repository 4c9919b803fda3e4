#pragma once

#include <chrono>
#include <ctime>
#include <fstream>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace rhetorik::net {

struct HttpRequest {
    std::string url;
    std::string body;
    std::string content_type = "application/json";
    std::vector<std::pair<std::string, std::string>> headers;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Network failure, timeout, or a non-2xx answer from an upstream service.
class TransportError : public std::runtime_error {
public:
    explicit TransportError(const std::string& message, int status = 0)
        : std::runtime_error(message), status_(status) {}
    [[nodiscard]] int status() const { return status_; }

private:
    int status_;
};

/// POST-only transport; every upstream call (LLM, embeddings, reranker, grammar) goes through it.
class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResponse post(const HttpRequest& request) = 0;
};

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

inline ParsedUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw std::invalid_argument("URL without scheme: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport : public Transport {
public:
    explicit HttplibTransport(std::chrono::milliseconds timeout = std::chrono::seconds(60)) : timeout_(timeout) {}

    HttpResponse post(const HttpRequest& request) override {
        const auto [origin, path] = split_url(request.url);
        httplib::Client client(origin);
        const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(timeout_).count();
        const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout_).count() % 1000000;
        client.set_connection_timeout(seconds, micros);
        client.set_read_timeout(seconds, micros);
        client.set_write_timeout(seconds, micros);
        httplib::Headers headers;
        for (const auto& [k, v] : request.headers) {
            headers.emplace(k, v);
        }
        auto result = client.Post(path, headers, request.body, request.content_type);
        if (!result) {
            throw TransportError("request to " + request.url + " failed: " + httplib::to_string(result.error()));
        }
        if (result->status < 200 || result->status >= 300) {
            throw TransportError("upstream " + request.url + " answered " + std::to_string(result->status),
                                 result->status);
        }
        return {result->status, result->body};
    }

private:
    std::chrono::milliseconds timeout_;
};

inline std::string utc_timestamp(std::chrono::system_clock::time_point tp = std::chrono::system_clock::now()) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

/// Thread-safe JSON Lines sink.
class JsonLinesLog {
public:
    explicit JsonLinesLog(const std::string& path) : out_(path, std::ios::app) {
        if (!out_) {
            throw std::runtime_error("cannot open log file " + path);
        }
    }

    void write(const nlohmann::json& record) {
        std::lock_guard lock(mutex_);
        out_ << record.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
        out_.flush();
    }

private:
    std::mutex mutex_;
    std::ofstream out_;
};

/// Records every outbound request and its response (or error) before passing the result on.
class AuditedTransport : public Transport {
public:
    AuditedTransport(std::shared_ptr<Transport> inner, std::shared_ptr<JsonLinesLog> log)
        : inner_(std::move(inner)), log_(std::move(log)) {}

    HttpResponse post(const HttpRequest& request) override {
        nlohmann::json entry{{"ts", utc_timestamp()}, {"url", request.url}, {"request", request.body}};
        try {
            auto response = inner_->post(request);
            entry["status"] = response.status;
            entry["response"] = response.body;
            log_->write(entry);
            return response;
        } catch (const TransportError& e) {
            entry["error"] = e.what();
            entry["status"] = e.status();
            log_->write(entry);
            throw;
        }
    }

private:
    std::shared_ptr<Transport> inner_;
    std::shared_ptr<JsonLinesLog> log_;
};

}  // namespace rhetorik::net
