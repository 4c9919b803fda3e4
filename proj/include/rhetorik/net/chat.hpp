#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rhetorik/net/transport.hpp"

namespace rhetorik::net {

struct ChatMessage {
    std::string role;
    std::string content;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.1;
    std::optional<std::string> model;
};

class ChatModel {
public:
    virtual ~ChatModel() = default;
    /// Returns the assistant message; throws TransportError when the model is unreachable.
    virtual std::string complete(const ChatRequest& request) = 0;
};

struct EndpointConfig {
    std::string url;
    std::string api_key;
    std::string model;
};

inline nlohmann::json chat_payload(const ChatRequest& request, const std::string& default_model) {
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& m : request.messages) {
        messages.push_back({{"role", m.role}, {"content", m.content}});
    }
    return {{"model", request.model.value_or(default_model)},
            {"temperature", request.temperature},
            {"messages", std::move(messages)}};
}

inline std::vector<std::pair<std::string, std::string>> auth_headers(const std::string& api_key) {
    if (api_key.empty()) {
        return {};
    }
    return {{"Authorization", "Bearer " + api_key}};
}

/// Chat-completions style endpoint (`choices[0].message.content`).
class HttpChatModel : public ChatModel {
public:
    HttpChatModel(std::shared_ptr<Transport> transport, EndpointConfig endpoint)
        : transport_(std::move(transport)), endpoint_(std::move(endpoint)) {}

    std::string complete(const ChatRequest& request) override {
        HttpRequest http{endpoint_.url, chat_payload(request, endpoint_.model).dump(), "application/json",
                         auth_headers(endpoint_.api_key)};
        const auto response = transport_->post(http);
        try {
            auto body = nlohmann::json::parse(response.body);
            return body.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw TransportError(std::string("malformed chat response: ") + e.what());
        }
    }

private:
    std::shared_ptr<Transport> transport_;
    EndpointConfig endpoint_;
};

}  // namespace rhetorik::net
