#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rhetorik/annotation/store.hpp"
#include "rhetorik/ontology/figures.hpp"

namespace rhetorik::service {

/// Non-success response: HTTP status plus {"error": {code, message, details}}.
class ApiError : public std::runtime_error {
public:
    ApiError(int status, std::string code, const std::string& message, nlohmann::json details = nullptr)
        : std::runtime_error(message), status_(status), code_(std::move(code)), details_(std::move(details)) {}

    [[nodiscard]] int status() const { return status_; }
    [[nodiscard]] const std::string& code() const { return code_; }
    [[nodiscard]] const nlohmann::json& details() const { return details_; }

    [[nodiscard]] nlohmann::json body() const {
        nlohmann::json error{{"code", code_}, {"message", what()}};
        if (!details_.is_null()) {
            error["details"] = details_;
        }
        return {{"error", std::move(error)}};
    }

private:
    int status_;
    std::string code_;
    nlohmann::json details_;
};

/// User-facing messages (German).
namespace msg {
inline constexpr const char* kInvalidJson = "Die Anfrage enth\xC3\xA4lt kein g\xC3\xBCltiges JSON.";
inline constexpr const char* kInvalidRequest = "Die Anfrage ist unvollst\xC3\xA4ndig oder fehlerhaft.";
inline constexpr const char* kProvenance = "Bitte gib mindestens einen Autor oder eine Quelle an.";
inline constexpr const char* kConfirm =
    "Der Text hat die automatische Pr\xC3\xBC" "fung nicht bestanden. Bitte best\xC3\xA4tige, dass er trotzdem "
    "gespeichert werden soll.";
inline constexpr const char* kNoExample = "Es ist kein Beispiel zur Annotation verf\xC3\xBCgbar.";
inline constexpr const char* kUnknownExample = "Das Beispiel wurde nicht gefunden.";
inline constexpr const char* kUnknownFigure = "Die rhetorische Figur wurde nicht gefunden.";
inline constexpr const char* kUnknownDimension = "Unbekannte Eigenschaft.";
inline constexpr const char* kUnknownValue = "Unbekannter Wert f\xC3\xBCr diese Eigenschaft.";
inline constexpr const char* kRepetition =
    "F\xC3\xBCr diese Figur muss mindestens ein Wort in gleicher Form mehrfach im Text vorkommen.";
inline constexpr const char* kDuplicate = "Diese Annotation existiert bereits.";
inline constexpr const char* kUpstream = "Das Sprachmodell ist derzeit nicht erreichbar.";
inline constexpr const char* kIndexNotReady = "Der Suchindex wird noch aufgebaut. Bitte versuche es gleich erneut.";
inline constexpr const char* kNotFound = "Die angeforderte Ressource existiert nicht.";
inline constexpr const char* kInternal = "Ein interner Fehler ist aufgetreten.";
}  // namespace msg

/// Operator-facing messages (English).
namespace admin_msg {
inline constexpr const char* kUnauthorized = "missing or invalid admin token";
inline constexpr const char* kInvalidFlags = "invalid flag update";
inline constexpr const char* kUnknownRecord = "unknown record";
}  // namespace admin_msg

inline nlohmann::json parse_body(const std::string& body) {
    try {
        auto j = nlohmann::json::parse(body);
        if (!j.is_object()) {
            throw ApiError(400, "invalid_json", msg::kInvalidJson);
        }
        return j;
    } catch (const nlohmann::json::exception&) {
        throw ApiError(400, "invalid_json", msg::kInvalidJson);
    }
}

/// Optional string field; absent and null both map to nullopt, other non-strings are rejected.
inline std::optional<std::string> optional_string(const nlohmann::json& body, const char* key) {
    if (!body.contains(key) || body.at(key).is_null()) {
        return std::nullopt;
    }
    if (!body.at(key).is_string()) {
        throw ApiError(422, "invalid_request", msg::kInvalidRequest, {{"field", key}});
    }
    return body.at(key).get<std::string>();
}

inline std::string required_string(const nlohmann::json& body, const char* key) {
    auto v = optional_string(body, key);
    if (!v || text::trim(*v).empty()) {
        throw ApiError(422, "invalid_request", msg::kInvalidRequest, {{"field", key}});
    }
    return *v;
}

inline std::optional<bool> optional_bool(const nlohmann::json& body, const char* key) {
    if (!body.contains(key) || body.at(key).is_null()) {
        return std::nullopt;
    }
    if (!body.at(key).is_boolean()) {
        throw ApiError(422, "invalid_request", msg::kInvalidRequest, {{"field", key}});
    }
    return body.at(key).get<bool>();
}

inline std::optional<std::int64_t> optional_id(const nlohmann::json& body, const char* key) {
    if (!body.contains(key) || body.at(key).is_null()) {
        return std::nullopt;
    }
    if (!body.at(key).is_number_integer()) {
        throw ApiError(422, "invalid_request", msg::kInvalidRequest, {{"field", key}});
    }
    return body.at(key).get<std::int64_t>();
}

/// JSON views of domain objects; IRIs are compacted with the ontology's prefixes.
class Payloads {
public:
    explicit Payloads(const onto::TripleStore& store) : store_(store) {}

    [[nodiscard]] std::string iri(const onto::Iri& i) const { return store_.prefixes().compact(i); }

    /// Accepts a prefixed name, "<absolute>", local name or label.
    [[nodiscard]] std::optional<onto::Iri> resolve_figure(const std::string& name) const {
        return onto::find_figure(store_, name);
    }

    [[nodiscard]] nlohmann::json literal(const onto::Literal& l) const {
        return l.lang ? nlohmann::json{{"text", l.lexical}, {"lang", *l.lang}}
                      : nlohmann::json{{"text", l.lexical}, {"lang", nullptr}};
    }

    [[nodiscard]] nlohmann::json figure(const onto::FigureClass& f) const {
        nlohmann::json parents = nlohmann::json::array();
        for (const auto& p : f.parents) {
            parents.push_back(iri(p));
        }
        return {{"iri", iri(f.iri)}, {"name", onto::local_name(f.iri)}, {"label", f.label}, {"parents", parents}};
    }

    [[nodiscard]] nlohmann::json figure_info(const onto::FigureInfo& info) const {
        auto opt = [](const std::optional<onto::Literal>& l) {
            return l ? nlohmann::json(l->lexical) : nlohmann::json(nullptr);
        };
        nlohmann::json definitions = nlohmann::json::array();
        for (const auto& d : info.definitions) {
            definitions.push_back({{"id", iri(d.id)},
                                   {"text", d.text.lexical},
                                   {"lang", d.text.lang ? nlohmann::json(*d.text.lang) : nlohmann::json()},
                                   {"author", opt(d.author)}});
        }
        nlohmann::json examples = nlohmann::json::array();
        for (const auto& e : info.examples) {
            examples.push_back({{"id", iri(e.id)},
                                {"text", e.text.lexical},
                                {"lang", e.text.lang ? nlohmann::json(*e.text.lang) : nlohmann::json()},
                                {"author", opt(e.author)},
                                {"source", opt(e.source)}});
        }
        return {{"figure", figure(info.figure)}, {"definitions", definitions}, {"examples", examples}};
    }

    [[nodiscard]] nlohmann::json annotation(const annot::AnnotationRecord& a) const {
        auto j = annot::AnnotationStore::to_json(a);
        j["figure_iri"] = iri(a.figure_iri);
        return j;
    }

    [[nodiscard]] nlohmann::json vocabulary_entry(const onto::Iri& value) const {
        return {{"iri", iri(value)}, {"label", onto::display_label(store_, value)}};
    }

private:
    const onto::TripleStore& store_;
};

}  // namespace rhetorik::service
