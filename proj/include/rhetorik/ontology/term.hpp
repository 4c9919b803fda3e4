#pragma once

#include <cctype>
#include <compare>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace rhetorik::onto {

inline constexpr std::string_view kRdfNs = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view kRdfsNs = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr std::string_view kOwlNs = "http://www.w3.org/2002/07/owl#";
inline constexpr std::string_view kXsdNs = "http://www.w3.org/2001/XMLSchema#";

/// An absolute IRI. Prefixed names are expanded on input and compacted on output.
struct Iri {
    std::string value;

    Iri() = default;
    explicit Iri(std::string v) : value(std::move(v)) {}

    auto operator<=>(const Iri&) const = default;
};

struct Literal {
    std::string lexical;
    std::optional<std::string> lang;

    auto operator<=>(const Literal&) const = default;
};

using Term = std::variant<Iri, Literal>;

inline bool is_iri(const Term& t) { return std::holds_alternative<Iri>(t); }
inline bool is_literal(const Term& t) { return std::holds_alternative<Literal>(t); }

struct Triple {
    Iri subject;
    Iri predicate;
    Term object;

    auto operator<=>(const Triple&) const = default;
    bool operator==(const Triple&) const = default;
};

namespace vocab {
inline Iri rdf(std::string_view local) { return Iri(std::string(kRdfNs) + std::string(local)); }
inline Iri rdfs(std::string_view local) { return Iri(std::string(kRdfsNs) + std::string(local)); }
inline Iri owl(std::string_view local) { return Iri(std::string(kOwlNs) + std::string(local)); }

inline Iri type() { return rdf("type"); }
inline Iri sub_class_of() { return rdfs("subClassOf"); }
inline Iri label() { return rdfs("label"); }
inline Iri comment() { return rdfs("comment"); }
inline Iri owl_class() { return owl("Class"); }
}  // namespace vocab

/// Ordered prefix -> namespace map. Declaration order is kept for serialization.
class PrefixMap {
public:
    void declare(std::string prefix, std::string ns) {
        for (auto& [p, n] : entries_) {
            if (p == prefix) {
                n = std::move(ns);
                return;
            }
        }
        entries_.emplace_back(std::move(prefix), std::move(ns));
    }

    [[nodiscard]] std::optional<std::string> find(std::string_view prefix) const {
        for (const auto& [p, n] : entries_) {
            if (p == prefix) {
                return n;
            }
        }
        return std::nullopt;
    }

    /// Expands "prefix:local" (or "<absolute>") into an absolute IRI.
    [[nodiscard]] Iri expand(std::string_view name) const {
        if (name.size() >= 2 && name.front() == '<' && name.back() == '>') {
            return Iri(std::string(name.substr(1, name.size() - 2)));
        }
        const auto colon = name.find(':');
        if (colon == std::string_view::npos) {
            throw std::invalid_argument("not a prefixed name: " + std::string(name));
        }
        const auto prefix = name.substr(0, colon);
        const auto local = name.substr(colon + 1);
        if (local.empty()) {
            throw std::invalid_argument("empty local name: " + std::string(name));
        }
        auto ns = find(prefix);
        if (!ns) {
            throw std::invalid_argument("unknown prefix '" + std::string(prefix) + "'");
        }
        return Iri(*ns + std::string(local));
    }

    /// Shortest prefixed form, or "<iri>" when no namespace matches.
    [[nodiscard]] std::string compact(const Iri& iri) const {
        const std::pair<std::string, std::string>* best = nullptr;
        for (const auto& entry : entries_) {
            const auto& ns = entry.second;
            if (iri.value.size() > ns.size() && iri.value.compare(0, ns.size(), ns) == 0 &&
                is_valid_local(std::string_view(iri.value).substr(ns.size()))) {
                if (best == nullptr || ns.size() > best->second.size()) {
                    best = &entry;
                }
            }
        }
        if (best == nullptr) {
            return "<" + iri.value + ">";
        }
        return best->first + ":" + iri.value.substr(best->second.size());
    }

    [[nodiscard]] const std::vector<std::pair<std::string, std::string>>& entries() const {
        return entries_;
    }

    static bool is_local_char(char c) {
        const auto u = static_cast<unsigned char>(c);
        return std::isalnum(u) != 0 || c == '_' || c == '-' || c == '.' || u >= 0x80;
    }

    static bool is_valid_local(std::string_view local) {
        if (local.empty() || local.back() == '.' || local.front() == '.' || local.front() == '-') {
            return false;
        }
        for (char c : local) {
            if (!is_local_char(c)) {
                return false;
            }
        }
        return true;
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

/// Text after the last '#' or '/'.
inline std::string local_name(const Iri& iri) {
    const auto pos = iri.value.find_last_of("#/");
    return pos == std::string::npos ? iri.value : iri.value.substr(pos + 1);
}

/// Namespace part up to and including the last '#' or '/'.
inline std::string namespace_of(const Iri& iri) {
    const auto pos = iri.value.find_last_of("#/");
    return pos == std::string::npos ? std::string{} : iri.value.substr(0, pos + 1);
}

}  // namespace rhetorik::onto

template <>
struct std::hash<rhetorik::onto::Iri> {
    std::size_t operator()(const rhetorik::onto::Iri& iri) const noexcept {
        return std::hash<std::string>{}(iri.value);
    }
};
