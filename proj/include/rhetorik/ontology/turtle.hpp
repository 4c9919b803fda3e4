#pragma once

// Reader and writer for the Turtle subset used by the figure ontology:
// @prefix / PREFIX directives, `;` predicate lists, `,` object lists, IRIs,
// prefixed names, `a`, string literals with optional language tags, `#` comments.

#include <cstddef>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "rhetorik/ontology/triple_store.hpp"
#include "rhetorik/text/unicode.hpp"

namespace rhetorik::onto {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line),
          column_(column) {}

    [[nodiscard]] std::size_t line() const { return line_; }
    [[nodiscard]] std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

namespace detail {

class TurtleReader {
public:
    explicit TurtleReader(std::string_view input) : in_(input) {}

    TripleStore run() {
        TripleStore store;
        skip_ws();
        while (!at_end()) {
            if (peek() == '@') {
                directive(store);
            } else if (starts_with_keyword("PREFIX")) {
                sparql_prefix(store);
            } else {
                triples(store);
                expect('.');
            }
            skip_ws();
        }
        return store;
    }

private:
    [[nodiscard]] bool at_end() const { return pos_ >= in_.size(); }
    [[nodiscard]] char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < in_.size() ? in_[pos_ + ahead] : '\0';
    }

    char advance() {
        const char c = in_[pos_++];
        if (c == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        return c;
    }

    [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, line_, column_); }

    void skip_ws() {
        while (!at_end()) {
            const char c = peek();
            if (c == '#') {
                while (!at_end() && peek() != '\n') {
                    advance();
                }
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    void expect(char c) {
        skip_ws();
        if (at_end()) {
            fail(std::string("expected '") + c + "' but reached end of input");
        }
        if (peek() != c) {
            fail(std::string("expected '") + c + "' but found '" + peek() + "'");
        }
        advance();
    }

    bool starts_with_keyword(std::string_view keyword) const {
        if (in_.substr(pos_, keyword.size()) != keyword) {
            return false;
        }
        const char after = peek(keyword.size());
        return after == '\0' || std::isspace(static_cast<unsigned char>(after));
    }

    void directive(TripleStore& store) {
        advance();  // '@'
        std::string word;
        while (!at_end() && std::isalpha(static_cast<unsigned char>(peek()))) {
            word += advance();
        }
        if (word != "prefix") {
            fail("unsupported directive '@" + word + "'");
        }
        prefix_body(store);
        expect('.');
    }

    void sparql_prefix(TripleStore& store) {
        for (int i = 0; i < 6; ++i) {
            advance();
        }
        prefix_body(store);
    }

    void prefix_body(TripleStore& store) {
        skip_ws();
        std::string prefix;
        while (!at_end() && peek() != ':') {
            const char c = peek();
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) {
                fail("invalid character in prefix name");
            }
            prefix += advance();
        }
        if (at_end()) {
            fail("expected ':' in prefix declaration");
        }
        advance();  // ':'
        skip_ws();
        if (peek() != '<') {
            fail("expected IRI in prefix declaration");
        }
        store.prefixes().declare(prefix, iri_ref());
    }

    std::string iri_ref() {
        advance();  // '<'
        std::string value;
        while (true) {
            if (at_end() || peek() == '\n') {
                fail("unterminated IRI");
            }
            const char c = advance();
            if (c == '>') {
                break;
            }
            if (c == ' ' || c == '"' || c == '{' || c == '}' || c == '|' || c == '^' || c == '`') {
                fail("invalid character in IRI");
            }
            value += c;
        }
        return value;
    }

    Iri iri(const TripleStore& store, bool allow_a) {
        skip_ws();
        if (at_end()) {
            fail("unexpected end of input, expected IRI");
        }
        if (peek() == '<') {
            return Iri(iri_ref());
        }
        if (allow_a && peek() == 'a') {
            const char next = peek(1);
            if (next == '\0' || std::isspace(static_cast<unsigned char>(next)) || next == '"' ||
                next == '<') {
                advance();
                return vocab::type();
            }
        }
        if (peek() == '_') {
            fail("blank nodes are not supported");
        }
        if (peek() == '[' || peek() == '(') {
            fail("blank node property lists and collections are not supported");
        }
        return prefixed_name(store);
    }

    Iri prefixed_name(const TripleStore& store) {
        const std::size_t start_line = line_;
        const std::size_t start_column = column_;
        std::string prefix;
        while (!at_end() && peek() != ':') {
            const char c = peek();
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) {
                fail(std::string("unexpected character '") + c + "'");
            }
            prefix += advance();
        }
        if (at_end()) {
            fail("expected ':' in prefixed name");
        }
        advance();  // ':'
        std::string local;
        while (!at_end()) {
            const char c = peek();
            if (c == '\\' && pos_ + 1 < in_.size()) {
                advance();
                local += advance();
                continue;
            }
            if (!PrefixMap::is_local_char(c)) {
                break;
            }
            local += advance();
        }
        // A trailing '.' terminates the statement rather than belonging to the name.
        while (!local.empty() && local.back() == '.') {
            local.pop_back();
            --pos_;
            --column_;
        }
        if (local.empty()) {
            throw ParseError("empty local name in '" + prefix + ":'", start_line, start_column);
        }
        auto ns = store.prefixes().find(prefix);
        if (!ns) {
            throw ParseError("unknown prefix '" + prefix + "'", start_line, start_column);
        }
        return Iri(*ns + local);
    }

    Term object(const TripleStore& store) {
        skip_ws();
        const char c = peek();
        if (c == '"' || c == '\'') {
            return literal();
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-') {
            fail("numeric literals are not supported");
        }
        return iri(store, false);
    }

    Literal literal() {
        const std::size_t start_line = line_;
        const std::size_t start_column = column_;
        const char quote = advance();
        bool long_form = false;
        if (peek() == quote && peek(1) == quote) {
            advance();
            advance();
            long_form = true;
        }
        std::string value;
        while (true) {
            if (at_end()) {
                throw ParseError("unterminated string literal", start_line, start_column);
            }
            const char c = peek();
            if (long_form) {
                if (c == quote && peek(1) == quote && peek(2) == quote) {
                    advance();
                    advance();
                    advance();
                    break;
                }
            } else {
                if (c == '\n' || c == '\r') {
                    throw ParseError("unterminated string literal", start_line, start_column);
                }
                if (c == quote) {
                    advance();
                    break;
                }
            }
            if (c == '\\') {
                advance();
                value += escape();
                continue;
            }
            value += advance();
        }
        Literal lit{std::move(value), std::nullopt};
        if (peek() == '@') {
            advance();
            std::string tag;
            while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '-')) {
                tag += advance();
            }
            if (tag.empty()) {
                fail("empty language tag");
            }
            lit.lang = std::move(tag);
        } else if (peek() == '^' && peek(1) == '^') {
            fail("typed literals are not supported");
        }
        return lit;
    }

    std::string escape() {
        if (at_end()) {
            fail("unterminated escape sequence");
        }
        const char c = advance();
        switch (c) {
            case 't': return "\t";
            case 'b': return "\b";
            case 'n': return "\n";
            case 'r': return "\r";
            case 'f': return "\f";
            case '"': return "\"";
            case '\'': return "'";
            case '\\': return "\\";
            case 'u': return unicode_escape(4);
            case 'U': return unicode_escape(8);
            default: fail(std::string("invalid escape '\\") + c + "'");
        }
    }

    std::string unicode_escape(int digits) {
        std::string hex;
        for (int i = 0; i < digits; ++i) {
            if (at_end() || !std::isxdigit(static_cast<unsigned char>(peek()))) {
                fail("invalid unicode escape");
            }
            hex += advance();
        }
        std::string out;
        text::append_utf8(out, static_cast<char32_t>(std::stoul(hex, nullptr, 16)));
        return out;
    }

    void triples(TripleStore& store) {
        const Iri subject = iri(store, false);
        while (true) {
            const Iri predicate = iri(store, true);
            while (true) {
                store.add(subject, predicate, object(store));
                skip_ws();
                if (peek() != ',') {
                    break;
                }
                advance();
            }
            skip_ws();
            if (peek() != ';') {
                break;
            }
            // Repeated or trailing ';' are allowed.
            while (peek() == ';') {
                advance();
                skip_ws();
            }
            if (peek() == '.' || at_end()) {
                break;
            }
        }
    }

    std::string_view in_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t column_ = 1;
};

inline std::string escape_literal(std::string_view s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace detail

inline TripleStore parse_turtle(std::string_view document) {
    return detail::TurtleReader(document).run();
}

inline std::string render_term(const Term& term, const PrefixMap& prefixes) {
    if (const auto* iri = std::get_if<Iri>(&term)) {
        if (*iri == vocab::type()) {
            return "a";
        }
        return prefixes.compact(*iri);
    }
    const auto& lit = std::get<Literal>(term);
    std::string out = "\"" + detail::escape_literal(lit.lexical) + "\"";
    if (lit.lang) {
        out += "@" + *lit.lang;
    }
    return out;
}

/// Writes the store grouped by subject (first-appearance order) with `;` predicate lists.
inline std::string write_turtle(const TripleStore& store) {
    std::ostringstream out;
    for (const auto& [prefix, ns] : store.prefixes().entries()) {
        out << "@prefix " << prefix << ": <" << ns << "> .\n";
    }
    if (!store.prefixes().entries().empty() && !store.empty()) {
        out << '\n';
    }
    std::vector<Iri> order;
    std::map<std::string, std::vector<const Triple*>> groups;
    for (const auto& t : store.triples()) {
        auto& group = groups[t.subject.value];
        if (group.empty()) {
            order.push_back(t.subject);
        }
        group.push_back(&t);
    }
    const auto& prefixes = store.prefixes();
    for (const auto& subject : order) {
        const auto& group = groups[subject.value];
        out << prefixes.compact(subject);
        for (std::size_t i = 0; i < group.size(); ++i) {
            const auto& t = *group[i];
            out << (i == 0 ? " " : " ;\n    ");
            out << (t.predicate == vocab::type() ? std::string("a") : prefixes.compact(t.predicate)) << ' '
                << render_term(t.object, prefixes);
        }
        out << " .\n";
    }
    return out.str();
}

}  // namespace rhetorik::onto
