#pragma once

// Rewrites an ontology in its original form (compound construction relations,
// inline definitions and examples, figures as individuals) into the fine-grained
// form used by search and retrieval.

#include <algorithm>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rhetorik/ontology/triple_store.hpp"
#include "rhetorik/ontology/turtle.hpp"
#include "rhetorik/ontology/vocabulary.hpp"
#include "rhetorik/text/unicode.hpp"

namespace rhetorik::onto {

/// One (predicate, object) pair of a compound-relation bundle. An empty object
/// stands for the original triple's object.
struct BundleEntry {
    Iri predicate;
    std::optional<Iri> object;
};

struct CompoundRule {
    Iri compound;
    std::vector<BundleEntry> bundle;
};

inline constexpr std::string_view kDefaultCompoundPattern = R"(^is[A-Z]\w*Element\w*$)";

struct ReificationConfig {
    std::vector<CompoundRule> rules;
    /// Local names matching this are compound relations; unmapped ones get reported.
    std::string compound_pattern{kDefaultCompoundPattern};
    /// (child, parent) figure specializations emitted as subclass links.
    std::vector<std::pair<Iri, Iri>> specializations;

    [[nodiscard]] const CompoundRule* find(const Iri& predicate) const {
        for (const auto& rule : rules) {
            if (rule.compound == predicate) {
                return &rule;
            }
        }
        return nullptr;
    }
};

class MappingError : public std::runtime_error {
public:
    MappingError(const std::string& message, std::size_t line)
        : std::runtime_error("mapping line " + std::to_string(line) + ": " + message), line_(line) {}
    [[nodiscard]] std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Parses the mapping file:
///   compound_predicate -> predicate=object; predicate=$OBJECT
///   @prefix p: <ns>
///   @pattern <regex>
///   @subclass child parent
/// Names are prefixed names or <absolute IRIs>, resolved against `prefixes`
/// extended by the file's own @prefix lines.
inline ReificationConfig parse_mapping(std::string_view document, PrefixMap prefixes) {
    ReificationConfig config;
    std::istringstream in{std::string(document)};
    std::string raw;
    std::size_t line_no = 0;
    auto resolve = [&](std::string_view name) {
        try {
            return prefixes.expand(text::trim(name));
        } catch (const std::invalid_argument& e) {
            throw MappingError(e.what(), line_no);
        }
    };
    while (std::getline(in, raw)) {
        ++line_no;
        auto line = text::trim(raw);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        if (line.rfind("@prefix", 0) == 0) {
            auto rest = text::trim(line.substr(7));
            const auto colon = rest.find(':');
            const auto open = rest.find('<');
            const auto close = rest.rfind('>');
            if (colon == std::string::npos || open == std::string::npos || close == std::string::npos ||
                close < open) {
                throw MappingError("malformed @prefix", line_no);
            }
            prefixes.declare(text::trim(rest.substr(0, colon)), rest.substr(open + 1, close - open - 1));
            continue;
        }
        if (line.rfind("@pattern", 0) == 0) {
            config.compound_pattern = text::trim(line.substr(8));
            try {
                std::regex check(config.compound_pattern);
            } catch (const std::regex_error&) {
                throw MappingError("invalid @pattern regex", line_no);
            }
            continue;
        }
        if (line.rfind("@subclass", 0) == 0) {
            auto names = text::whitespace_tokens(line.substr(9));
            if (names.size() != 2) {
                throw MappingError("@subclass needs exactly two names", line_no);
            }
            config.specializations.emplace_back(resolve(names[0]), resolve(names[1]));
            continue;
        }
        const auto arrow = line.find("->");
        if (arrow == std::string::npos) {
            throw MappingError("expected '->'", line_no);
        }
        CompoundRule rule{resolve(line.substr(0, arrow)), {}};
        std::string_view rhs = std::string_view(line).substr(arrow + 2);
        std::size_t start = 0;
        while (start <= rhs.size()) {
            auto end = rhs.find(';', start);
            if (end == std::string_view::npos) {
                end = rhs.size();
            }
            auto item = text::trim(rhs.substr(start, end - start));
            start = end + 1;
            if (item.empty()) {
                continue;
            }
            const auto eq = item.find('=');
            if (eq == std::string::npos) {
                throw MappingError("expected predicate=object in '" + item + "'", line_no);
            }
            BundleEntry entry{resolve(item.substr(0, eq)), std::nullopt};
            const auto object = text::trim(item.substr(eq + 1));
            if (object != "$OBJECT") {
                entry.object = resolve(object);
            }
            rule.bundle.push_back(std::move(entry));
        }
        if (rule.bundle.empty()) {
            throw MappingError("empty bundle", line_no);
        }
        if (config.find(rule.compound) != nullptr) {
            throw MappingError("duplicate mapping for " + rule.compound.value, line_no);
        }
        config.rules.push_back(std::move(rule));
    }
    return config;
}

struct ReificationReport {
    std::vector<Triple> unmapped;
    std::size_t compound_rewritten = 0;
    std::size_t definitions_created = 0;
    std::size_t examples_created = 0;
    std::size_t examples_reused = 0;
    std::size_t figures_promoted = 0;

    [[nodiscard]] std::string render(const PrefixMap& prefixes) const {
        std::ostringstream out;
        out << "# reification report\n"
            << "# compound relations rewritten: " << compound_rewritten << '\n'
            << "# definitions created: " << definitions_created << '\n'
            << "# examples created: " << examples_created << " (reused: " << examples_reused << ")\n"
            << "# figures promoted to classes: " << figures_promoted << '\n'
            << "# unmapped compound relations: " << unmapped.size() << '\n';
        for (const auto& t : unmapped) {
            out << prefixes.compact(t.subject) << ' ' << prefixes.compact(t.predicate) << ' '
                << render_term(t.object, prefixes) << '\n';
        }
        return out.str();
    }
};

struct ReificationResult {
    TripleStore store;
    ReificationReport report;
};

/// Splits a trailing "(Author)" or "(Author, Source)" attribution off a literal.
struct Attribution {
    std::string text;
    std::optional<std::string> author;
    std::optional<std::string> source;
};

inline Attribution split_attribution(std::string_view lexical, bool with_source) {
    Attribution out{text::trim(lexical), std::nullopt, std::nullopt};
    const std::string& s = out.text;
    if (s.empty() || s.back() != ')') {
        return out;
    }
    int depth = 0;
    std::size_t open = std::string::npos;
    for (std::size_t i = s.size(); i-- > 0;) {
        if (s[i] == ')') {
            ++depth;
        } else if (s[i] == '(') {
            if (--depth == 0) {
                open = i;
                break;
            }
        }
    }
    if (open == std::string::npos || open == 0 || !std::isspace(static_cast<unsigned char>(s[open - 1]))) {
        return out;
    }
    auto body = text::trim(std::string_view(s).substr(open + 1, s.size() - open - 2));
    auto head = text::trim(std::string_view(s).substr(0, open));
    if (body.empty() || head.empty()) {
        return out;
    }
    if (with_source) {
        const auto comma = body.find(',');
        if (comma != std::string::npos) {
            auto author = text::trim(std::string_view(body).substr(0, comma));
            auto source = text::trim(std::string_view(body).substr(comma + 1));
            if (!author.empty()) {
                out.author = std::move(author);
            }
            if (!source.empty()) {
                out.source = std::move(source);
            }
            out.text = std::move(head);
            return out;
        }
    }
    out.author = std::move(body);
    out.text = std::move(head);
    return out;
}

/// Subjects typed as figures (`a :RhetoricalFigure`) or declared as figure
/// classes (`rdfs:subClassOf :RhetoricalFigure`).
inline std::set<Iri> figure_iris(const TripleStore& store, const FigureVocabulary& v) {
    std::set<Iri> out;
    const Term root = v.rhetorical_figure();
    for (const auto& s : store.subjects(vocab::type(), root)) {
        out.insert(s);
    }
    for (const auto& s : store.subjects(vocab::sub_class_of(), root)) {
        out.insert(s);
    }
    return out;
}

namespace detail {

inline std::optional<std::size_t> numbered_suffix(std::string_view local, std::string_view stem) {
    if (local.size() <= stem.size() || local.substr(0, stem.size()) != stem) {
        return std::nullopt;
    }
    auto digits = local.substr(stem.size());
    if (!std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(std::stoull(std::string(digits)));
}

struct ExampleKey {
    std::string text;
    std::optional<std::string> author;
    std::optional<std::string> source;
    auto operator<=>(const ExampleKey&) const = default;
};

}  // namespace detail

inline ReificationResult reify(const TripleStore& input, const ReificationConfig& config) {
    const auto v = FigureVocabulary::for_store(input);
    const auto figures = figure_iris(input, v);
    const std::regex compound_re(config.compound_pattern);

    ReificationResult result;
    auto& out = result.store;
    auto& report = result.report;
    for (const auto& [p, ns] : input.prefixes().entries()) {
        out.prefixes().declare(p, ns);
    }

    std::unordered_set<std::string> taken;
    for (const auto& t : input.triples()) {
        taken.insert(t.subject.value);
        if (const auto* o = std::get_if<Iri>(&t.object)) {
            taken.insert(o->value);
        }
    }

    // Existing example individuals, so identical inline examples link to them.
    std::map<detail::ExampleKey, Iri> examples_by_content;
    std::size_t next_example = 1;
    for (const auto& t : input.triples()) {
        if (t.predicate != v.has_example()) {
            continue;
        }
        const auto* id = std::get_if<Iri>(&t.object);
        if (id == nullptr) {
            continue;
        }
        for (const auto& text_term : input.objects(*id, v.is_example())) {
            if (const auto* lit = std::get_if<Literal>(&text_term)) {
                detail::ExampleKey key{lit->lexical, std::nullopt, std::nullopt};
                for (const auto& a : input.objects(*id, v.has_author())) {
                    if (const auto* al = std::get_if<Literal>(&a)) {
                        key.author = al->lexical;
                    }
                }
                for (const auto& s : input.objects(*id, v.has_source())) {
                    if (const auto* sl = std::get_if<Literal>(&s)) {
                        key.source = sl->lexical;
                    }
                }
                examples_by_content.emplace(std::move(key), *id);
            }
        }
    }

    auto fresh_example = [&]() {
        while (taken.contains(v.ns + "Example" + std::to_string(next_example))) {
            ++next_example;
        }
        Iri id = v.term("Example" + std::to_string(next_example++));
        taken.insert(id.value);
        return id;
    };
    std::map<Iri, std::size_t> next_definition;
    auto fresh_definition = [&](const Iri& figure) {
        auto& n = next_definition[figure];
        const std::string stem = "Definition" + local_name(figure);
        do {
            ++n;
        } while (taken.contains(v.ns + stem + std::to_string(n)));
        Iri id = v.term(stem + std::to_string(n));
        taken.insert(id.value);
        return id;
    };

    for (const auto& t : input.triples()) {
        if (const auto* rule = config.find(t.predicate)) {
            for (const auto& entry : rule->bundle) {
                out.add(t.subject, entry.predicate, entry.object ? Term(*entry.object) : t.object);
            }
            ++report.compound_rewritten;
            continue;
        }
        if (std::regex_match(local_name(t.predicate), compound_re)) {
            report.unmapped.push_back(t);
            out.add(t);
            continue;
        }
        const bool is_figure = figures.contains(t.subject);
        if (is_figure && t.predicate == vocab::type() && t.object == Term(v.rhetorical_figure())) {
            out.add(t.subject, vocab::type(), vocab::owl_class());
            out.add(t.subject, vocab::sub_class_of(), v.rhetorical_figure());
            ++report.figures_promoted;
            continue;
        }
        const auto* lit = std::get_if<Literal>(&t.object);
        if (is_figure && lit != nullptr && t.predicate == vocab::comment()) {
            auto parts = split_attribution(lit->lexical, false);
            const Iri id = fresh_definition(t.subject);
            out.add(t.subject, v.has_definition(), id);
            if (parts.author) {
                out.add(id, v.has_author(), Literal{*parts.author, std::nullopt});
            }
            out.add(id, v.is_definition(), Literal{parts.text, lit->lang});
            ++report.definitions_created;
            continue;
        }
        if (is_figure && lit != nullptr && t.predicate == v.is_example()) {
            auto parts = split_attribution(lit->lexical, true);
            detail::ExampleKey key{parts.text, parts.author, parts.source};
            auto it = examples_by_content.find(key);
            if (it != examples_by_content.end()) {
                out.add(t.subject, v.has_example(), it->second);
                ++report.examples_reused;
                continue;
            }
            const Iri id = fresh_example();
            examples_by_content.emplace(std::move(key), id);
            out.add(t.subject, v.has_example(), id);
            if (parts.author) {
                out.add(id, v.has_author(), Literal{*parts.author, std::nullopt});
            }
            if (parts.source) {
                out.add(id, v.has_source(), Literal{*parts.source, std::nullopt});
            }
            out.add(id, v.is_example(), Literal{parts.text, lit->lang});
            ++report.examples_created;
            continue;
        }
        out.add(t);
    }

    for (const auto& [child, parent] : config.specializations) {
        if (figures.contains(child) && figures.contains(parent) && child != parent) {
            out.add(child, vocab::sub_class_of(), parent);
        }
    }
    return result;
}

}  // namespace rhetorik::onto
