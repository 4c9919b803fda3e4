#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rhetorik/ontology/figures.hpp"

namespace rhetorik::rag {

/// Sentence templates for flattening the ontology. Placeholders: {figure}, {value}, {predicate},
/// {text}, {author}, {source}.
struct SerializationTemplates {
    std::string heading = "Rhetorische Figur: {figure}.";
    std::string other_names = "Weitere Bezeichnungen von {figure}: {value}.";
    std::string superclass = "{figure} ist eine Unterart von {value}.";
    std::string operation = "Die Operation der Figur {figure} ist {value}.";
    std::string affected_element = "Das betroffene Element der Figur {figure} ist {value}.";
    std::string operational_form = "Die Form der Operation bei {figure} ist {value}.";
    std::string position = "Die Figur {figure} steht an der Position {value}.";
    std::string area = "Der Bereich der Figur {figure} ist {value}.";
    std::string other_relation = "{figure} {predicate} {value}.";
    std::string definition = "Definition von {figure}: {text}";
    std::string definition_author = "Autor der Definition: {author}.";
    std::string example = "Beispiel f\xC3\xBCr {figure}: {text}";
    std::string example_author = "Autor des Beispiels: {author}.";
    std::string example_source = "Quelle des Beispiels: {source}.";

    [[nodiscard]] const std::string& for_dimension(onto::Dimension d) const {
        switch (d) {
            case onto::Dimension::operation: return operation;
            case onto::Dimension::affected_element: return affected_element;
            case onto::Dimension::operational_form: return operational_form;
            case onto::Dimension::position: return position;
            case onto::Dimension::area: return area;
        }
        return other_relation;
    }
};

#define RHETORIK_TEMPLATE_FIELDS(X)                                                                          \
    X(heading) X(other_names) X(superclass) X(operation) X(affected_element) X(operational_form) X(position) X(area)             \
    X(other_relation) X(definition) X(definition_author) X(example) X(example_author) X(example_source)

inline void to_json(nlohmann::json& j, const SerializationTemplates& t) {
    j = nlohmann::json::object();
#define RHETORIK_PUT(name) j[#name] = t.name;
    RHETORIK_TEMPLATE_FIELDS(RHETORIK_PUT)
#undef RHETORIK_PUT
}

/// Missing keys keep their defaults.
inline void from_json(const nlohmann::json& j, SerializationTemplates& t) {
#define RHETORIK_GET(name) t.name = j.value(#name, t.name);
    RHETORIK_TEMPLATE_FIELDS(RHETORIK_GET)
#undef RHETORIK_GET
}

#undef RHETORIK_TEMPLATE_FIELDS

inline std::string fill(std::string_view pattern, const std::map<std::string, std::string>& values) {
    std::string out;
    std::size_t i = 0;
    while (i < pattern.size()) {
        if (pattern[i] == '{') {
            const auto close = pattern.find('}', i);
            if (close != std::string_view::npos) {
                const auto it = values.find(std::string(pattern.substr(i + 1, close - i - 1)));
                if (it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += pattern[i++];
    }
    return out;
}

namespace detail {

inline std::string object_text(const onto::TripleStore& store, const onto::Term& term) {
    if (const auto* iri = std::get_if<onto::Iri>(&term)) {
        return onto::display_label(store, *iri);
    }
    return std::get<onto::Literal>(term).lexical;
}

inline std::vector<std::string> sorted_labels(const onto::TripleStore& store, const std::vector<onto::Term>& terms) {
    std::vector<std::string> labels;
    for (const auto& t : terms) {
        labels.push_back(object_text(store, t));
    }
    std::sort(labels.begin(), labels.end());
    return labels;
}

/// Labels in other languages plus the local name, minus the display label; sorted, deduplicated.
inline std::vector<std::string> other_names(const onto::TripleStore& store, const onto::Iri& figure,
                                            const std::string& display) {
    std::set<std::string> names{onto::local_name(figure)};
    for (const auto& o : store.objects(figure, onto::vocab::label())) {
        if (const auto* lit = std::get_if<onto::Literal>(&o)) {
            names.insert(lit->lexical);
        }
    }
    std::vector<std::string> out;
    const auto folded = text::fold_case(display);
    for (const auto& n : names) {
        if (text::fold_case(n) != folded &&
            std::none_of(out.begin(), out.end(), [&](const std::string& x) { return text::fold_case(x) == text::fold_case(n); })) {
            out.push_back(n);
        }
    }
    return out;
}

}  // namespace detail

/// One block per figure (IRI order), blocks separated by a blank line.
inline std::string serialize_figure(const onto::TripleStore& store, const onto::Iri& figure,
                                    const SerializationTemplates& t = {}) {
    const auto v = onto::FigureVocabulary::for_store(store);
    const auto info = onto::figure_info(store, figure);
    const std::string& name = info.figure.label;
    std::vector<std::string> lines;
    lines.push_back(fill(t.heading, {{"figure", name}}));
    if (const auto names = detail::other_names(store, figure, name); !names.empty()) {
        lines.push_back(fill(t.other_names, {{"figure", name}, {"value", text::join(names, ", ")}}));
    }
    for (const auto& parent : info.figure.parents) {
        lines.push_back(fill(t.superclass, {{"figure", name}, {"value", onto::display_label(store, parent)}}));
    }
    for (auto d : onto::kDimensions) {
        for (const auto& value : detail::sorted_labels(store, store.objects(figure, onto::dimension_predicate(v, d)))) {
            lines.push_back(fill(t.for_dimension(d), {{"figure", name}, {"value", value}}));
        }
    }

    std::vector<onto::Iri> skip = {onto::vocab::type(), onto::vocab::sub_class_of(), onto::vocab::label(),
                                   onto::vocab::comment(), v.has_definition(), v.has_example()};
    for (auto d : onto::kDimensions) {
        skip.push_back(onto::dimension_predicate(v, d));
    }
    std::map<onto::Iri, std::vector<onto::Term>> others;
    for (auto pos : store.with_subject(figure)) {
        const auto& triple = store.at(pos);
        if (std::find(skip.begin(), skip.end(), triple.predicate) == skip.end()) {
            others[triple.predicate].push_back(triple.object);
        }
    }
    for (const auto& [predicate, objects] : others) {
        for (const auto& value : detail::sorted_labels(store, objects)) {
            lines.push_back(fill(t.other_relation,
                                 {{"figure", name}, {"predicate", onto::local_name(predicate)}, {"value", value}}));
        }
    }

    for (const auto& def : info.definitions) {
        std::string line = fill(t.definition, {{"figure", name}, {"text", def.text.lexical}});
        if (def.author) {
            line += " " + fill(t.definition_author, {{"author", def.author->lexical}});
        }
        lines.push_back(std::move(line));
    }
    for (const auto& ex : info.examples) {
        std::string line = fill(t.example, {{"figure", name}, {"text", ex.text.lexical}});
        if (ex.author) {
            line += " " + fill(t.example_author, {{"author", ex.author->lexical}});
        }
        if (ex.source) {
            line += " " + fill(t.example_source, {{"source", ex.source->lexical}});
        }
        lines.push_back(std::move(line));
    }
    return text::join(lines, "\n");
}

inline std::string serialize_ontology(const onto::TripleStore& store, const SerializationTemplates& t = {}) {
    std::vector<std::string> blocks;
    for (const auto& figure : onto::all_figures(store)) {
        blocks.push_back(serialize_figure(store, figure, t));
    }
    return text::join(blocks, "\n\n");
}

}  // namespace rhetorik::rag
