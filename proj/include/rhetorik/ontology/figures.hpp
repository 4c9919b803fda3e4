#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rhetorik/ontology/query.hpp"
#include "rhetorik/ontology/reify.hpp"
#include "rhetorik/ontology/vocabulary.hpp"

namespace rhetorik::onto {

enum class Dimension { operation, affected_element, operational_form, position, area };

inline constexpr std::array<Dimension, 5> kDimensions = {
    Dimension::operation, Dimension::affected_element, Dimension::operational_form,
    Dimension::position, Dimension::area};

inline std::string_view dimension_name(Dimension d) {
    switch (d) {
        case Dimension::operation: return "operation";
        case Dimension::affected_element: return "affected_element";
        case Dimension::operational_form: return "operational_form";
        case Dimension::position: return "position";
        case Dimension::area: return "area";
    }
    return "";
}

inline std::optional<Dimension> parse_dimension(std::string_view name) {
    for (auto d : kDimensions) {
        if (dimension_name(d) == name) {
            return d;
        }
    }
    return std::nullopt;
}

inline Iri dimension_predicate(const FigureVocabulary& v, Dimension d) {
    switch (d) {
        case Dimension::operation: return v.has_operation();
        case Dimension::affected_element: return v.affected_element();
        case Dimension::operational_form: return v.has_operation_form();
        case Dimension::position: return v.is_in_position();
        case Dimension::area: return v.is_in_area();
    }
    throw std::logic_error("unknown dimension");
}

/// "No idea" dropdown entry: the dimension is left unconstrained.
struct NoIdea {
    bool operator==(const NoIdea&) const = default;
};

using PropertyValue = std::variant<NoIdea, Iri>;

struct PropertySelection {
    PropertyValue operation;
    PropertyValue affected_element;
    PropertyValue operational_form;
    PropertyValue position;
    PropertyValue area;

    PropertyValue& operator[](Dimension d) {
        switch (d) {
            case Dimension::operation: return operation;
            case Dimension::affected_element: return affected_element;
            case Dimension::operational_form: return operational_form;
            case Dimension::position: return position;
            case Dimension::area: return area;
        }
        throw std::logic_error("unknown dimension");
    }
    const PropertyValue& operator[](Dimension d) const {
        return const_cast<PropertySelection&>(*this)[d];
    }
};

struct FigureClass {
    Iri iri;
    std::string label;
    std::vector<Iri> parents;

    bool operator==(const FigureClass&) const = default;
};

struct Definition {
    Iri id;
    Literal text;
    std::optional<Literal> author;
};

struct FigureExample {
    Iri id;
    Literal text;
    std::optional<Literal> author;
    std::optional<Literal> source;
};

struct FigureInfo {
    FigureClass figure;
    std::vector<Definition> definitions;
    std::vector<FigureExample> examples;
};

class UnknownFigure : public std::runtime_error {
public:
    explicit UnknownFigure(const std::string& iri) : std::runtime_error("unknown figure: " + iri) {}
};

class HierarchyCycle : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::optional<Literal> first_literal(const TripleStore& store, const Iri& s, const Iri& p) {
    std::optional<Literal> out;
    for (const auto& o : store.objects(s, p)) {
        if (const auto* lit = std::get_if<Literal>(&o)) {
            if (!out || *lit < *out) {
                out = *lit;
            }
        }
    }
    return out;
}

}  // namespace detail

/// rdfs:label preferring German, then untagged, then any; falls back to the local name.
inline std::string display_label(const TripleStore& store, const Iri& iri) {
    std::optional<std::string> untagged;
    std::optional<std::string> other;
    for (const auto& o : store.objects(iri, vocab::label())) {
        const auto* lit = std::get_if<Literal>(&o);
        if (lit == nullptr) {
            continue;
        }
        if (lit->lang && (*lit->lang == "de" || lit->lang->rfind("de-", 0) == 0)) {
            return lit->lexical;
        }
        if (!lit->lang && !untagged) {
            untagged = lit->lexical;
        } else if (!other) {
            other = lit->lexical;
        }
    }
    if (untagged) {
        return *untagged;
    }
    return other.value_or(local_name(iri));
}

/// Figure classes of a reified store, sorted by IRI.
inline std::vector<Iri> all_figures(const TripleStore& store) {
    const auto v = FigureVocabulary::for_store(store);
    auto set = figure_iris(store, v);
    return {set.begin(), set.end()};
}

inline bool is_figure(const TripleStore& store, const Iri& iri) {
    const auto v = FigureVocabulary::for_store(store);
    return store.contains(Triple{iri, vocab::sub_class_of(), v.rhetorical_figure()}) ||
           store.contains(Triple{iri, vocab::type(), v.rhetorical_figure()});
}

/// Superclasses of `iri` that are themselves figures, sorted.
inline std::vector<Iri> figure_parents(const TripleStore& store, const Iri& iri) {
    const auto v = FigureVocabulary::for_store(store);
    std::vector<Iri> parents;
    for (const auto& o : store.objects(iri, vocab::sub_class_of())) {
        if (const auto* p = std::get_if<Iri>(&o); p != nullptr && *p != v.rhetorical_figure() && *p != iri &&
                                                   is_figure(store, *p)) {
            parents.push_back(*p);
        }
    }
    std::sort(parents.begin(), parents.end());
    return parents;
}

inline FigureClass figure_class(const TripleStore& store, const Iri& iri) {
    return FigureClass{iri, display_label(store, iri), figure_parents(store, iri)};
}

/// Throws HierarchyCycle when the subclass graph among figures has a cycle.
inline void check_hierarchy_acyclic(const TripleStore& store) {
    const auto figures = all_figures(store);
    std::map<Iri, int> state;  // 0 unvisited, 1 on stack, 2 done
    std::vector<Iri> path;
    auto visit = [&](auto&& self, const Iri& node) -> void {
        state[node] = 1;
        path.push_back(node);
        for (const auto& o : store.objects(node, vocab::sub_class_of())) {
            const auto* next = std::get_if<Iri>(&o);
            if (next == nullptr) {
                continue;
            }
            if (*next == node) {
                throw HierarchyCycle("figure is its own superclass: " + node.value);
            }
            const int s = state[*next];
            if (s == 1) {
                throw HierarchyCycle("subclass cycle through " + next->value);
            }
            if (s == 0) {
                self(self, *next);
            }
        }
        path.pop_back();
        state[node] = 2;
    };
    for (const auto& f : figures) {
        if (state[f] == 0) {
            visit(visit, f);
        }
    }
}

inline QueryPattern selection_pattern(const TripleStore& store, const PropertySelection& selection) {
    const auto v = FigureVocabulary::for_store(store);
    QueryPattern pattern;
    pattern.conjuncts.push_back({Var{"figure"}, vocab::sub_class_of(), v.rhetorical_figure()});
    for (auto d : kDimensions) {
        if (const auto* value = std::get_if<Iri>(&selection[d])) {
            pattern.conjuncts.push_back({Var{"figure"}, dimension_predicate(v, d), *value});
        }
    }
    return pattern;
}

/// Exact-match figure search: one conjunct per concrete dimension; no subclass inference.
inline std::vector<FigureClass> search_figures(const TripleStore& store, const PropertySelection& selection) {
    std::vector<FigureClass> out;
    for (const auto& binding : query(store, selection_pattern(store, selection))) {
        out.push_back(figure_class(store, std::get<Iri>(binding.at("figure"))));
    }
    return out;
}

inline FigureInfo figure_info(const TripleStore& store, const Iri& figure) {
    if (!is_figure(store, figure)) {
        throw UnknownFigure(figure.value);
    }
    const auto v = FigureVocabulary::for_store(store);
    FigureInfo info{figure_class(store, figure), {}, {}};

    std::vector<Iri> definition_ids;
    for (const auto& o : store.objects(figure, v.has_definition())) {
        if (const auto* id = std::get_if<Iri>(&o)) {
            definition_ids.push_back(*id);
        }
    }
    std::sort(definition_ids.begin(), definition_ids.end());
    for (const auto& id : definition_ids) {
        auto text = detail::first_literal(store, id, v.is_definition());
        if (!text) {
            continue;
        }
        info.definitions.push_back(Definition{id, *text, detail::first_literal(store, id, v.has_author())});
    }

    std::vector<Iri> example_ids;
    for (const auto& o : store.objects(figure, v.has_example())) {
        if (const auto* id = std::get_if<Iri>(&o)) {
            example_ids.push_back(*id);
        }
    }
    std::sort(example_ids.begin(), example_ids.end());
    for (const auto& id : example_ids) {
        auto text = detail::first_literal(store, id, v.is_example());
        if (!text) {
            continue;
        }
        info.examples.push_back(FigureExample{id, *text, detail::first_literal(store, id, v.has_author()),
                                              detail::first_literal(store, id, v.has_source())});
    }
    return info;
}

/// Distinct IRI objects of the dimension's predicate, sorted.
inline std::vector<Iri> property_vocabulary(const TripleStore& store, Dimension dimension) {
    const auto v = FigureVocabulary::for_store(store);
    std::set<Iri> values;
    for (auto pos : store.with_predicate(dimension_predicate(v, dimension))) {
        if (const auto* o = std::get_if<Iri>(&store.at(pos).object)) {
            values.insert(*o);
        }
    }
    return {values.begin(), values.end()};
}

/// Figures whose reified triples mark them as perfect lexical repetition
/// (`hasOperation Repetition` and `hasOperationForm SameForm`).
inline std::vector<Iri> lexical_repetition_figures(const TripleStore& store) {
    const auto v = FigureVocabulary::for_store(store);
    PropertySelection selection;
    selection.operation = v.repetition();
    selection.operational_form = v.same_form();
    std::vector<Iri> out;
    for (const auto& f : search_figures(store, selection)) {
        out.push_back(f.iri);
    }
    return out;
}

/// Resolves a figure by prefixed name, absolute IRI, local name or label (case-insensitive).
inline std::optional<Iri> find_figure(const TripleStore& store, std::string_view name) {
    try {
        Iri iri = store.prefixes().expand(name);
        if (is_figure(store, iri)) {
            return iri;
        }
    } catch (const std::invalid_argument&) {
    }
    const auto folded = text::fold_case(name);
    for (const auto& f : all_figures(store)) {
        if (text::fold_case(local_name(f)) == folded || text::fold_case(display_label(store, f)) == folded) {
            return f;
        }
    }
    return std::nullopt;
}

}  // namespace rhetorik::onto
