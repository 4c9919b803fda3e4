#pragma once

#include <string>
#include <string_view>

#include "rhetorik/ontology/triple_store.hpp"

namespace rhetorik::onto {

inline constexpr std::string_view kDefaultFigureNs = "http://rhetorik.example.org/grhoot#";

/// IRIs of the figure-model terms, all in the ontology's default namespace.
struct FigureVocabulary {
    std::string ns;

    static FigureVocabulary for_store(const TripleStore& store) {
        return FigureVocabulary{store.prefixes().find("").value_or(std::string(kDefaultFigureNs))};
    }

    [[nodiscard]] Iri term(std::string_view local) const { return Iri(ns + std::string(local)); }

    [[nodiscard]] Iri rhetorical_figure() const { return term("RhetoricalFigure"); }
    [[nodiscard]] Iri has_operation() const { return term("hasOperation"); }
    [[nodiscard]] Iri affected_element() const { return term("affectedElement"); }
    [[nodiscard]] Iri has_operation_form() const { return term("hasOperationForm"); }
    [[nodiscard]] Iri is_in_position() const { return term("isInPosition"); }
    [[nodiscard]] Iri is_in_area() const { return term("isInArea"); }
    [[nodiscard]] Iri has_definition() const { return term("hasDefinition"); }
    [[nodiscard]] Iri is_definition() const { return term("isDefinition"); }
    [[nodiscard]] Iri has_example() const { return term("hasExample"); }
    [[nodiscard]] Iri is_example() const { return term("isExample"); }
    [[nodiscard]] Iri has_author() const { return term("hasAuthor"); }
    [[nodiscard]] Iri has_source() const { return term("hasSource"); }
    [[nodiscard]] Iri repetition() const { return term("Repetition"); }
    [[nodiscard]] Iri same_form() const { return term("SameForm"); }
};

}  // namespace rhetorik::onto
