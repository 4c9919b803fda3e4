#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "rhetorik/evaluation/records.hpp"
#include "rhetorik/ontology/figures.hpp"
#include "rhetorik/ontology/query.hpp"
#include "rhetorik/rag/serialize.hpp"

namespace rhetorik::eval {

enum class CqProperty { definition, example, operation, affected_element, operational_form, position, area };

inline constexpr std::array<CqProperty, 7> kCqProperties = {
    CqProperty::definition,       CqProperty::example,  CqProperty::operation, CqProperty::affected_element,
    CqProperty::operational_form, CqProperty::position, CqProperty::area};

/// German question template per property; {figure} is the figure's local name.
inline std::string_view cq_template(CqProperty p) {
    switch (p) {
        case CqProperty::definition: return "Was ist die Definition der rhetorischen Figur {figure}?";
        case CqProperty::example: return "Was ist ein Beispiel f\xC3\xBCr die rhetorische Figur {figure}?";
        case CqProperty::operation: return "Was ist die Operation der rhetorischen Figur {figure}?";
        case CqProperty::affected_element: return "Was ist das betroffene Element der rhetorischen Figur {figure}?";
        case CqProperty::operational_form: return "Was ist die Form der Operation der rhetorischen Figur {figure}?";
        case CqProperty::position: return "Was ist die Position der rhetorischen Figur {figure}?";
        case CqProperty::area: return "Was ist der Bereich der rhetorischen Figur {figure}?";
    }
    return "";
}

/// Conjunctive pattern answering the property for one figure; the answer is bound to ?value.
inline onto::QueryPattern cq_pattern(const onto::FigureVocabulary& v, const onto::Iri& figure, CqProperty p) {
    using onto::Var;
    switch (p) {
        case CqProperty::definition:
            return {{{figure, v.has_definition(), Var{"node"}}, {Var{"node"}, v.is_definition(), Var{"value"}}}};
        case CqProperty::example:
            return {{{figure, v.has_example(), Var{"node"}}, {Var{"node"}, v.is_example(), Var{"value"}}}};
        case CqProperty::operation: return {{{figure, v.has_operation(), Var{"value"}}}};
        case CqProperty::affected_element: return {{{figure, v.affected_element(), Var{"value"}}}};
        case CqProperty::operational_form: return {{{figure, v.has_operation_form(), Var{"value"}}}};
        case CqProperty::position: return {{{figure, v.is_in_position(), Var{"value"}}}};
        case CqProperty::area: return {{{figure, v.is_in_area(), Var{"value"}}}};
    }
    return {};
}

/// One question per figure and available property; ground truth comes from the query engine.
inline std::vector<GroundTruthRecord> generate_template_cqs(const onto::TripleStore& store,
                                                            const rag::SerializationTemplates& templates = {}) {
    const auto v = onto::FigureVocabulary::for_store(store);
    std::vector<GroundTruthRecord> out;
    for (const auto& figure : onto::all_figures(store)) {
        const auto block = rag::serialize_figure(store, figure, templates);
        for (auto property : kCqProperties) {
            std::vector<std::string> values;
            for (const auto& binding : onto::query(store, cq_pattern(v, figure, property))) {
                const auto& value = binding.at("value");
                if (const auto* iri = std::get_if<onto::Iri>(&value)) {
                    values.push_back(onto::display_label(store, *iri));
                } else {
                    values.push_back(std::get<onto::Literal>(value).lexical);
                }
            }
            if (values.empty()) {
                continue;
            }
            const bool texts = property == CqProperty::definition || property == CqProperty::example;
            out.push_back({rag::fill(cq_template(property), {{"figure", onto::local_name(figure)}}),
                           text::join(values, texts ? " " : ", "), {block}});
        }
    }
    return out;
}

}  // namespace rhetorik::eval
