#pragma once

#include <string_view>

namespace rhetorik::fixtures {

inline constexpr std::string_view kPrefixes = R"ttl(@prefix : <http://rhetorik.example.org/grhoot#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
)ttl";

inline constexpr std::string_view kRepetitionMapping = R"ttl(
:isRepeatableElementOfSameForm -> :hasOperation=:Repetition; :affectedElement=$OBJECT; :hasOperationForm=:SameForm
)ttl";

// Construction relation, original and reified form.
inline constexpr std::string_view kCompoundRelationOriginal = R"ttl(:RF :isRepeatableElementOfSameForm :Word .)ttl";
inline constexpr std::string_view kCompoundRelationReified = R"ttl(
:RF :hasOperation :Repetition ;
    :affectedElement :Word ;
    :hasOperationForm :SameForm .
)ttl";

// Textual definition with trailing attribution.
inline constexpr std::string_view kDefinitionOriginal = R"ttl(
:RF a :RhetoricalFigure ;
    rdfs:comment "Repetition of the first word [...] (Gerd Berner)" .
)ttl";
inline constexpr std::string_view kDefinitionReified = R"ttl(
:RF :hasDefinition :DefinitionRF1 .
:DefinitionRF1 :hasAuthor "Gerd Berner" ;
    :isDefinition "Repetition of the first word [...]" .
:RF a owl:Class ;
    rdfs:subClassOf :RhetoricalFigure .
)ttl";

// Inline example with author and source.
inline constexpr std::string_view kExampleOriginal = R"ttl(
:RF a :RhetoricalFigure ;
    :isExample "The water [...]. The water [...] (Johann Wolfgang von Goethe, Der Zauberlehrling)" .
)ttl";
inline constexpr std::string_view kExampleReified = R"ttl(
:RF :hasExample :Example1 .
:Example1 :hasAuthor "Johann Wolfgang von Goethe" ;
    :hasSource "Der Zauberlehrling" ;
    :isExample "The water [...]. The water [...]" .
:RF a owl:Class ;
    rdfs:subClassOf :RhetoricalFigure .
)ttl";

// Complete epiphora model in the original form.
inline constexpr std::string_view kEpiphoraOriginal = R"ttl(
:Epiphora a :RhetoricalFigure ;
    rdfs:label "Epiphora"@en , "Epipher"@de ;
    :isInPosition :Beginning ;
    :isInArea :Sentence ;
    :isRepeatableElementOfSameForm :Word ;
    rdfs:comment "Wiederholung eines Wortes am Ende aufeinanderfolgender Sätze. (Gerd Berner)"@de ;
    rdfs:comment "Das letzte Wort eines Satzes kehrt am Satzende wieder."@de ;
    :isExample "Er wollte Frieden, sie wollte Frieden. (Anonym, Schulbuch)"@de .
)ttl";
inline constexpr std::string_view kEpiphoraReified = R"ttl(
:Epiphora a owl:Class ;
    rdfs:subClassOf :RhetoricalFigure ;
    rdfs:label "Epiphora"@en , "Epipher"@de ;
    :isInPosition :Beginning ;
    :isInArea :Sentence ;
    :hasOperation :Repetition ;
    :affectedElement :Word ;
    :hasOperationForm :SameForm ;
    :hasDefinition :DefinitionEpiphora1 , :DefinitionEpiphora2 ;
    :hasExample :Example1 .
:DefinitionEpiphora1 :hasAuthor "Gerd Berner" ;
    :isDefinition "Wiederholung eines Wortes am Ende aufeinanderfolgender Sätze."@de .
:DefinitionEpiphora2 :isDefinition "Das letzte Wort eines Satzes kehrt am Satzende wieder."@de .
:Example1 :hasAuthor "Anonym" ;
    :hasSource "Schulbuch" ;
    :isExample "Er wollte Frieden, sie wollte Frieden."@de .
)ttl";

}  // namespace rhetorik::fixtures
