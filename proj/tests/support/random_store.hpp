#pragma once

#include <random>
#include <string>
#include <vector>

#include "rhetorik/ontology/query.hpp"

namespace rhetorik::testing {

struct RandomStoreSpec {
    std::size_t max_triples = 1000;
    std::size_t subjects = 40;
    std::size_t predicates = 6;
    std::size_t literals = 10;
};

inline onto::Iri pool_iri(const std::string& kind, std::size_t i) {
    return onto::Iri("http://t.example/" + kind + std::to_string(i));
}

inline onto::TripleStore random_store(std::mt19937_64& rng, const RandomStoreSpec& spec = {}) {
    onto::TripleStore store;
    std::uniform_int_distribution<std::size_t> count(1, spec.max_triples);
    std::uniform_int_distribution<std::size_t> subj(0, spec.subjects - 1);
    std::uniform_int_distribution<std::size_t> pred(0, spec.predicates - 1);
    std::uniform_int_distribution<std::size_t> lit(0, spec.literals - 1);
    std::bernoulli_distribution literal_object(0.2);
    const std::size_t n = count(rng);
    for (std::size_t i = 0; i < n; ++i) {
        onto::Term object = literal_object(rng)
                                ? onto::Term(onto::Literal{"v" + std::to_string(lit(rng)), std::nullopt})
                                : onto::Term(pool_iri("e", subj(rng)));
        store.add(pool_iri("e", subj(rng)), pool_iri("p", pred(rng)), std::move(object));
    }
    return store;
}

/// Up to `max_conjuncts` conjuncts over variables ?x and ?y; constants drawn from the store.
inline onto::QueryPattern random_pattern(std::mt19937_64& rng, const onto::TripleStore& store,
                                         std::size_t max_conjuncts = 4) {
    std::uniform_int_distribution<std::size_t> n_conj(1, max_conjuncts);
    std::uniform_int_distribution<std::size_t> pick_triple(0, store.size() - 1);
    std::uniform_int_distribution<int> slot(0, 2);
    const std::vector<std::string> vars = {"x", "y"};
    onto::QueryPattern pattern;
    const std::size_t n = n_conj(rng);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& t = store.at(pick_triple(rng));
        onto::Conjunct c{onto::Var{"x"}, t.predicate, onto::Var{"y"}};
        switch (slot(rng)) {
            case 0: c.subject = onto::Var{vars[rng() % 2]}; break;
            case 1: c.subject = t.subject; break;
            default: c.subject = onto::Var{vars[rng() % 2]};
        }
        switch (slot(rng)) {
            case 0: c.object = onto::Var{vars[rng() % 2]}; break;
            case 1:
                if (const auto* iri = std::get_if<onto::Iri>(&t.object)) {
                    c.object = *iri;
                } else {
                    c.object = std::get<onto::Literal>(t.object);
                }
                break;
            default: c.object = onto::Var{vars[rng() % 2]};
        }
        pattern.conjuncts.push_back(std::move(c));
    }
    return pattern;
}

}  // namespace rhetorik::testing
