#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rhetorik/ontology/triple_store.hpp"

namespace rhetorik::onto {

struct Var {
    std::string name;
    auto operator<=>(const Var&) const = default;
};

using SubjectSlot = std::variant<Var, Iri>;
using ObjectSlot = std::variant<Var, Iri, Literal>;

struct Conjunct {
    SubjectSlot subject;
    Iri predicate;
    ObjectSlot object;
};

/// Conjunctive basic graph pattern. Repeated variable names unify.
struct QueryPattern {
    std::vector<Conjunct> conjuncts;
};

/// Variable name -> bound term. Ordered by name so results sort deterministically.
using Binding = std::map<std::string, Term>;

namespace detail {

inline const Term* bound_value(const Binding& binding, const std::string& name) {
    auto it = binding.find(name);
    return it == binding.end() ? nullptr : &it->second;
}

inline Term slot_term(const ObjectSlot& slot) {
    if (const auto* iri = std::get_if<Iri>(&slot)) {
        return *iri;
    }
    return std::get<Literal>(slot);
}

class Matcher {
public:
    Matcher(const TripleStore& store, const std::vector<Conjunct>& conjuncts)
        : store_(store), conjuncts_(conjuncts), done_(conjuncts.size(), false) {}

    std::vector<Binding> run() {
        Binding binding;
        step(binding, 0);
        return std::move(results_);
    }

private:
    // Number of positions fixed by constants or already-bound variables.
    int boundness(const Conjunct& c, const Binding& b) const {
        int score = 0;
        if (const auto* v = std::get_if<Var>(&c.subject)) {
            score += bound_value(b, v->name) != nullptr ? 2 : 0;
        } else {
            score += 2;
        }
        if (const auto* v = std::get_if<Var>(&c.object)) {
            score += bound_value(b, v->name) != nullptr ? 2 : 0;
        } else {
            score += 2;
        }
        return score;
    }

    std::size_t pick(const Binding& b) const {
        std::size_t best = conjuncts_.size();
        int best_score = -1;
        std::size_t best_card = 0;
        for (std::size_t i = 0; i < conjuncts_.size(); ++i) {
            if (done_[i]) {
                continue;
            }
            const int score = boundness(conjuncts_[i], b);
            const std::size_t card = store_.with_predicate(conjuncts_[i].predicate).size();
            if (score > best_score || (score == best_score && card < best_card)) {
                best = i;
                best_score = score;
                best_card = card;
            }
        }
        return best;
    }

    void step(Binding& binding, std::size_t depth) {
        if (depth == conjuncts_.size()) {
            results_.push_back(binding);
            return;
        }
        const std::size_t index = pick(binding);
        const Conjunct& c = conjuncts_[index];
        done_[index] = true;

        std::optional<Term> subject;
        std::optional<Term> object;
        if (const auto* v = std::get_if<Var>(&c.subject)) {
            if (const auto* t = bound_value(binding, v->name)) {
                subject = *t;
            }
        } else {
            subject = std::get<Iri>(c.subject);
        }
        if (const auto* v = std::get_if<Var>(&c.object)) {
            if (const auto* t = bound_value(binding, v->name)) {
                object = *t;
            }
        } else {
            object = slot_term(c.object);
        }

        if (subject && !is_iri(*subject)) {
            done_[index] = false;
            return;
        }

        const std::vector<std::size_t>* candidates = nullptr;
        if (subject) {
            candidates = &store_.with_subject(std::get<Iri>(*subject));
        } else if (object) {
            candidates = &store_.with_object(*object);
        } else {
            candidates = &store_.with_predicate(c.predicate);
        }

        for (const std::size_t pos : *candidates) {
            const Triple& t = store_.at(pos);
            if (t.predicate != c.predicate) {
                continue;
            }
            if (subject && t.subject != std::get<Iri>(*subject)) {
                continue;
            }
            if (object && t.object != *object) {
                continue;
            }
            std::vector<std::string> added;
            bool consistent = true;
            if (const auto* v = std::get_if<Var>(&c.subject); v != nullptr && !subject) {
                binding.emplace(v->name, t.subject);
                added.push_back(v->name);
            }
            if (const auto* v = std::get_if<Var>(&c.object); v != nullptr && !object) {
                // Same variable in subject and object position of one conjunct.
                if (const auto* already = bound_value(binding, v->name)) {
                    consistent = *already == t.object;
                } else {
                    binding.emplace(v->name, t.object);
                    added.push_back(v->name);
                }
            }
            if (consistent) {
                step(binding, depth + 1);
            }
            for (const auto& name : added) {
                binding.erase(name);
            }
        }
        done_[index] = false;
    }

    const TripleStore& store_;
    const std::vector<Conjunct>& conjuncts_;
    std::vector<bool> done_;
    std::vector<Binding> results_;
};

}  // namespace detail

inline void validate(const QueryPattern& pattern) {
    if (pattern.conjuncts.empty()) {
        throw std::invalid_argument("query pattern needs at least one conjunct");
    }
    for (const auto& c : pattern.conjuncts) {
        if (const auto* v = std::get_if<Var>(&c.subject); v != nullptr && v->name.empty()) {
            throw std::invalid_argument("empty variable name");
        }
        if (const auto* v = std::get_if<Var>(&c.object); v != nullptr && v->name.empty()) {
            throw std::invalid_argument("empty variable name");
        }
    }
}

/// All bindings satisfying every conjunct, sorted by bound values (variables in name order).
inline std::vector<Binding> query(const TripleStore& store, const QueryPattern& pattern) {
    validate(pattern);
    auto results = detail::Matcher(store, pattern.conjuncts).run();
    std::sort(results.begin(), results.end());
    results.erase(std::unique(results.begin(), results.end()), results.end());
    return results;
}

}  // namespace rhetorik::onto
