#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rhetorik/ontology/term.hpp"

namespace rhetorik::onto {

namespace detail {

inline std::string term_key(const Term& term) {
    if (const auto* iri = std::get_if<Iri>(&term)) {
        return "I" + iri->value;
    }
    const auto& lit = std::get<Literal>(term);
    return "L" + lit.lang.value_or("") + '\x1f' + lit.lexical;
}

inline std::string triple_key(const Triple& t) {
    std::string key = t.subject.value;
    key += '\x1e';
    key += t.predicate.value;
    key += '\x1e';
    key += term_key(t.object);
    return key;
}

}  // namespace detail

/// Set of triples with insertion order preserved and subject/predicate/object indexes.
class TripleStore {
public:
    TripleStore() = default;

    /// Returns false when the triple is already present.
    bool add(Triple triple) {
        auto key = detail::triple_key(triple);
        if (!keys_.insert(std::move(key)).second) {
            return false;
        }
        const std::size_t pos = triples_.size();
        by_subject_[triple.subject.value].push_back(pos);
        by_predicate_[triple.predicate.value].push_back(pos);
        by_object_[detail::term_key(triple.object)].push_back(pos);
        triples_.push_back(std::move(triple));
        return true;
    }

    bool add(Iri subject, Iri predicate, Term object) {
        return add(Triple{std::move(subject), std::move(predicate), std::move(object)});
    }

    [[nodiscard]] bool contains(const Triple& triple) const {
        return keys_.contains(detail::triple_key(triple));
    }

    [[nodiscard]] std::span<const Triple> triples() const { return triples_; }
    [[nodiscard]] std::size_t size() const { return triples_.size(); }
    [[nodiscard]] bool empty() const { return triples_.empty(); }

    [[nodiscard]] const PrefixMap& prefixes() const { return prefixes_; }
    PrefixMap& prefixes() { return prefixes_; }

    [[nodiscard]] const std::vector<std::size_t>& with_subject(const Iri& s) const {
        return lookup(by_subject_, s.value);
    }
    [[nodiscard]] const std::vector<std::size_t>& with_predicate(const Iri& p) const {
        return lookup(by_predicate_, p.value);
    }
    [[nodiscard]] const std::vector<std::size_t>& with_object(const Term& o) const {
        return lookup(by_object_, detail::term_key(o));
    }

    [[nodiscard]] const Triple& at(std::size_t pos) const { return triples_.at(pos); }

    [[nodiscard]] std::vector<Term> objects(const Iri& subject, const Iri& predicate) const {
        std::vector<Term> out;
        for (auto pos : with_subject(subject)) {
            if (triples_[pos].predicate == predicate) {
                out.push_back(triples_[pos].object);
            }
        }
        return out;
    }

    [[nodiscard]] std::vector<Iri> subjects(const Iri& predicate, const Term& object) const {
        std::vector<Iri> out;
        for (auto pos : with_object(object)) {
            if (triples_[pos].predicate == predicate) {
                out.push_back(triples_[pos].subject);
            }
        }
        return out;
    }

    /// Triple sets compare equal regardless of insertion order.
    [[nodiscard]] bool same_triples(const TripleStore& other) const {
        if (size() != other.size()) {
            return false;
        }
        for (const auto& t : triples_) {
            if (!other.contains(t)) {
                return false;
            }
        }
        return true;
    }

private:
    using Index = std::unordered_map<std::string, std::vector<std::size_t>>;

    static const std::vector<std::size_t>& lookup(const Index& index, const std::string& key) {
        static const std::vector<std::size_t> empty;
        auto it = index.find(key);
        return it == index.end() ? empty : it->second;
    }

    std::vector<Triple> triples_;
    std::unordered_set<std::string> keys_;
    Index by_subject_;
    Index by_predicate_;
    Index by_object_;
    PrefixMap prefixes_;
};

}  // namespace rhetorik::onto
