#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "rhetorik/ontology/reify.hpp"
#include "rhetorik/ontology/turtle.hpp"

namespace rhetorik::testing {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string data_path(const std::string& name) { return std::string(RHETORIK_DATA_DIR) + "/" + name; }

/// data/figures.ttl reified with data/reification.map.
inline onto::TripleStore sample_ontology() {
    auto store = onto::parse_turtle(read_file(data_path("figures.ttl")));
    auto mapping = onto::parse_mapping(read_file(data_path("reification.map")), store.prefixes());
    return onto::reify(store, mapping).store;
}

}  // namespace rhetorik::testing
