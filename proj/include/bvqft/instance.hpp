#pragma once

#include <string>

#include "bvqft/algebra.hpp"

namespace bvqft {

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Instance files are JSON with exact-rational scalars ("p/q" strings or
// integers); any float anywhere is rejected. See the shipped instances for
// the layout.
AlgebraSpec parse_instance(const std::string& json_text);
AlgebraSpec load_instance(const std::string& path);
std::string serialize_instance(const AlgebraSpec& spec);

// Built-in instances by name: frobenius-k0, point-unital, dgbv-lg,
// anomalous-demo.
AlgebraSpec builtin_instance(const std::string& name);
std::vector<std::string> builtin_names();

}  // namespace bvqft
