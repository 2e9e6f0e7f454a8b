#pragma once
// Text and JSON forms of distance functions.
//
//   expr := "abs(" num "," num ")" | "min(" expr {"," expr} ")"
//         | "max(" expr {"," expr} ")" | "gm(" expr {"," expr} ")"
//         | "scale(" num "," expr ")"
//   num  := ["-"|"+"] factor {"*" factor}
//   factor := integer ["/" integer] | decimal | "sqrt2" | "sqrt3" | "sqrt<k>" | "invsqrt2"
//
// JSON: {"kind":"abs","a":"1","b":"-sqrt2"}, {"kind":"gm","children":[...]},
//       {"kind":"scale","c":"2","child":{...}}. Numbers may be JSON numbers
//       or strings in the num syntax.

#include <string>

#include "starkit/expr.hpp"

namespace starkit {

Expr parse_distance_function(const std::string& text);
Expr parse_distance_json(const std::string& text);
Coefficient parse_coefficient(const std::string& text);

std::string print_expr(const Expr& e);
std::string expr_to_json(const Expr& e);

/// Resolves a CLI-style source: a builtin name (height, multiplicative,
/// unionjack, cusp), a path to a file, or inline DSL / JSON text.
Expr load_distance_function(const std::string& source);

}  // namespace starkit
