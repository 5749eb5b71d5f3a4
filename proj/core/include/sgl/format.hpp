#pragma once

#include <string>

#include "sgl/ast.hpp"

namespace sgl {

/// Canonical pretty-print. Deterministic; parse_source(format_ast(u)) is
/// structurally equal to u. An empty unit formats to "".
std::string format_ast(const CompilationUnit& unit);

std::string format_expr(const Expr& e);
std::string format_block(const Block& b, int indent = 0);

}  // namespace sgl
