#pragma once

#include <string_view>
#include <vector>

#include "sgl/ast.hpp"
#include "sgl/lexer.hpp"

namespace sgl {

/// Grammar (EBNF):
///
///   unit       = { class | script | handler } ;
///   class      = "class" IDENT "{" [ "state" ":" { type IDENT [ "=" expr ] ";" } ]
///                [ "effects" ":" { type IDENT ":" IDENT ";" } ]
///                [ "update" ":" { IDENT "=" expr ";" } ]
///                [ "constraints" ":" { expr ";" } ] "}" ;
///   script     = "run" IDENT "(" "this" ":" IDENT ")" block ;
///   handler    = "on" IDENT "when" "(" expr ")" [ "restart" ] block ;
///   type       = "number" | "int" | "bool" | "string" | "ref" "<" IDENT ">"
///              | "set" "<" type ">" | IDENT ;            (a class name means ref<Class>)
///   block      = "{" { stmt } "}" ;
///   stmt       = "let" IDENT "=" expr ";"
///              | lvalue "<-" expr ";" | lvalue "<=" expr ";"
///              | "if" "(" expr ")" block [ "else" ( block | ifstmt ) ]
///              | "accum" type IDENT "with" IDENT "over" type IDENT "from" expr block "in" block
///              | "waitNextTick" ";" | "restart" ";" | "atomic" block
///              | "spawn" IDENT "(" [ IDENT ":" expr { "," IDENT ":" expr } ] ")" ";"
///              | "destroy" expr ";" ;
///   lvalue     = IDENT | postfix "." IDENT ;
///   expr       = or ;  or = and { "||" and } ;  and = eq { "&&" eq } ;
///   eq         = rel { ("==" | "!=") rel } ;  rel = add { ("<" | "<=" | ">" | ">=") add } ;
///   add        = mul { ("+" | "-") mul } ;  mul = unary { ("*" | "/" | "%") unary } ;
///   unary      = ("!" | "-") unary | postfix ;  postfix = primary { "." IDENT } ;
///   primary    = INT | NUMBER | STRING | "true" | "false" | "null" | "this"
///              | IDENT [ "(" [ expr { "," expr } ] ")" ] | "(" expr ")"
///              | "{" [ expr { "," expr } ] "}" ;
///
/// Throws CompileError (E_SYNTAX, E_DUP_CLASS, E_DUP_FIELD, ...).
CompilationUnit parse_unit(const std::vector<Token>& tokens);

/// tokenize + parse_unit.
CompilationUnit parse_source(std::string_view source);

/// Parses a single expression (used by breakpoints and tests).
ExprPtr parse_expression(std::string_view source);

}  // namespace sgl
