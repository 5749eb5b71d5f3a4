#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sgl/diagnostics.hpp"

namespace sgl {

enum class TokenKind {
  Eof,
  Ident,
  IntLit,
  NumberLit,
  StringLit,
  // keywords
  KwClass, KwState, KwEffects, KwUpdate, KwConstraints, KwRun, KwOn, KwWhen, KwRestart,
  KwLet, KwIf, KwElse, KwAccum, KwWith, KwOver, KwFrom, KwIn, KwWaitNextTick, KwAtomic,
  KwSpawn, KwDestroy, KwThis, KwNull, KwTrue, KwFalse,
  KwNumber, KwInt, KwBool, KwString, KwRef, KwSet,
  // punctuation
  LBrace, RBrace, LParen, RParen, Semicolon, Colon, Comma, Dot,
  EffectAssign,  // <-
  SetInsert,     // <=  (also less-or-equal inside expressions)
  Assign,        // =
  Eq, Ne, Lt, Gt, Ge, AndAnd, OrOr, Not, Plus, Minus, Star, Slash, Percent,
};

struct Token {
  TokenKind kind = TokenKind::Eof;
  std::string lexeme;
  int line = 1;
  int column = 1;
  /// Whitespace and comments preceding the lexeme.
  std::string leading;
};

const char* token_kind_name(TokenKind k);

/// Throws CompileError with a single E_LEX diagnostic on a bad character.
std::vector<Token> tokenize(std::string_view source);

}  // namespace sgl
