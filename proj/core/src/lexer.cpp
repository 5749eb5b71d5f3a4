#include "sgl/lexer.hpp"

#include <cctype>
#include <unordered_map>

namespace sgl {

namespace {

const std::unordered_map<std::string_view, TokenKind>& keywords() {
  static const std::unordered_map<std::string_view, TokenKind> kw = {
      {"class", TokenKind::KwClass},       {"state", TokenKind::KwState},
      {"effects", TokenKind::KwEffects},   {"update", TokenKind::KwUpdate},
      {"constraints", TokenKind::KwConstraints},
      {"run", TokenKind::KwRun},           {"on", TokenKind::KwOn},
      {"when", TokenKind::KwWhen},         {"restart", TokenKind::KwRestart},
      {"let", TokenKind::KwLet},           {"if", TokenKind::KwIf},
      {"else", TokenKind::KwElse},         {"accum", TokenKind::KwAccum},
      {"with", TokenKind::KwWith},         {"over", TokenKind::KwOver},
      {"from", TokenKind::KwFrom},         {"in", TokenKind::KwIn},
      {"waitNextTick", TokenKind::KwWaitNextTick},
      {"atomic", TokenKind::KwAtomic},     {"spawn", TokenKind::KwSpawn},
      {"destroy", TokenKind::KwDestroy},   {"this", TokenKind::KwThis},
      {"null", TokenKind::KwNull},         {"true", TokenKind::KwTrue},
      {"false", TokenKind::KwFalse},       {"number", TokenKind::KwNumber},
      {"int", TokenKind::KwInt},           {"bool", TokenKind::KwBool},
      {"string", TokenKind::KwString},     {"ref", TokenKind::KwRef},
      {"set", TokenKind::KwSet},
  };
  return kw;
}

[[noreturn]] void lex_error(const std::string& msg, int line, int col) {
  throw CompileError({Diagnostic{Severity::Error, "E_LEX", msg, {line, col}}});
}

}  // namespace

const char* token_kind_name(TokenKind k) {
  switch (k) {
    case TokenKind::Eof: return "end of input";
    case TokenKind::Ident: return "identifier";
    case TokenKind::IntLit: return "integer literal";
    case TokenKind::NumberLit: return "number literal";
    case TokenKind::StringLit: return "string literal";
    case TokenKind::KwClass: return "'class'";
    case TokenKind::KwState: return "'state'";
    case TokenKind::KwEffects: return "'effects'";
    case TokenKind::KwUpdate: return "'update'";
    case TokenKind::KwConstraints: return "'constraints'";
    case TokenKind::KwRun: return "'run'";
    case TokenKind::KwOn: return "'on'";
    case TokenKind::KwWhen: return "'when'";
    case TokenKind::KwRestart: return "'restart'";
    case TokenKind::KwLet: return "'let'";
    case TokenKind::KwIf: return "'if'";
    case TokenKind::KwElse: return "'else'";
    case TokenKind::KwAccum: return "'accum'";
    case TokenKind::KwWith: return "'with'";
    case TokenKind::KwOver: return "'over'";
    case TokenKind::KwFrom: return "'from'";
    case TokenKind::KwIn: return "'in'";
    case TokenKind::KwWaitNextTick: return "'waitNextTick'";
    case TokenKind::KwAtomic: return "'atomic'";
    case TokenKind::KwSpawn: return "'spawn'";
    case TokenKind::KwDestroy: return "'destroy'";
    case TokenKind::KwThis: return "'this'";
    case TokenKind::KwNull: return "'null'";
    case TokenKind::KwTrue: return "'true'";
    case TokenKind::KwFalse: return "'false'";
    case TokenKind::KwNumber: return "'number'";
    case TokenKind::KwInt: return "'int'";
    case TokenKind::KwBool: return "'bool'";
    case TokenKind::KwString: return "'string'";
    case TokenKind::KwRef: return "'ref'";
    case TokenKind::KwSet: return "'set'";
    case TokenKind::LBrace: return "'{'";
    case TokenKind::RBrace: return "'}'";
    case TokenKind::LParen: return "'('";
    case TokenKind::RParen: return "')'";
    case TokenKind::Semicolon: return "';'";
    case TokenKind::Colon: return "':'";
    case TokenKind::Comma: return "','";
    case TokenKind::Dot: return "'.'";
    case TokenKind::EffectAssign: return "'<-'";
    case TokenKind::SetInsert: return "'<='";
    case TokenKind::Assign: return "'='";
    case TokenKind::Eq: return "'=='";
    case TokenKind::Ne: return "'!='";
    case TokenKind::Lt: return "'<'";
    case TokenKind::Gt: return "'>'";
    case TokenKind::Ge: return "'>='";
    case TokenKind::AndAnd: return "'&&'";
    case TokenKind::OrOr: return "'||'";
    case TokenKind::Not: return "'!'";
    case TokenKind::Plus: return "'+'";
    case TokenKind::Minus: return "'-'";
    case TokenKind::Star: return "'*'";
    case TokenKind::Slash: return "'/'";
    case TokenKind::Percent: return "'%'";
  }
  return "?";
}

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  int col = 1;
  std::string leading;

  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };

  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      leading += c;
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      std::size_t end = src.find('\n', i);
      if (end == std::string_view::npos) end = src.size();
      leading.append(src.substr(i, end - i));
      advance(end - i);
      continue;
    }

    Token tok;
    tok.line = line;
    tok.column = col;
    tok.leading = std::move(leading);
    leading.clear();
    std::size_t start = i;

    auto unsigned_c = static_cast<unsigned char>(c);
    if (std::isalpha(unsigned_c)) {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      std::string_view word = src.substr(i, j - i);
      auto it = keywords().find(word);
      tok.kind = it != keywords().end() ? it->second : TokenKind::Ident;
      advance(j - i);
    } else if (std::isdigit(unsigned_c)) {
      std::size_t j = i;
      bool is_float = false;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j + 1 < src.size() && src[j] == '.' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        is_float = true;
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          is_float = true;
          j = k;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        }
      }
      tok.kind = is_float ? TokenKind::NumberLit : TokenKind::IntLit;
      advance(j - i);
    } else if (c == '"') {
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != '"') {
        if (src[j] == '\n') lex_error("unterminated string literal", line, col);
        if (src[j] == '\\') ++j;
        ++j;
      }
      if (j >= src.size()) lex_error("unterminated string literal", line, col);
      tok.kind = TokenKind::StringLit;
      advance(j + 1 - i);
    } else {
      auto two = [&](char a, char b) { return c == a && i + 1 < src.size() && src[i + 1] == b; };
      std::size_t len = 2;
      if (two('<', '-')) tok.kind = TokenKind::EffectAssign;
      else if (two('<', '=')) tok.kind = TokenKind::SetInsert;
      else if (two('>', '=')) tok.kind = TokenKind::Ge;
      else if (two('=', '=')) tok.kind = TokenKind::Eq;
      else if (two('!', '=')) tok.kind = TokenKind::Ne;
      else if (two('&', '&')) tok.kind = TokenKind::AndAnd;
      else if (two('|', '|')) tok.kind = TokenKind::OrOr;
      else {
        len = 1;
        switch (c) {
          case '{': tok.kind = TokenKind::LBrace; break;
          case '}': tok.kind = TokenKind::RBrace; break;
          case '(': tok.kind = TokenKind::LParen; break;
          case ')': tok.kind = TokenKind::RParen; break;
          case ';': tok.kind = TokenKind::Semicolon; break;
          case ':': tok.kind = TokenKind::Colon; break;
          case ',': tok.kind = TokenKind::Comma; break;
          case '.': tok.kind = TokenKind::Dot; break;
          case '=': tok.kind = TokenKind::Assign; break;
          case '<': tok.kind = TokenKind::Lt; break;
          case '>': tok.kind = TokenKind::Gt; break;
          case '!': tok.kind = TokenKind::Not; break;
          case '+': tok.kind = TokenKind::Plus; break;
          case '-': tok.kind = TokenKind::Minus; break;
          case '*': tok.kind = TokenKind::Star; break;
          case '/': tok.kind = TokenKind::Slash; break;
          case '%': tok.kind = TokenKind::Percent; break;
          default: {
            std::string shown = unsigned_c >= 0x20 && unsigned_c < 0x7f ? std::string(1, c)
                                                                         : "\\x" + std::to_string(unsigned_c);
            lex_error("unexpected character '" + shown + "'", line, col);
          }
        }
      }
      advance(len);
    }
    tok.lexeme = std::string(src.substr(start, i - start));
    out.push_back(std::move(tok));
  }

  Token eof;
  eof.kind = TokenKind::Eof;
  eof.line = line;
  eof.column = col;
  eof.leading = std::move(leading);
  out.push_back(std::move(eof));
  return out;
}

}  // namespace sgl
