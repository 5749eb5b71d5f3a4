#include "sgl/parser.hpp"

#include <charconv>
#include <cstdlib>
#include <set>

namespace sgl {

namespace {

class Parser {
 public:
  explicit Parser(const std::vector<Token>& toks) : toks_(toks) {}

  CompilationUnit unit() {
    CompilationUnit u;
    while (!at(TokenKind::Eof)) {
      if (at(TokenKind::KwClass)) {
        u.classes.push_back(class_def());
      } else if (at(TokenKind::KwRun)) {
        u.scripts.push_back(script());
      } else if (at(TokenKind::KwOn)) {
        u.handlers.push_back(handler());
      } else {
        fail({TokenKind::KwClass, TokenKind::KwRun, TokenKind::KwOn});
      }
    }
    check_duplicates(u);
    if (!diags_.empty()) throw CompileError(diags_);
    return u;
  }

  ExprPtr lone_expression() {
    auto e = expr();
    expect(TokenKind::Eof);
    return e;
  }

 private:
  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at(TokenKind k) const { return peek().kind == k; }
  SourceLoc loc() const { return {peek().line, peek().column}; }

  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }

  bool accept(TokenKind k) {
    if (!at(k)) return false;
    next();
    return true;
  }

  [[noreturn]] void fail(std::initializer_list<TokenKind> expected) {
    std::string msg = "expected ";
    bool first = true;
    for (auto k : expected) {
      if (!first) msg += " or ";
      first = false;
      msg += token_kind_name(k);
    }
    msg += ", found ";
    msg += at(TokenKind::Eof) ? "end of input" : "'" + peek().lexeme + "'";
    diags_.push_back({Severity::Error, "E_SYNTAX", msg, loc()});
    throw CompileError(diags_);
  }

  const Token& expect(TokenKind k) {
    if (!at(k)) fail({k});
    return next();
  }

  std::string ident() { return expect(TokenKind::Ident).lexeme; }

  Type type() {
    switch (peek().kind) {
      case TokenKind::KwNumber: next(); return Type::number();
      case TokenKind::KwInt: next(); return Type::integer();
      case TokenKind::KwBool: next(); return Type::boolean();
      case TokenKind::KwString: next(); return Type::string();
      case TokenKind::KwRef: {
        next();
        expect(TokenKind::Lt);
        auto c = ident();
        expect(TokenKind::Gt);
        return Type::ref(c);
      }
      case TokenKind::KwSet: {
        next();
        expect(TokenKind::Lt);
        auto e = type();
        expect(TokenKind::Gt);
        return Type::set(std::move(e));
      }
      case TokenKind::Ident: return Type::ref(next().lexeme);
      default:
        fail({TokenKind::KwNumber, TokenKind::KwInt, TokenKind::KwBool, TokenKind::KwString, TokenKind::KwRef,
              TokenKind::KwSet, TokenKind::Ident});
    }
  }

  bool at_type_start() const {
    switch (peek().kind) {
      case TokenKind::KwNumber: case TokenKind::KwInt: case TokenKind::KwBool: case TokenKind::KwString:
      case TokenKind::KwRef: case TokenKind::KwSet: case TokenKind::Ident:
        return true;
      default:
        return false;
    }
  }

  ClassDef class_def() {
    ClassDef c;
    c.loc = loc();
    expect(TokenKind::KwClass);
    c.name = ident();
    expect(TokenKind::LBrace);
    if (accept(TokenKind::KwState)) {
      expect(TokenKind::Colon);
      while (at_type_start()) {
        StateDecl d;
        d.loc = loc();
        d.type = type();
        d.name = ident();
        if (accept(TokenKind::Assign)) d.init = expr();
        expect(TokenKind::Semicolon);
        c.state.push_back(std::move(d));
      }
    }
    if (accept(TokenKind::KwEffects)) {
      expect(TokenKind::Colon);
      while (at_type_start()) {
        EffectDecl d;
        d.loc = loc();
        d.type = type();
        d.name = ident();
        expect(TokenKind::Colon);
        SourceLoc cl = loc();
        auto cname = ident();
        auto comb = parse_combinator(cname);
        if (!comb) {
          diags_.push_back({Severity::Error, "E_BAD_COMBINATOR", "unknown combinator '" + cname + "'", cl});
          throw CompileError(diags_);
        }
        d.comb = *comb;
        expect(TokenKind::Semicolon);
        c.effects.push_back(std::move(d));
      }
    }
    if (accept(TokenKind::KwUpdate)) {
      expect(TokenKind::Colon);
      while (at(TokenKind::Ident)) {
        UpdateRule r;
        r.loc = loc();
        r.field = ident();
        expect(TokenKind::Assign);
        r.expr = expr();
        expect(TokenKind::Semicolon);
        c.rules.push_back(std::move(r));
      }
    }
    if (accept(TokenKind::KwConstraints)) {
      expect(TokenKind::Colon);
      while (!at(TokenKind::RBrace) && !at(TokenKind::Eof)) {
        c.constraints.push_back(expr());
        expect(TokenKind::Semicolon);
      }
    }
    expect(TokenKind::RBrace);
    return c;
  }

  ScriptDef script() {
    ScriptDef s;
    s.loc = loc();
    expect(TokenKind::KwRun);
    s.name = ident();
    expect(TokenKind::LParen);
    expect(TokenKind::KwThis);
    expect(TokenKind::Colon);
    s.cls = ident();
    expect(TokenKind::RParen);
    s.body = block();
    return s;
  }

  HandlerDef handler() {
    HandlerDef h;
    h.loc = loc();
    expect(TokenKind::KwOn);
    h.cls = ident();
    expect(TokenKind::KwWhen);
    expect(TokenKind::LParen);
    h.cond = expr();
    expect(TokenKind::RParen);
    h.may_restart = accept(TokenKind::KwRestart);
    h.body = block();
    return h;
  }

  Block block() {
    expect(TokenKind::LBrace);
    Block b;
    while (!at(TokenKind::RBrace)) {
      if (at(TokenKind::Eof)) fail({TokenKind::RBrace});
      b.push_back(stmt());
    }
    next();
    return b;
  }

  StmtPtr make(Stmt::Kind k) {
    auto s = std::make_shared<Stmt>();
    s->kind = k;
    s->loc = loc();
    return s;
  }

  StmtPtr if_stmt() {
    auto s = make(Stmt::Kind::If);
    expect(TokenKind::KwIf);
    expect(TokenKind::LParen);
    s->expr = expr();
    expect(TokenKind::RParen);
    s->body = block();
    if (accept(TokenKind::KwElse)) {
      if (at(TokenKind::KwIf)) {
        s->orelse.push_back(if_stmt());
      } else {
        s->orelse = block();
      }
    }
    return s;
  }

  StmtPtr stmt() {
    switch (peek().kind) {
      case TokenKind::KwLet: {
        auto s = make(Stmt::Kind::Let);
        next();
        s->name = ident();
        expect(TokenKind::Assign);
        s->expr = expr();
        expect(TokenKind::Semicolon);
        return s;
      }
      case TokenKind::KwIf: return if_stmt();
      case TokenKind::KwAccum: {
        auto s = make(Stmt::Kind::Accum);
        next();
        s->acc_type = type();
        s->name = ident();
        expect(TokenKind::KwWith);
        SourceLoc cl = loc();
        auto cname = ident();
        auto comb = parse_combinator(cname);
        if (!comb) {
          diags_.push_back({Severity::Error, "E_BAD_COMBINATOR", "unknown combinator '" + cname + "'", cl});
          throw CompileError(diags_);
        }
        s->acc_comb = *comb;
        expect(TokenKind::KwOver);
        s->loop_type = type();
        s->loop_var = ident();
        expect(TokenKind::KwFrom);
        s->expr = expr();
        s->body = block();
        expect(TokenKind::KwIn);
        s->orelse = block();
        return s;
      }
      case TokenKind::KwWaitNextTick: {
        auto s = make(Stmt::Kind::Wait);
        next();
        expect(TokenKind::Semicolon);
        return s;
      }
      case TokenKind::KwRestart: {
        auto s = make(Stmt::Kind::Restart);
        next();
        expect(TokenKind::Semicolon);
        return s;
      }
      case TokenKind::KwAtomic: {
        auto s = make(Stmt::Kind::Atomic);
        next();
        s->body = block();
        return s;
      }
      case TokenKind::KwSpawn: {
        auto s = make(Stmt::Kind::Spawn);
        next();
        s->spawn_class = ident();
        expect(TokenKind::LParen);
        if (!at(TokenKind::RParen)) {
          do {
            auto f = ident();
            expect(TokenKind::Colon);
            s->spawn_inits.emplace_back(f, expr());
          } while (accept(TokenKind::Comma));
        }
        expect(TokenKind::RParen);
        expect(TokenKind::Semicolon);
        return s;
      }
      case TokenKind::KwDestroy: {
        auto s = make(Stmt::Kind::Destroy);
        next();
        s->expr = expr();
        expect(TokenKind::Semicolon);
        return s;
      }
      case TokenKind::Ident:
      case TokenKind::KwThis: {
        auto s = make(Stmt::Kind::Assign);
        s->target = postfix();
        if (s->target->kind != Expr::Kind::Name && s->target->kind != Expr::Kind::Field) {
          diags_.push_back({Severity::Error, "E_SYNTAX", "invalid assignment target", s->loc});
          throw CompileError(diags_);
        }
        if (accept(TokenKind::SetInsert)) {
          s->kind = Stmt::Kind::Insert;
        } else if (!accept(TokenKind::EffectAssign)) {
          fail({TokenKind::EffectAssign, TokenKind::SetInsert});
        }
        s->expr = expr();
        expect(TokenKind::Semicolon);
        return s;
      }
      default:
        fail({TokenKind::KwLet, TokenKind::KwIf, TokenKind::KwAccum, TokenKind::KwWaitNextTick,
              TokenKind::KwAtomic, TokenKind::KwSpawn, TokenKind::KwDestroy, TokenKind::Ident});
    }
  }

  // expressions

  ExprPtr node(Expr::Kind k, SourceLoc l) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->loc = l;
    return e;
  }

  ExprPtr binary(BinOp op, ExprPtr l, ExprPtr r) {
    auto e = node(Expr::Kind::Binary, l->loc);
    e->bop = op;
    e->args = {std::move(l), std::move(r)};
    return e;
  }

  ExprPtr expr() { return or_expr(); }

  ExprPtr or_expr() {
    auto l = and_expr();
    while (accept(TokenKind::OrOr)) l = binary(BinOp::Or, l, and_expr());
    return l;
  }

  ExprPtr and_expr() {
    auto l = eq_expr();
    while (accept(TokenKind::AndAnd)) l = binary(BinOp::And, l, eq_expr());
    return l;
  }

  ExprPtr eq_expr() {
    auto l = rel_expr();
    for (;;) {
      if (accept(TokenKind::Eq)) l = binary(BinOp::Eq, l, rel_expr());
      else if (accept(TokenKind::Ne)) l = binary(BinOp::Ne, l, rel_expr());
      else return l;
    }
  }

  ExprPtr rel_expr() {
    auto l = add_expr();
    for (;;) {
      if (accept(TokenKind::Lt)) l = binary(BinOp::Lt, l, add_expr());
      else if (accept(TokenKind::SetInsert)) l = binary(BinOp::Le, l, add_expr());
      else if (accept(TokenKind::Gt)) l = binary(BinOp::Gt, l, add_expr());
      else if (accept(TokenKind::Ge)) l = binary(BinOp::Ge, l, add_expr());
      else return l;
    }
  }

  ExprPtr add_expr() {
    auto l = mul_expr();
    for (;;) {
      if (accept(TokenKind::Plus)) l = binary(BinOp::Add, l, mul_expr());
      else if (accept(TokenKind::Minus)) l = binary(BinOp::Sub, l, mul_expr());
      else return l;
    }
  }

  ExprPtr mul_expr() {
    auto l = unary();
    for (;;) {
      if (accept(TokenKind::Star)) l = binary(BinOp::Mul, l, unary());
      else if (accept(TokenKind::Slash)) l = binary(BinOp::Div, l, unary());
      else if (accept(TokenKind::Percent)) l = binary(BinOp::Mod, l, unary());
      else return l;
    }
  }

  ExprPtr unary() {
    SourceLoc l = loc();
    if (accept(TokenKind::Not)) {
      auto e = node(Expr::Kind::Unary, l);
      e->uop = UnOp::Not;
      e->args = {unary()};
      return e;
    }
    if (accept(TokenKind::Minus)) {
      auto e = node(Expr::Kind::Unary, l);
      e->uop = UnOp::Neg;
      e->args = {unary()};
      return e;
    }
    return postfix();
  }

  ExprPtr postfix() {
    auto e = primary();
    while (at(TokenKind::Dot)) {
      SourceLoc l = loc();
      next();
      auto f = node(Expr::Kind::Field, l);
      f->text = ident();
      f->args = {std::move(e)};
      e = std::move(f);
    }
    return e;
  }

  ExprPtr primary() {
    SourceLoc l = loc();
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::IntLit: {
        auto e = node(Expr::Kind::Int, l);
        auto [p, ec] = std::from_chars(t.lexeme.data(), t.lexeme.data() + t.lexeme.size(), e->ival);
        if (ec != std::errc()) {
          diags_.push_back({Severity::Error, "E_SYNTAX", "integer literal out of range", l});
          throw CompileError(diags_);
        }
        next();
        return e;
      }
      case TokenKind::NumberLit: {
        auto e = node(Expr::Kind::Number, l);
        e->num = std::strtod(t.lexeme.c_str(), nullptr);
        next();
        return e;
      }
      case TokenKind::StringLit: {
        auto e = node(Expr::Kind::String, l);
        const std::string& raw = t.lexeme;
        for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
          if (raw[i] == '\\' && i + 2 < raw.size()) {
            ++i;
            e->text += raw[i] == 'n' ? '\n' : raw[i] == 't' ? '\t' : raw[i];
          } else {
            e->text += raw[i];
          }
        }
        next();
        return e;
      }
      case TokenKind::KwTrue:
      case TokenKind::KwFalse: {
        auto e = node(Expr::Kind::Bool, l);
        e->bval = t.kind == TokenKind::KwTrue;
        next();
        return e;
      }
      case TokenKind::KwNull: next(); return node(Expr::Kind::Null, l);
      case TokenKind::KwThis: next(); return node(Expr::Kind::This, l);
      case TokenKind::Ident: {
        auto name = next().lexeme;
        if (accept(TokenKind::LParen)) {
          auto e = node(Expr::Kind::Call, l);
          e->text = name;
          if (!at(TokenKind::RParen)) {
            do e->args.push_back(expr());
            while (accept(TokenKind::Comma));
          }
          expect(TokenKind::RParen);
          return e;
        }
        auto e = node(Expr::Kind::Name, l);
        e->text = name;
        return e;
      }
      case TokenKind::LParen: {
        next();
        auto e = expr();
        expect(TokenKind::RParen);
        return e;
      }
      case TokenKind::LBrace: {
        next();
        auto e = node(Expr::Kind::SetLit, l);
        if (!at(TokenKind::RBrace)) {
          do e->args.push_back(expr());
          while (accept(TokenKind::Comma));
        }
        expect(TokenKind::RBrace);
        return e;
      }
      default:
        fail({TokenKind::IntLit, TokenKind::NumberLit, TokenKind::StringLit, TokenKind::Ident, TokenKind::LParen});
    }
  }

  void check_duplicates(const CompilationUnit& u) {
    std::set<std::string> classes;
    for (const auto& c : u.classes) {
      if (!classes.insert(c.name).second) {
        diags_.push_back({Severity::Error, "E_DUP_CLASS", "duplicate class '" + c.name + "'", c.loc});
      }
      std::set<std::string> fields;
      for (const auto& f : c.state) {
        if (!fields.insert(f.name).second) {
          diags_.push_back({Severity::Error, "E_DUP_FIELD", "duplicate field '" + f.name + "' in class " + c.name, f.loc});
        }
      }
      for (const auto& f : c.effects) {
        if (!fields.insert(f.name).second) {
          diags_.push_back({Severity::Error, "E_DUP_FIELD", "duplicate field '" + f.name + "' in class " + c.name, f.loc});
        }
      }
    }
  }

  const std::vector<Token>& toks_;
  std::size_t pos_ = 0;
  std::vector<Diagnostic> diags_;
};

}  // namespace

CompilationUnit parse_unit(const std::vector<Token>& tokens) {
  if (tokens.empty()) return {};
  return Parser(tokens).unit();
}

CompilationUnit parse_source(std::string_view source) { return parse_unit(tokenize(source)); }

ExprPtr parse_expression(std::string_view source) {
  auto toks = tokenize(source);
  return Parser(toks).lone_expression();
}

}  // namespace sgl
