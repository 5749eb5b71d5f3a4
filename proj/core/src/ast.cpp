#include "sgl/ast.hpp"

namespace sgl {

std::string Type::str() const {
  switch (kind) {
    case TypeKind::Void: return "void";
    case TypeKind::Number: return "number";
    case TypeKind::Int: return "int";
    case TypeKind::Bool: return "bool";
    case TypeKind::String: return "string";
    case TypeKind::Ref: return "ref<" + cls + ">";
    case TypeKind::Set: return "set<" + elem->str() + ">";
    case TypeKind::Null: return "null";
    case TypeKind::AnySet: return "set<?>";
  }
  return "?";
}

bool operator==(const Type& a, const Type& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == TypeKind::Ref) return a.cls == b.cls;
  if (a.kind == TypeKind::Set) return *a.elem == *b.elem;
  return true;
}

const char* binop_text(BinOp op) {
  switch (op) {
    case BinOp::Or: return "||";
    case BinOp::And: return "&&";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "%";
  }
  return "?";
}

namespace {

bool eq_ptr(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return ast_equal(*a, *b);
}

bool stmt_equal(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind || a.name != b.name) return false;
  if (!eq_ptr(a.target, b.target) || !eq_ptr(a.expr, b.expr)) return false;
  if (!ast_equal(a.body, b.body) || !ast_equal(a.orelse, b.orelse)) return false;
  if (a.kind == Stmt::Kind::Accum) {
    if (!(a.acc_type == b.acc_type) || a.acc_comb != b.acc_comb || !(a.loop_type == b.loop_type) ||
        a.loop_var != b.loop_var) {
      return false;
    }
  }
  if (a.kind == Stmt::Kind::Spawn) {
    if (a.spawn_class != b.spawn_class || a.spawn_inits.size() != b.spawn_inits.size()) return false;
    for (std::size_t i = 0; i < a.spawn_inits.size(); ++i) {
      if (a.spawn_inits[i].first != b.spawn_inits[i].first) return false;
      if (!eq_ptr(a.spawn_inits[i].second, b.spawn_inits[i].second)) return false;
    }
  }
  return true;
}

}  // namespace

bool ast_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::Number:
      if (!(a.num == b.num || (a.num != a.num && b.num != b.num))) return false;
      break;
    case Expr::Kind::Int: if (a.ival != b.ival) return false; break;
    case Expr::Kind::Bool: if (a.bval != b.bval) return false; break;
    case Expr::Kind::String:
    case Expr::Kind::Name:
    case Expr::Kind::Field:
    case Expr::Kind::Call:
      if (a.text != b.text) return false;
      break;
    case Expr::Kind::Unary: if (a.uop != b.uop) return false; break;
    case Expr::Kind::Binary: if (a.bop != b.bop) return false; break;
    default: break;
  }
  if (a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!eq_ptr(a.args[i], b.args[i])) return false;
  }
  return true;
}

bool ast_equal(const Block& a, const Block& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!stmt_equal(*a[i], *b[i])) return false;
  }
  return true;
}

bool ast_equal(const CompilationUnit& a, const CompilationUnit& b) {
  if (a.classes.size() != b.classes.size() || a.scripts.size() != b.scripts.size() ||
      a.handlers.size() != b.handlers.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.classes.size(); ++i) {
    const auto& x = a.classes[i];
    const auto& y = b.classes[i];
    if (x.name != y.name || x.state.size() != y.state.size() || x.effects.size() != y.effects.size() ||
        x.rules.size() != y.rules.size() || x.constraints.size() != y.constraints.size()) {
      return false;
    }
    for (std::size_t k = 0; k < x.state.size(); ++k) {
      if (x.state[k].name != y.state[k].name || !(x.state[k].type == y.state[k].type) ||
          !eq_ptr(x.state[k].init, y.state[k].init)) {
        return false;
      }
    }
    for (std::size_t k = 0; k < x.effects.size(); ++k) {
      if (x.effects[k].name != y.effects[k].name || !(x.effects[k].type == y.effects[k].type) ||
          x.effects[k].comb != y.effects[k].comb) {
        return false;
      }
    }
    for (std::size_t k = 0; k < x.rules.size(); ++k) {
      if (x.rules[k].field != y.rules[k].field || !eq_ptr(x.rules[k].expr, y.rules[k].expr)) return false;
    }
    for (std::size_t k = 0; k < x.constraints.size(); ++k) {
      if (!eq_ptr(x.constraints[k], y.constraints[k])) return false;
    }
  }
  for (std::size_t i = 0; i < a.scripts.size(); ++i) {
    const auto& x = a.scripts[i];
    const auto& y = b.scripts[i];
    if (x.name != y.name || x.cls != y.cls || !ast_equal(x.body, y.body)) return false;
  }
  for (std::size_t i = 0; i < a.handlers.size(); ++i) {
    const auto& x = a.handlers[i];
    const auto& y = b.handlers[i];
    if (x.cls != y.cls || x.may_restart != y.may_restart || !eq_ptr(x.cond, y.cond) || !ast_equal(x.body, y.body)) {
      return false;
    }
  }
  return true;
}

ExprPtr clone(const ExprPtr& e) {
  if (!e) return nullptr;
  auto c = std::make_shared<Expr>(*e);
  for (auto& a : c->args) a = clone(a);
  return c;
}

StmtPtr clone(const StmtPtr& s) {
  if (!s) return nullptr;
  auto c = std::make_shared<Stmt>(*s);
  c->target = clone(s->target);
  c->expr = clone(s->expr);
  c->body = clone(s->body);
  c->orelse = clone(s->orelse);
  for (auto& [name, e] : c->spawn_inits) e = clone(e);
  return c;
}

Block clone(const Block& b) {
  Block out;
  out.reserve(b.size());
  for (const auto& s : b) out.push_back(clone(s));
  return out;
}

CompilationUnit clone(const CompilationUnit& u) {
  CompilationUnit c = u;
  for (auto& cls : c.classes) {
    for (auto& f : cls.state) f.init = clone(f.init);
    for (auto& r : cls.rules) r.expr = clone(r.expr);
    for (auto& k : cls.constraints) k = clone(k);
  }
  for (auto& s : c.scripts) s.body = clone(s.body);
  for (auto& h : c.handlers) {
    h.cond = clone(h.cond);
    h.body = clone(h.body);
  }
  return c;
}

bool contains_wait(const Stmt& s) {
  if (s.kind == Stmt::Kind::Wait) return true;
  return contains_wait(s.body) || contains_wait(s.orelse);
}

bool contains_wait(const Block& b) {
  for (const auto& s : b) {
    if (contains_wait(*s)) return true;
  }
  return false;
}

}  // namespace sgl
