#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <unordered_map>

#include "sgl/format.hpp"
#include "sgl/parser.hpp"
#include "sgl/program.hpp"

namespace sgl {

int ClassInfo::state_index(std::string_view n) const {
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state[i].name == n) return static_cast<int>(i);
  }
  return -1;
}

int ClassInfo::effect_index(std::string_view n) const {
  for (std::size_t i = 0; i < effects.size(); ++i) {
    if (effects[i].name == n) return static_cast<int>(i);
  }
  return -1;
}

int Program::class_index(std::string_view name) const {
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

const ClassInfo& Program::cls(std::string_view name) const {
  int i = class_index(name);
  if (i < 0) throw EngineError("E_UNKNOWN_CLASS", std::string(name));
  return classes[static_cast<std::size_t>(i)];
}

bool assignable(const Type& to, const Type& from) {
  if (to == from) return true;
  switch (to.kind) {
    case TypeKind::Number: return from.kind == TypeKind::Int;
    case TypeKind::Ref: return from.kind == TypeKind::Null;
    case TypeKind::Set:
      if (from.kind == TypeKind::AnySet) return true;
      return from.kind == TypeKind::Set && assignable(*to.elem, *from.elem);
    default: return false;
  }
}

namespace {

bool combinator_accepts(Combinator c, const Type& t) {
  switch (c) {
    case Combinator::Sum:
    case Combinator::Count: return t.is_numeric();
    case Combinator::Avg: return t.kind == TypeKind::Number;
    case Combinator::Min:
    case Combinator::Max: return t.is_numeric() || t.kind == TypeKind::String || t.kind == TypeKind::Ref;
    case Combinator::Or:
    case Combinator::And: return t.kind == TypeKind::Bool;
    case Combinator::SetUnion: return t.kind == TypeKind::Set;
  }
  return false;
}

bool comparable(const Type& a, const Type& b) {
  if (a.is_numeric() && b.is_numeric()) return true;
  return assignable(a, b) || assignable(b, a);
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

enum class ExprCtx { Script, Rule, Constraint, HandlerCond };

struct Binding {
  int slot = -1;
  NameRef ref = NameRef::Local;
  Type type;
};

enum class AccPhase { Block1, Readable };

struct StmtCtx {
  ClassInfo* cls = nullptr;
  std::vector<std::unordered_map<std::string, Binding>> scopes;
  std::map<int, AccPhase> acc_phase;
  std::set<int> dead;  // slots bound before a waitNextTick on the current path
  std::vector<int> loops;  // enclosing loop variable slots, innermost last
  int atomic_site = -1;
  int block1_depth = 0;
  bool in_handler = false;
  int waits = 0;
};

class Analyzer {
 public:
  Analyzer(CompilationUnit unit, const AnalyzeOptions& opts) : unit_(std::move(unit)), opts_(opts) {}

  Program run(std::vector<Diagnostic>* warnings);
  void condition(const Program& prog, int cls, Expr& e);

 private:
  CompilationUnit unit_;
  const AnalyzeOptions& opts_;
  Program prog_;
  std::vector<Diagnostic> diags_;
  int next_stmt_ = 0;
  int next_expr_ = 0;

  // expression-level context
  ExprCtx ectx_ = ExprCtx::Script;
  StmtCtx* sctx_ = nullptr;
  ClassInfo* cur_ = nullptr;
  std::set<int>* constraint_fields_ = nullptr;

  void error(SourceLoc loc, std::string code, std::string msg) {
    diags_.push_back({Severity::Error, std::move(code), std::move(msg), loc});
  }
  void warn(SourceLoc loc, std::string code, std::string msg) {
    diags_.push_back({Severity::Warning, std::move(code), std::move(msg), loc});
  }

  int find_class(std::string_view name) const;
  bool resolve_type(Type& t, SourceLoc loc);
  void declare_classes();
  bool is_constant(const Expr& e) const;
  void analyze_class_bodies();
  void check_claims();
  void analyze_scripts();
  void analyze_handlers();

  Type expr(Expr& e);
  Type name_expr(Expr& e);
  Type field_expr(Expr& e);
  Type call_expr(Expr& e);
  Type binary_expr(Expr& e);
  void expect(Expr& e, const Type& want, const char* what);

  void block(Block& b, StmtCtx& c);
  void stmt(Stmt& s, StmtCtx& c);
  void assign_stmt(Stmt& s, StmtCtx& c);
  void accum_stmt(Stmt& s, StmtCtx& c);
  void spawn_stmt(Stmt& s, StmtCtx& c);
  int bind(StmtCtx& c, const std::string& name, NameRef ref, const Type& t, SlotInfo::Kind kind, SourceLoc loc);
  const Binding* lookup(const StmtCtx& c, const std::string& name) const;
};

int Analyzer::find_class(std::string_view name) const {
  int exact = prog_.class_index(name);
  if (exact >= 0) return exact;
  // Class names in type and extent positions also match case-insensitively when unambiguous.
  int found = -1;
  std::string want = lower(name);
  for (std::size_t i = 0; i < prog_.classes.size(); ++i) {
    if (lower(prog_.classes[i].name) == want) {
      if (found >= 0) return -1;
      found = static_cast<int>(i);
    }
  }
  return found;
}

bool Analyzer::resolve_type(Type& t, SourceLoc loc) {
  if (t.kind == TypeKind::Ref) {
    int c = find_class(t.cls);
    if (c < 0) {
      error(loc, "E_UNKNOWN_CLASS", "unknown class '" + t.cls + "'");
      return false;
    }
    t.cls = prog_.classes[static_cast<std::size_t>(c)].name;
  } else if (t.kind == TypeKind::Set) {
    Type e = *t.elem;
    if (!resolve_type(e, loc)) return false;
    if (e.kind == TypeKind::Set) {
      error(loc, "E_TYPE", "nested set types are not supported");
      return false;
    }
    t = Type::set(std::move(e));
  }
  return true;
}

void Analyzer::declare_classes() {
  for (std::size_t i = 0; i < unit_.classes.size(); ++i) {
    ClassInfo ci;
    ci.name = unit_.classes[i].name;
    ci.index = static_cast<int>(i);
    prog_.classes.push_back(std::move(ci));
  }
  for (std::size_t i = 0; i < unit_.classes.size(); ++i) {
    auto& def = unit_.classes[i];
    auto& ci = prog_.classes[i];
    for (auto& d : def.state) {
      if (d.name == kTxnStatusField) {
        error(d.loc, "E_DUP_FIELD", "'" + d.name + "' is a reserved field name");
        continue;
      }
      resolve_type(d.type, d.loc);
      StateField f;
      f.name = d.name;
      f.type = d.type;
      f.init = d.init;
      ci.state.push_back(std::move(f));
    }
    ci.pc_field = static_cast<int>(ci.state.size());
    ci.state.push_back({kPcField, Type::integer(), nullptr, nullptr, true, false});
    ci.txn_status_field = static_cast<int>(ci.state.size());
    ci.state.push_back({kTxnStatusField, Type::integer(), nullptr, nullptr, true, false});

    for (auto& d : def.effects) {
      if (ci.state_index(d.name) >= 0) {
        error(d.loc, "E_DUP_FIELD", "effect '" + d.name + "' clashes with a state field");
        continue;
      }
      resolve_type(d.type, d.loc);
      if (!combinator_accepts(d.comb, d.type)) {
        error(d.loc, "E_COMBINATOR_TYPE",
              std::string("combinator ") + combinator_name(d.comb) + " does not apply to " + d.type.str());
      }
      EffectField f;
      f.name = d.name;
      f.type = d.type;
      f.comb = d.comb;
      ci.effects.push_back(std::move(f));
    }
    ci.pc_next_effect = static_cast<int>(ci.effects.size());
    ci.effects.push_back({kPcNextEffect, Type::integer(), Combinator::Max, true, false});
    ci.pc_reset_effect = static_cast<int>(ci.effects.size());
    ci.effects.push_back({kPcResetEffect, Type::integer(), Combinator::Max, true, false});
  }
}

bool Analyzer::is_constant(const Expr& e) const {
  switch (e.kind) {
    case Expr::Kind::Number:
    case Expr::Kind::Int:
    case Expr::Kind::Bool:
    case Expr::Kind::String:
    case Expr::Kind::Null: return true;
    case Expr::Kind::Unary: return e.uop == UnOp::Neg && is_constant(*e.args[0]);
    case Expr::Kind::SetLit:
      return std::all_of(e.args.begin(), e.args.end(), [&](const ExprPtr& a) { return is_constant(*a); });
    default: return false;
  }
}

const Binding* Analyzer::lookup(const StmtCtx& c, const std::string& name) const {
  for (auto it = c.scopes.rbegin(); it != c.scopes.rend(); ++it) {
    auto f = it->find(name);
    if (f != it->end()) return &f->second;
  }
  return nullptr;
}

void Analyzer::expect(Expr& e, const Type& want, const char* what) {
  Type t = expr(e);
  if (t.kind == TypeKind::Void) return;  // already reported
  if (!assignable(want, t)) {
    error(e.loc, "E_TYPE", std::string(what) + " expects " + want.str() + ", found " + t.str());
  }
}

Type Analyzer::expr(Expr& e) {
  e.id = next_expr_++;
  Type t;
  switch (e.kind) {
    case Expr::Kind::Number: t = Type::number(); break;
    case Expr::Kind::Int: t = Type::integer(); break;
    case Expr::Kind::Bool: t = Type::boolean(); break;
    case Expr::Kind::String: t = Type::string(); break;
    case Expr::Kind::Null: t = Type::null(); break;
    case Expr::Kind::This: t = Type::ref(cur_->name); break;
    case Expr::Kind::Name: t = name_expr(e); break;
    case Expr::Kind::Field: t = field_expr(e); break;
    case Expr::Kind::Unary: {
      Type x = expr(*e.args[0]);
      if (x.kind == TypeKind::Void) break;
      if (e.uop == UnOp::Not) {
        if (x.kind != TypeKind::Bool) error(e.loc, "E_TYPE", "'!' expects bool, found " + x.str());
        t = Type::boolean();
      } else {
        if (!x.is_numeric()) error(e.loc, "E_TYPE", "unary '-' expects a number, found " + x.str());
        t = x.is_numeric() ? x : Type::number();
      }
      break;
    }
    case Expr::Kind::Binary: t = binary_expr(e); break;
    case Expr::Kind::Call: t = call_expr(e); break;
    case Expr::Kind::SetLit: {
      Type elem;
      bool any = false;
      for (auto& a : e.args) {
        Type x = expr(*a);
        if (x.kind == TypeKind::Void) continue;
        if (x.kind == TypeKind::Null || x.is_set()) {
          error(a->loc, "E_TYPE", "set elements must be scalars or non-null refs");
          continue;
        }
        if (!any) {
          elem = x;
          any = true;
        } else if (assignable(elem, x)) {
        } else if (assignable(x, elem)) {
          elem = x;
        } else {
          error(a->loc, "E_TYPE", "set element type " + x.str() + " does not match " + elem.str());
        }
      }
      t = any ? Type::set(elem) : Type::any_set();
      break;
    }
  }
  e.type = t;
  return t;
}

Type Analyzer::name_expr(Expr& e) {
  if (sctx_) {
    if (const Binding* b = lookup(*sctx_, e.text)) {
      e.ref = b->ref;
      e.slot = b->slot;
      if (b->ref == NameRef::Accumulator) {
        auto ph = sctx_->acc_phase.find(b->slot);
        if (ph != sctx_->acc_phase.end() && ph->second == AccPhase::Block1) {
          error(e.loc, "E_READ_ACC_IN_BLOCK1", "accumulator '" + e.text + "' is write-only inside its loop body");
        }
      }
      if (sctx_->dead.count(b->slot)) {
        error(e.loc, "E_LOCAL_ACROSS_WAIT", "'" + e.text + "' was bound before a waitNextTick and is not live after it");
      }
      return b->type;
    }
  }
  int si = cur_->state_index(e.text);
  if (si >= 0) {
    const auto& f = cur_->state[static_cast<std::size_t>(si)];
    if (f.name == kPcField) {
      error(e.loc, "E_UNKNOWN_NAME", "unknown name '" + e.text + "'");
      return {};
    }
    e.ref = NameRef::StateField;
    e.cls = cur_->index;
    e.field = si;
    if (constraint_fields_) constraint_fields_->insert(si);
    return f.type;
  }
  int ei = cur_->effect_index(e.text);
  if (ei >= 0 && !cur_->effects[static_cast<std::size_t>(ei)].synthesized) {
    e.ref = NameRef::EffectField;
    e.cls = cur_->index;
    e.field = ei;
    if (ectx_ != ExprCtx::Rule) {
      error(e.loc, "E_READ_EFFECT", "effect '" + e.text + "' is write-only");
      return {};
    }
    return cur_->effects[static_cast<std::size_t>(ei)].type;
  }
  int ci = find_class(e.text);
  if (ci >= 0) {
    e.ref = NameRef::ClassExtent;
    e.cls = ci;
    error(e.loc, "E_TYPE", "class extent '" + e.text + "' is only valid as an accum source");
    return {};
  }
  error(e.loc, "E_UNKNOWN_NAME", "unknown name '" + e.text + "'");
  return {};
}

Type Analyzer::field_expr(Expr& e) {
  Expr& obj = *e.args[0];
  Type ot = expr(obj);
  if (ot.kind == TypeKind::Void) return {};
  if (ot.kind != TypeKind::Ref) {
    error(e.loc, "E_TYPE", "field access on non-reference " + ot.str());
    return {};
  }
  if (ectx_ == ExprCtx::Constraint && obj.kind != Expr::Kind::This) {
    error(e.loc, "E_CONSTRAINT_SCOPE", "constraints may only read the object's own state");
    return {};
  }
  int ci = prog_.class_index(ot.cls);
  const ClassInfo& target = prog_.classes[static_cast<std::size_t>(ci)];
  int si = target.state_index(e.text);
  if (si >= 0 && e.text != kPcField) {
    e.ref = NameRef::StateField;
    e.cls = ci;
    e.field = si;
    if (constraint_fields_) constraint_fields_->insert(si);
    return target.state[static_cast<std::size_t>(si)].type;
  }
  int ei = target.effect_index(e.text);
  if (ei >= 0 && !target.effects[static_cast<std::size_t>(ei)].synthesized) {
    error(e.loc, "E_READ_EFFECT", "effect '" + e.text + "' is write-only");
    return {};
  }
  error(e.loc, "E_UNKNOWN_FIELD", "class " + target.name + " has no field '" + e.text + "'");
  return {};
}

Type Analyzer::binary_expr(Expr& e) {
  Type l = expr(*e.args[0]);
  Type r = expr(*e.args[1]);
  if (l.kind == TypeKind::Void || r.kind == TypeKind::Void) {
    bool logical = e.bop == BinOp::And || e.bop == BinOp::Or || e.bop == BinOp::Eq || e.bop == BinOp::Ne ||
                   e.bop == BinOp::Lt || e.bop == BinOp::Le || e.bop == BinOp::Gt || e.bop == BinOp::Ge;
    return logical ? Type::boolean() : Type{};
  }
  auto bad = [&] {
    error(e.loc, "E_TYPE",
          std::string("operator '") + binop_text(e.bop) + "' does not apply to " + l.str() + " and " + r.str());
  };
  switch (e.bop) {
    case BinOp::And:
    case BinOp::Or:
      if (l.kind != TypeKind::Bool || r.kind != TypeKind::Bool) bad();
      return Type::boolean();
    case BinOp::Eq:
    case BinOp::Ne:
      if (!comparable(l, r)) bad();
      return Type::boolean();
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge:
      if (!((l.is_numeric() && r.is_numeric()) || (l.kind == TypeKind::String && r.kind == TypeKind::String))) bad();
      return Type::boolean();
    case BinOp::Add:
      if (l.kind == TypeKind::String && r.kind == TypeKind::String) return Type::string();
      [[fallthrough]];
    case BinOp::Sub:
    case BinOp::Mul:
      if (!l.is_numeric() || !r.is_numeric()) {
        bad();
        return {};
      }
      return l.kind == TypeKind::Int && r.kind == TypeKind::Int ? Type::integer() : Type::number();
    case BinOp::Div:
      if (!l.is_numeric() || !r.is_numeric()) {
        bad();
        return {};
      }
      return Type::number();
    case BinOp::Mod:
      if (l.kind != TypeKind::Int || r.kind != TypeKind::Int) {
        bad();
        return {};
      }
      return Type::integer();
  }
  return {};
}

Type Analyzer::call_expr(Expr& e) {
  std::vector<Type> at;
  for (auto& a : e.args) at.push_back(expr(*a));
  for (const auto& t : at) {
    if (t.kind == TypeKind::Void) return {};
  }
  auto arity = [&](std::size_t n) {
    if (e.args.size() != n) {
      error(e.loc, "E_ARITY", e.text + " takes " + std::to_string(n) + " argument(s)");
      return false;
    }
    return true;
  };
  auto numeric = [&](std::size_t i) {
    if (!at[i].is_numeric()) {
      error(e.args[i]->loc, "E_TYPE", e.text + " expects a number, found " + at[i].str());
      return false;
    }
    return true;
  };
  auto set_arg = [&](std::size_t i) {
    if (!at[i].is_set()) {
      error(e.args[i]->loc, "E_TYPE", e.text + " expects a set, found " + at[i].str());
      return false;
    }
    return true;
  };
  const std::string& f = e.text;
  if (f == "abs") {
    if (!arity(1) || !numeric(0)) return {};
    return at[0];
  }
  if (f == "sqrt" || f == "floor" || f == "toNumber") {
    if (!arity(1) || !numeric(0)) return {};
    return Type::number();
  }
  if (f == "toInt") {
    if (!arity(1) || !numeric(0)) return {};
    return Type::integer();
  }
  if (f == "min" || f == "max") {
    if (!arity(2) || !numeric(0) || !numeric(1)) return {};
    return at[0].kind == TypeKind::Int && at[1].kind == TypeKind::Int ? Type::integer() : Type::number();
  }
  if (f == "size") {
    if (!arity(1) || !set_arg(0)) return {};
    return Type::integer();
  }
  if (f == "contains") {
    if (!arity(2) || !set_arg(0)) return {};
    if (at[0].kind == TypeKind::Set && !comparable(*at[0].elem, at[1])) {
      error(e.loc, "E_TYPE", "contains: element " + at[1].str() + " vs " + at[0].str());
    }
    return Type::boolean();
  }
  if (f == "union") {
    if (!arity(2) || !set_arg(0) || !set_arg(1)) return {};
    if (at[0].kind == TypeKind::AnySet) return at[1];
    if (at[1].kind == TypeKind::AnySet) return at[0];
    if (assignable(at[0], at[1])) return at[0];
    if (assignable(at[1], at[0])) return at[1];
    error(e.loc, "E_TYPE", "union of " + at[0].str() + " and " + at[1].str());
    return {};
  }
  if (f == "random") {
    if (!arity(0)) return {};
    if (ectx_ != ExprCtx::Script || !sctx_) {
      error(e.loc, "E_TYPE", "random() is only available in scripts and handler bodies");
      return {};
    }
    e.loop_slot = sctx_->loops.empty() ? -1 : sctx_->loops.back();
    return Type::number();
  }
  if (f == "tick") {
    if (!arity(0)) return {};
    return Type::integer();
  }
  error(e.loc, "E_UNKNOWN_FUNCTION", "unknown function '" + f + "'");
  return {};
}


int Analyzer::bind(StmtCtx& c, const std::string& name, NameRef ref, const Type& t, SlotInfo::Kind kind,
                   SourceLoc loc) {
  if (lookup(c, name) || cur_->state_index(name) >= 0 || cur_->effect_index(name) >= 0) {
    error(loc, "E_SHADOW", "'" + name + "' shadows an existing name");
  }
  int slot = static_cast<int>(cur_->slots.size());
  cur_->slots.push_back({name, t, kind});
  c.scopes.back()[name] = Binding{slot, ref, t};
  return slot;
}

void Analyzer::block(Block& b, StmtCtx& c) {
  c.scopes.emplace_back();
  for (auto& s : b) stmt(*s, c);
  c.scopes.pop_back();
}

void Analyzer::stmt(Stmt& s, StmtCtx& c) {
  s.id = next_stmt_++;
  switch (s.kind) {
    case Stmt::Kind::Let: {
      Type t = expr(*s.expr);
      if (t.kind == TypeKind::Null || t.kind == TypeKind::AnySet) {
        error(s.loc, "E_TYPE", "cannot infer the type of '" + s.name + "'");
      }
      s.slot = bind(c, s.name, NameRef::Local, t, SlotInfo::Kind::Local, s.loc);
      break;
    }
    case Stmt::Kind::Assign:
    case Stmt::Kind::Insert: assign_stmt(s, c); break;
    case Stmt::Kind::If: {
      expect(*s.expr, Type::boolean(), "if condition");
      std::set<int> before = c.dead;
      block(s.body, c);
      std::set<int> after_then = std::move(c.dead);
      c.dead = std::move(before);
      block(s.orelse, c);
      c.dead.insert(after_then.begin(), after_then.end());
      break;
    }
    case Stmt::Kind::Accum: accum_stmt(s, c); break;
    case Stmt::Kind::Wait:
      if (c.in_handler) {
        error(s.loc, "E_WAIT_IN_HANDLER", "handler bodies run within a single tick");
      } else if (c.block1_depth > 0) {
        error(s.loc, "E_WAIT_IN_ACCUM", "waitNextTick is not allowed in an accum loop body");
      } else if (c.atomic_site >= 0) {
        error(s.loc, "E_WAIT_IN_ATOMIC", "waitNextTick is not allowed inside atomic");
      } else {
        s.wait_index = ++c.waits;
        for (const auto& scope : c.scopes) {
          for (const auto& [name, b] : scope) c.dead.insert(b.slot);
        }
      }
      break;
    case Stmt::Kind::Atomic: {
      if (c.atomic_site >= 0) {
        error(s.loc, "E_NESTED_ATOMIC", "atomic blocks do not nest");
        block(s.body, c);
        break;
      }
      c.atomic_site = s.id;
      s.txn_site = s.id;
      block(s.body, c);
      c.atomic_site = -1;
      break;
    }
    case Stmt::Kind::Spawn: spawn_stmt(s, c); break;
    case Stmt::Kind::Destroy: {
      Type t = expr(*s.expr);
      if (t.kind != TypeKind::Void && t.kind != TypeKind::Ref) {
        error(s.loc, "E_TYPE", "destroy expects a reference, found " + t.str());
      }
      if (t.kind == TypeKind::Ref) s.target_cls = prog_.class_index(t.cls);
      s.txn_site = c.atomic_site;
      break;
    }
    case Stmt::Kind::Restart:
      if (c.block1_depth > 0) error(s.loc, "E_RESTART_IN_ACCUM", "restart is not allowed in an accum loop body");
      if (c.atomic_site >= 0) error(s.loc, "E_RESTART_IN_ATOMIC", "restart is not allowed inside atomic");
      break;
  }
}

void Analyzer::assign_stmt(Stmt& s, StmtCtx& c) {
  Expr& tgt = *s.target;
  tgt.id = next_expr_++;
  Type target_type;
  bool effect = false;
  Combinator comb = Combinator::Sum;
  bool ok = true;
  if (tgt.kind == Expr::Kind::Name) {
    if (const Binding* b = lookup(c, tgt.text)) {
      tgt.ref = b->ref;
      tgt.slot = b->slot;
      if (b->ref != NameRef::Accumulator) {
        error(tgt.loc, "E_WRITE_LOCAL", "'" + tgt.text + "' is not assignable");
        ok = false;
      } else {
        auto ph = c.acc_phase.find(b->slot);
        if (ph == c.acc_phase.end() || ph->second != AccPhase::Block1) {
          error(tgt.loc, "E_WRITE_ACC_OUTSIDE_BLOCK1", "accumulator '" + tgt.text + "' is read-only here");
          ok = false;
        }
        s.to_accumulator = true;
        s.slot = b->slot;
        target_type = b->type;  // insert-vs-combinator is checked by the owning accum statement
      }
    } else if (int si = cur_->state_index(tgt.text); si >= 0) {
      error(tgt.loc, "E_WRITE_STATE", "state field '" + tgt.text + "' is read-only in scripts");
      ok = false;
    } else if (int ei = cur_->effect_index(tgt.text); ei >= 0 && !cur_->effects[static_cast<std::size_t>(ei)].synthesized) {
      tgt.ref = NameRef::EffectField;
      tgt.cls = cur_->index;
      tgt.field = ei;
      const auto& f = cur_->effects[static_cast<std::size_t>(ei)];
      target_type = f.type;
      comb = f.comb;
      effect = true;
      s.target_cls = cur_->index;
      s.target_field = ei;
    } else {
      error(tgt.loc, "E_UNKNOWN_NAME", "unknown name '" + tgt.text + "'");
      ok = false;
    }
  } else {
    Expr& obj = *tgt.args[0];
    Type ot = expr(obj);
    if (ot.kind == TypeKind::Void) {
      ok = false;
    } else if (ot.kind != TypeKind::Ref) {
      error(tgt.loc, "E_TYPE", "effect target must be a reference, found " + ot.str());
      ok = false;
    } else {
      int ci = prog_.class_index(ot.cls);
      const ClassInfo& target = prog_.classes[static_cast<std::size_t>(ci)];
      int ei = target.effect_index(tgt.text);
      if (ei >= 0 && !target.effects[static_cast<std::size_t>(ei)].synthesized) {
        tgt.ref = NameRef::EffectField;
        tgt.cls = ci;
        tgt.field = ei;
        target_type = target.effects[static_cast<std::size_t>(ei)].type;
        comb = target.effects[static_cast<std::size_t>(ei)].comb;
        effect = true;
        s.target_cls = ci;
        s.target_field = ei;
      } else if (target.state_index(tgt.text) >= 0) {
        error(tgt.loc, "E_WRITE_STATE", "state field '" + tgt.text + "' is read-only in scripts");
        ok = false;
      } else {
        error(tgt.loc, "E_UNKNOWN_FIELD", "class " + target.name + " has no field '" + tgt.text + "'");
        ok = false;
      }
    }
  }
  tgt.type = target_type;

  if (!ok) {
    expr(*s.expr);
    return;
  }
  if (s.kind == Stmt::Kind::Insert) {
    bool set_target = target_type.kind == TypeKind::Set && (!effect || comb == Combinator::SetUnion);
    if (!set_target) {
      error(s.loc, "E_INSERT_TARGET", "'<=' requires a setUnion effect or set accumulator");
      expr(*s.expr);
    } else {
      expect(*s.expr, *target_type.elem, "set insert");
    }
  } else {
    expect(*s.expr, target_type, "assignment");
  }
  if (effect) {
    if (c.atomic_site >= 0) {
      s.txn_site = c.atomic_site;
    } else if (prog_.classes[static_cast<std::size_t>(s.target_cls)].effects[static_cast<std::size_t>(s.target_field)]
                   .transactional) {
      s.txn_site = s.id;  // stray write to a constrained field's input: singleton transaction
    }
  }
}

void Analyzer::accum_stmt(Stmt& s, StmtCtx& c) {
  bool types_ok = resolve_type(s.acc_type, s.loc) & resolve_type(s.loop_type, s.loc);
  if (types_ok && !combinator_accepts(s.acc_comb, s.acc_type)) {
    error(s.loc, "E_COMBINATOR_TYPE",
          std::string("combinator ") + combinator_name(s.acc_comb) + " does not apply to " + s.acc_type.str());
  }
  // source
  Expr& src = *s.expr;
  Type elem;
  bool have_elem = false;
  int extent = -1;
  if (src.kind == Expr::Kind::Name && !lookup(c, src.text) && cur_->state_index(src.text) < 0 &&
      cur_->effect_index(src.text) < 0 && (extent = find_class(src.text)) >= 0) {
    src.id = next_expr_++;
    src.ref = NameRef::ClassExtent;
    src.cls = extent;
    elem = Type::ref(prog_.classes[static_cast<std::size_t>(extent)].name);
    src.type = Type::set(elem);
    have_elem = true;
  } else {
    Type st = expr(src);
    if (st.kind == TypeKind::Set) {
      elem = *st.elem;
      have_elem = true;
    } else if (st.kind != TypeKind::AnySet && st.kind != TypeKind::Void) {
      error(src.loc, "E_TYPE", "accum source must be a set or class extent, found " + st.str());
    }
  }
  if (types_ok && have_elem && !(elem == s.loop_type)) {
    error(s.loc, "E_TYPE", "loop variable declared " + s.loop_type.str() + " but source yields " + elem.str());
  }
  if (s.name == s.loop_var) error(s.loc, "E_SHADOW", "accumulator and loop variable share a name");

  c.scopes.emplace_back();  // accumulator scope spans both blocks
  s.slot = bind(c, s.name, NameRef::Accumulator, s.acc_type, SlotInfo::Kind::Accumulator, s.loc);
  c.acc_phase[s.slot] = AccPhase::Block1;

  c.scopes.emplace_back();
  s.loop_slot = bind(c, s.loop_var, NameRef::LoopVar, s.loop_type, SlotInfo::Kind::LoopVar, s.loc);
  c.loops.push_back(s.loop_slot);
  ++c.block1_depth;
  block(s.body, c);
  --c.block1_depth;
  c.loops.pop_back();
  c.scopes.pop_back();

  c.acc_phase[s.slot] = AccPhase::Readable;
  block(s.orelse, c);
  c.scopes.pop_back();

  // Accumulator combinator checks for its assignments inside block1.
  std::vector<Stmt*> stack;
  for (auto& b : s.body) stack.push_back(b.get());
  while (!stack.empty()) {
    Stmt* x = stack.back();
    stack.pop_back();
    if ((x->kind == Stmt::Kind::Insert) && x->to_accumulator && x->slot == s.slot &&
        s.acc_comb != Combinator::SetUnion) {
      error(x->loc, "E_INSERT_TARGET", "'<=' requires a setUnion accumulator");
    }
    for (auto& b : x->body) stack.push_back(b.get());
    for (auto& b : x->orelse) stack.push_back(b.get());
  }
}

void Analyzer::spawn_stmt(Stmt& s, StmtCtx& c) {
  int ci = find_class(s.spawn_class);
  s.txn_site = c.atomic_site;
  if (ci < 0) {
    error(s.loc, "E_UNKNOWN_CLASS", "unknown class '" + s.spawn_class + "'");
    for (auto& [n, e] : s.spawn_inits) expr(*e);
    return;
  }
  s.target_cls = ci;
  const ClassInfo& target = prog_.classes[static_cast<std::size_t>(ci)];
  std::set<std::string> seen;
  for (auto& [n, e] : s.spawn_inits) {
    int si = target.state_index(n);
    if (si < 0 || target.state[static_cast<std::size_t>(si)].synthesized) {
      error(e->loc, "E_UNKNOWN_FIELD", "class " + target.name + " has no state field '" + n + "'");
      expr(*e);
      s.spawn_fields.push_back(-1);
      continue;
    }
    if (!seen.insert(n).second) error(e->loc, "E_DUP_FIELD", "field '" + n + "' initialized twice");
    expect(*e, target.state[static_cast<std::size_t>(si)].type, "spawn field");
    s.spawn_fields.push_back(si);
  }
}

void collect_effect_reads(const Expr& e, std::set<int>& out) {
  if (e.kind == Expr::Kind::Name && e.ref == NameRef::EffectField) out.insert(e.field);
  for (const auto& a : e.args) collect_effect_reads(*a, out);
}

void Analyzer::analyze_class_bodies() {
  for (std::size_t i = 0; i < unit_.classes.size(); ++i) {
    auto& def = unit_.classes[i];
    auto& ci = prog_.classes[i];
    cur_ = &ci;
    sctx_ = nullptr;
    ci.slots.push_back({"this", Type::ref(ci.name), SlotInfo::Kind::This});

    ectx_ = ExprCtx::Rule;
    for (auto& f : ci.state) {
      if (!f.init) continue;
      if (!is_constant(*f.init)) {
        error(f.init->loc, "E_NONCONST_INIT", "initializer of '" + f.name + "' must be a constant");
        continue;
      }
      expect(*f.init, f.type, "initializer");
    }

    ectx_ = ExprCtx::Constraint;
    for (auto& k : def.constraints) {
      std::set<int> used;
      constraint_fields_ = &used;
      expect(*k, Type::boolean(), "constraint");
      constraint_fields_ = nullptr;
      for (int f : used) {
        auto& sf = ci.state[static_cast<std::size_t>(f)];
        if (sf.synthesized) {
          error(k->loc, "E_CONSTRAINT_SCOPE", "constraints may not reference '" + sf.name + "'");
        } else {
          sf.constrained = true;
        }
      }
      ci.constraints.push_back(k);
    }

    ectx_ = ExprCtx::Rule;
    for (auto& r : def.rules) {
      int si = ci.state_index(r.field);
      if (si < 0 || ci.state[static_cast<std::size_t>(si)].synthesized) {
        error(r.loc, ci.effect_index(r.field) >= 0 ? "E_RULE_TARGET" : "E_UNKNOWN_FIELD",
              "update rules assign declared state fields; '" + r.field + "' is not one");
        expr(*r.expr);
        continue;
      }
      auto& sf = ci.state[static_cast<std::size_t>(si)];
      if (sf.rule) {
        error(r.loc, "E_DUP_RULE", "second update rule for '" + r.field + "'");
        continue;
      }
      expect(*r.expr, sf.type, "update rule");
      sf.rule = r.expr;
      if (sf.constrained) {
        std::set<int> reads;
        collect_effect_reads(*r.expr, reads);
        for (int e : reads) ci.effects[static_cast<std::size_t>(e)].transactional = true;
      }
    }
  }
  cur_ = nullptr;
}

void Analyzer::check_claims() {
  std::set<std::pair<int, int>> claimed;
  for (const auto& claim : opts_.claims) {
    int ci = prog_.class_index(claim.cls);
    if (ci < 0) {
      error({}, "E_UNKNOWN_CLASS", "component " + claim.component + " claims unknown class '" + claim.cls + "'");
      continue;
    }
    auto& cls = prog_.classes[static_cast<std::size_t>(ci)];
    for (const auto& f : claim.fields) {
      int si = cls.state_index(f);
      if (si < 0) {
        error({}, "E_UNKNOWN_FIELD", "component " + claim.component + " claims unknown field " + claim.cls + "." + f);
        continue;
      }
      const auto& sf = cls.state[static_cast<std::size_t>(si)];
      if (sf.synthesized || sf.rule || sf.constrained || !claimed.insert({ci, si}).second) {
        error({}, "E_UNPARTITIONED_STATE",
              "state field " + claim.cls + "." + f + " is claimed by more than one update component");
      }
    }
  }
}

void Analyzer::analyze_scripts() {
  for (auto& sd : unit_.scripts) {
    int ci = find_class(sd.cls);
    if (ci < 0) {
      error(sd.loc, "E_UNKNOWN_CLASS", "unknown class '" + sd.cls + "'");
      continue;
    }
    auto& cls = prog_.classes[static_cast<std::size_t>(ci)];
    if (cls.has_script) {
      error(sd.loc, "E_DUP_SCRIPT", "class " + cls.name + " already has a script");
      continue;
    }
    cls.has_script = true;
    cls.script_name = sd.name;
    cur_ = &cls;
    StmtCtx c;
    c.cls = &cls;
    sctx_ = &c;
    ectx_ = ExprCtx::Script;
    block(sd.body, c);
    cls.body = sd.body;
    cls.wait_count = c.waits;
  }
  for (auto& cls : prog_.classes) cls.end_stmt_id = next_stmt_++;
  sctx_ = nullptr;
  cur_ = nullptr;
}

void Analyzer::analyze_handlers() {
  for (auto& h : unit_.handlers) {
    int ci = find_class(h.cls);
    h.id = next_stmt_++;
    if (ci < 0) {
      error(h.loc, "E_UNKNOWN_CLASS", "unknown class '" + h.cls + "'");
      continue;
    }
    auto& cls = prog_.classes[static_cast<std::size_t>(ci)];
    cur_ = &cls;
    StmtCtx cond_ctx;
    cond_ctx.cls = &cls;
    sctx_ = &cond_ctx;
    ectx_ = ExprCtx::HandlerCond;
    expect(*h.cond, Type::boolean(), "handler condition");
    StmtCtx c;
    c.cls = &cls;
    c.in_handler = true;
    sctx_ = &c;
    ectx_ = ExprCtx::Script;
    block(h.body, c);
    h.cls = cls.name;
    cls.handlers.push_back(h);
  }
  sctx_ = nullptr;
  cur_ = nullptr;
}

Program Analyzer::run(std::vector<Diagnostic>* warnings) {
  declare_classes();
  analyze_class_bodies();
  check_claims();
  analyze_scripts();
  analyze_handlers();
  prog_.stmt_count = next_stmt_;
  prog_.expr_count = next_expr_;
  if (has_errors(diags_)) throw CompileError(diags_);
  if (warnings) *warnings = diags_;
  return std::move(prog_);
}

void Analyzer::condition(const Program& prog, int cls, Expr& e) {
  prog_.classes = prog.classes;
  cur_ = &prog_.classes[static_cast<std::size_t>(cls)];
  sctx_ = nullptr;
  ectx_ = ExprCtx::Constraint;
  expect(e, Type::boolean(), "condition");
  cur_ = nullptr;
  if (has_errors(diags_)) throw CompileError(diags_);
}

}  // namespace

ExprPtr analyze_condition(const Program& prog, int cls, std::string_view text) {
  ExprPtr e = parse_expression(text);
  AnalyzeOptions opts;
  Analyzer a(CompilationUnit{}, opts);
  a.condition(prog, cls, *e);
  return e;
}

Program check_access(CompilationUnit unit, const AnalyzeOptions& opts, std::vector<Diagnostic>* warnings) {
  CompilationUnit original = clone(unit);
  Analyzer a(std::move(unit), opts);
  Program p = a.run(warnings);
  Hasher h;
  h.str(format_ast(original));
  p.hash = h.digest();
  p.source = std::move(original);
  return p;
}

Program compile_program(std::string_view source, const AnalyzeOptions& opts) {
  return check_access(parse_source(source), opts);
}

}  // namespace sgl
