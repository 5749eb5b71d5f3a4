#include "sgl/lowering.hpp"

#include <map>

namespace sgl {

namespace {

bool has_terminator(const Block& b);

bool has_terminator(const Stmt& s) {
  if (s.kind == Stmt::Kind::Wait || s.kind == Stmt::Kind::Restart) return true;
  return has_terminator(s.body) || has_terminator(s.orelse);
}

bool has_terminator(const Block& b) {
  for (const auto& s : b) {
    if (has_terminator(*s)) return true;
  }
  return false;
}

ExprPtr int_lit(Program& p, std::int64_t v) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Int;
  e->ival = v;
  e->type = Type::integer();
  e->id = p.expr_count++;
  return e;
}

StmtPtr pc_emit(Program& p, const ClassInfo& c, int effect, std::int64_t value, int stmt_id) {
  auto t = std::make_shared<Expr>();
  t->kind = Expr::Kind::Name;
  t->text = c.effects[static_cast<std::size_t>(effect)].name;
  t->ref = NameRef::EffectField;
  t->cls = c.index;
  t->field = effect;
  t->type = Type::integer();
  t->id = p.expr_count++;
  auto s = std::make_shared<Stmt>();
  s->kind = Stmt::Kind::Assign;
  s->target = t;
  s->expr = int_lit(p, value);
  s->id = stmt_id;
  s->target_cls = c.index;
  s->target_field = effect;
  return s;
}

Block expand(const Block& b, const Block& prelude) {
  Block out;
  for (const auto& s : b) {
    if (s->kind == Stmt::Kind::Wait) {
      out.push_back(s);
      out.insert(out.end(), prelude.begin(), prelude.end());
    } else if ((s->kind == Stmt::Kind::If || s->kind == Stmt::Kind::Accum) && contains_wait(*s)) {
      auto n = std::make_shared<Stmt>(*s);
      if (s->kind == Stmt::Kind::If) n->body = expand(s->body, prelude);
      n->orelse = expand(s->orelse, prelude);
      out.push_back(n);
    } else {
      out.push_back(s);
    }
  }
  return out;
}

class Splitter {
 public:
  Splitter(Program& p, const ClassInfo& c, bool waits) : p_(p), c_(c), waits_(waits) {}

  void collect(const Block& b, const Block& after, std::map<int, Block>& conts) const {
    for (std::size_t i = 0; i < b.size(); ++i) {
      const Stmt& s = *b[i];
      Block rest(b.begin() + static_cast<std::ptrdiff_t>(i) + 1, b.end());
      rest.insert(rest.end(), after.begin(), after.end());
      if (s.kind == Stmt::Kind::Wait) {
        conts[s.wait_index] = rest;
      } else if (s.kind == Stmt::Kind::If) {
        collect(s.body, rest, conts);
        collect(s.orelse, rest, conts);
      } else if (s.kind == Stmt::Kind::Accum) {
        collect(s.orelse, rest, conts);
      }
    }
  }

  Block transform(const Block& xs) {
    Block out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const StmtPtr& s = xs[i];
      auto rest = [&](const Block& head) {
        Block r = head;
        r.insert(r.end(), xs.begin() + static_cast<std::ptrdiff_t>(i) + 1, xs.end());
        return r;
      };
      switch (s->kind) {
        case Stmt::Kind::Wait:
          out.push_back(pc_emit(p_, c_, c_.pc_next_effect, s->wait_index, s->id));
          return out;
        case Stmt::Kind::Restart:
          out.push_back(pc_emit(p_, c_, c_.pc_reset_effect, 0, s->id));
          return out;
        case Stmt::Kind::If:
          if (has_terminator(*s)) {
            auto n = std::make_shared<Stmt>(*s);
            n->body = transform(rest(s->body));
            n->orelse = transform(rest(s->orelse));
            out.push_back(n);
            return out;
          }
          break;
        case Stmt::Kind::Accum:
          if (has_terminator(s->orelse)) {
            auto n = std::make_shared<Stmt>(*s);
            n->orelse = transform(rest(s->orelse));
            out.push_back(n);
            return out;
          }
          break;
        default: break;
      }
      out.push_back(s);
    }
    if (waits_) out.push_back(pc_emit(p_, c_, c_.pc_next_effect, 0, c_.end_stmt_id));
    return out;
  }

 private:
  Program& p_;
  const ClassInfo& c_;
  bool waits_;
};

}  // namespace

CompilationUnit lower_handlers(Program& prog) {
  CompilationUnit out;
  out.classes = prog.source.classes;
  for (const auto& c : prog.classes) {
    if (!c.has_script && c.handlers.empty()) continue;
    Block prelude;
    for (const auto& h : c.handlers) {
      auto s = std::make_shared<Stmt>();
      s->kind = Stmt::Kind::If;
      s->loc = h.loc;
      s->expr = h.cond;
      s->body = h.body;
      s->id = h.id;
      if (h.may_restart) {
        auto r = std::make_shared<Stmt>();
        r->kind = Stmt::Kind::Restart;
        r->loc = h.loc;
        r->id = h.id;
        s->body.push_back(r);
      }
      prelude.push_back(s);
    }
    ScriptDef sd;
    sd.name = c.has_script ? c.script_name : "handlers";
    sd.cls = c.name;
    sd.body = prelude;
    Block rest = expand(c.body, prelude);
    sd.body.insert(sd.body.end(), rest.begin(), rest.end());
    out.scripts.push_back(std::move(sd));
  }
  return out;
}

LoweredScript lower_multitick(Program& prog, int cls, const Block& body) {
  const ClassInfo& c = prog.classes[static_cast<std::size_t>(cls)];
  LoweredScript ls;
  ls.cls = cls;
  bool waits = contains_wait(body);
  Splitter sp(prog, c, waits);
  ls.segments.push_back(sp.transform(body));
  if (!waits) {
    ls.body = ls.segments[0];
    return ls;
  }
  std::map<int, Block> conts;
  sp.collect(body, {}, conts);
  for (const auto& [j, rest] : conts) {
    (void)j;
    ls.segments.push_back(sp.transform(rest));
  }
  // if (_pc == 0) {...} else if (_pc == 1) {...} ... ; unknown pc values run nothing
  StmtPtr chain;
  for (std::size_t j = ls.segments.size(); j-- > 0;) {
    auto pc = std::make_shared<Expr>();
    pc->kind = Expr::Kind::Name;
    pc->text = kPcField;
    pc->ref = NameRef::StateField;
    pc->cls = cls;
    pc->field = c.pc_field;
    pc->type = Type::integer();
    pc->id = prog.expr_count++;
    auto cond = std::make_shared<Expr>();
    cond->kind = Expr::Kind::Binary;
    cond->bop = BinOp::Eq;
    cond->args = {pc, int_lit(prog, static_cast<std::int64_t>(j))};
    cond->type = Type::boolean();
    cond->id = prog.expr_count++;
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::If;
    s->expr = cond;
    s->body = ls.segments[j];
    s->id = c.end_stmt_id;
    if (chain) s->orelse = {chain};
    chain = s;
  }
  ls.body = {chain};
  return ls;
}

std::vector<LoweredScript> lower_program(Program& prog) {
  CompilationUnit unit = lower_handlers(prog);
  std::vector<LoweredScript> out(prog.classes.size());
  for (std::size_t i = 0; i < prog.classes.size(); ++i) out[i].cls = static_cast<int>(i);
  for (const auto& sd : unit.scripts) {
    int ci = prog.class_index(sd.cls);
    out[static_cast<std::size_t>(ci)] = lower_multitick(prog, ci, sd.body);
  }
  return out;
}

}  // namespace sgl
