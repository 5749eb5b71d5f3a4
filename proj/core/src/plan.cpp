#include "sgl/plan.hpp"

#include <cmath>
#include <map>
#include <set>

#include "json_util.hpp"
#include "sgl/format.hpp"

namespace sgl {

const char* op_name(OpKind k) {
  switch (k) {
    case OpKind::TableScan: return "TableScan";
    case OpKind::IndexRangeScan: return "IndexRangeScan";
    case OpKind::Select: return "Select";
    case OpKind::Project: return "Project";
    case OpKind::ThetaJoin: return "ThetaJoin";
    case OpKind::Unnest: return "Unnest";
    case OpKind::GroupAggregate: return "GroupAggregate";
    case OpKind::Map: return "Map";
    case OpKind::EffectEmit: return "EffectEmit";
  }
  return "?";
}

const char* profile_name(Profile p) { return p == Profile::Uniform ? "uniform" : "clustered"; }

double assumed_fanout(Profile p, double inner) {
  return p == Profile::Uniform ? std::min(inner, 4.0) : 0.5 * inner;
}

double scan_cost(double outer, double inner) { return outer * inner; }

double index_cost(double outer, double inner, int dims, double fanout) {
  double lg = std::log2(std::max(inner, 2.0));
  return outer * (2.0 * std::pow(lg, dims) + 3.0 * fanout);
}

namespace {

/// Left-to-right evaluation order of an `&&` chain.
void conjuncts(const ExprPtr& e, std::vector<ExprPtr>& out) {
  if (e->kind == Expr::Kind::Binary && e->bop == BinOp::And) {
    conjuncts(e->args[0], out);
    conjuncts(e->args[1], out);
    return;
  }
  out.push_back(e);
}

bool mentions_slot(const Expr& e, int slot) {
  if (e.kind == Expr::Kind::Name && e.slot == slot && e.ref != NameRef::StateField && e.ref != NameRef::EffectField) return true;
  if (e.kind == Expr::Kind::Call && e.text == "random") return true;
  for (const auto& a : e.args) {
    if (mentions_slot(*a, slot)) return true;
  }
  return false;
}

class PlanCompiler {
 public:
  PlanCompiler(const Program& prog, int cls) : prog_(prog), cls_(cls) {}

  PlanTemplate run(const LoweredScript& script) {
    tmpl_.cls = cls_;
    tmpl_.scan_node = add(OpKind::TableScan, state_table_name(prog_.classes[static_cast<std::size_t>(cls_)].name), "self", {});
    tmpl_.steps = block(script.body, tmpl_.scan_node, 0);
    return std::move(tmpl_);
  }

 private:
  const Program& prog_;
  int cls_;
  PlanTemplate tmpl_;
  std::set<int> extent_slots_;
  std::map<int, int> acc_depth_;
  std::map<int, std::vector<int>> acc_projects_;

  int add(OpKind k, std::string table, std::string detail, std::vector<int> inputs) {
    OpNode n;
    n.id = static_cast<int>(tmpl_.nodes.size());
    n.kind = k;
    n.table = std::move(table);
    n.detail = std::move(detail);
    n.inputs = std::move(inputs);
    tmpl_.nodes.push_back(std::move(n));
    return tmpl_.nodes.back().id;
  }

  [[noreturn]] void uncompilable(const Stmt& s, const std::string& what) {
    throw CompileError({{Severity::Error, "E_UNCOMPILABLE", what + " has no relational translation", s.loc}});
  }

  bool fault_free(const Expr& e) const {
    switch (e.kind) {
      case Expr::Kind::Number:
      case Expr::Kind::Int:
      case Expr::Kind::Bool:
      case Expr::Kind::String:
      case Expr::Kind::Null:
      case Expr::Kind::This: return true;
      case Expr::Kind::Name: return e.ref == NameRef::StateField || e.ref == NameRef::Local || e.ref == NameRef::LoopVar;
      case Expr::Kind::Field: {
        const Expr& obj = *e.args[0];
        if (obj.kind == Expr::Kind::This) return true;
        return obj.kind == Expr::Kind::Name && obj.ref == NameRef::LoopVar && extent_slots_.count(obj.slot) > 0;
      }
      case Expr::Kind::Unary: return fault_free(*e.args[0]);
      case Expr::Kind::Binary:
        if (e.bop == BinOp::Div || e.bop == BinOp::Mod) return false;
        return fault_free(*e.args[0]) && fault_free(*e.args[1]);
      case Expr::Kind::Call:
        if (e.text == "toInt") return false;
        [[fallthrough]];
      case Expr::Kind::SetLit:
        for (const auto& a : e.args) {
          if (!fault_free(*a)) return false;
        }
        return true;
    }
    return false;
  }

  /// `u.f op bound` or `bound op u.f` with f a number field of the loop
  /// variable; appends the bound to `info`.
  bool box_bound(const Expr& c, JoinInfo& info) const {
    if (c.kind != Expr::Kind::Binary) return false;
    BinOp op = c.bop;
    if (op != BinOp::Lt && op != BinOp::Le && op != BinOp::Gt && op != BinOp::Ge && op != BinOp::Eq) return false;
    auto is_dim = [&](const Expr& x) {
      return x.kind == Expr::Kind::Field && x.args[0]->kind == Expr::Kind::Name && x.args[0]->ref == NameRef::LoopVar &&
             x.args[0]->slot == info.loop_slot && x.type.kind == TypeKind::Number;
    };
    auto is_bound = [&](const Expr& x) { return x.type.is_numeric() && fault_free(x) && !mentions_slot(x, info.loop_slot); };
    const Expr* dim = nullptr;
    ExprPtr bound;
    bool dim_left = false;
    if (is_dim(*c.args[0]) && is_bound(*c.args[1])) {
      dim = c.args[0].get();
      bound = c.args[1];
      dim_left = true;
    } else if (is_dim(*c.args[1]) && is_bound(*c.args[0])) {
      dim = c.args[1].get();
      bound = c.args[0];
    } else {
      return false;
    }
    std::vector<bool> lowers;
    if (op == BinOp::Eq) {
      lowers = {true, false};
    } else {
      bool greater = op == BinOp::Gt || op == BinOp::Ge;
      lowers = {greater == dim_left};
    }
    std::size_t k = 0;
    while (k < info.dims.size() && info.dims[k] != dim->field) ++k;
    if (k == info.dims.size()) {
      if (info.dims.size() == 4) return false;
      info.dims.push_back(dim->field);
      info.bounds.emplace_back();
    }
    for (bool lo : lowers) info.bounds[k].push_back({lo, bound});
    return true;
  }

  void check_index(JoinInfo& info, const Block& block1) {
    if (block1.size() != 1 || block1[0]->kind != Stmt::Kind::If || !block1[0]->orelse.empty()) return;
    std::vector<ExprPtr> cs;
    conjuncts(block1[0]->expr, cs);
    for (const auto& c : cs) {
      if (!fault_free(*c)) break;
      box_bound(*c, info);
    }
    info.index_eligible = !info.dims.empty();
  }

  std::vector<Step> block(const Block& b, int cur, int depth) {
    std::vector<Step> out;
    for (const auto& sp : b) stmt(*sp, cur, depth, out);
    return out;
  }

  void stmt(const Stmt& s, int& cur, int depth, std::vector<Step>& out) {
    const auto& ci = prog_.classes[static_cast<std::size_t>(cls_)];
    switch (s.kind) {
      case Stmt::Kind::Let: {
        Step st;
        st.kind = Step::Kind::Let;
        st.stmt = &s;
        st.slot = s.slot;
        st.node = add(OpKind::Map, "", s.name + " = " + format_expr(*s.expr), {cur});
        cur = st.node;
        out.push_back(std::move(st));
        return;
      }
      case Stmt::Kind::Assign:
      case Stmt::Kind::Insert: {
        const char* arrow = s.kind == Stmt::Kind::Assign ? " <- " : " <= ";
        Step st;
        st.stmt = &s;
        std::string text = format_expr(*s.target) + arrow + format_expr(*s.expr);
        int proj = add(OpKind::Project, "", text, {cur});
        if (s.to_accumulator) {
          st.kind = Step::Kind::EmitAcc;
          st.slot = s.target->slot;
          st.acc_depth = acc_depth_.at(st.slot);
          st.node = proj;
          acc_projects_[st.slot].push_back(proj);
        } else {
          const auto& tc = prog_.classes[static_cast<std::size_t>(s.target_cls)];
          st.kind = Step::Kind::EmitEffect;
          st.node = add(OpKind::EffectEmit, effect_table_name(tc.name, tc.effects[static_cast<std::size_t>(s.target_field)].name),
                        s.txn_site >= 0 ? "txn site " + std::to_string(s.txn_site) : "", {proj});
        }
        out.push_back(std::move(st));
        return;
      }
      case Stmt::Kind::If: {
        Step st;
        st.kind = Step::Kind::Branch;
        st.stmt = &s;
        std::string cond = format_expr(*s.expr);
        st.node = add(OpKind::Select, "", cond, {cur});
        st.else_node = add(OpKind::Select, "", "!(" + cond + ")", {cur});
        st.body = block(s.body, st.node, depth);
        st.orelse = block(s.orelse, st.else_node, depth);
        out.push_back(std::move(st));
        return;
      }
      case Stmt::Kind::Accum: {
        JoinInfo info;
        info.stmt = &s;
        info.extent = s.expr->ref == NameRef::ClassExtent;
        info.inner_cls = info.extent ? s.expr->cls : -1;
        info.loop_slot = s.loop_slot;
        info.depth = depth;
        info.acc_slot = s.slot;
        info.comb = s.acc_comb;
        info.acc_int = ci.slots[static_cast<std::size_t>(s.slot)].type.kind == TypeKind::Int;
        std::string over = s.loop_var + " in " + format_expr(*s.expr);
        if (info.extent) {
          extent_slots_.insert(s.loop_slot);
          const auto& inner = prog_.classes[static_cast<std::size_t>(info.inner_cls)];
          info.scan_node = add(OpKind::TableScan, state_table_name(inner.name), s.loop_var, {});
          check_index(info, s.body);
          if (info.index_eligible) {
            std::string dims;
            for (int f : info.dims) dims += (dims.empty() ? "" : ",") + inner.state[static_cast<std::size_t>(f)].name;
            info.index_node = add(OpKind::IndexRangeScan, state_table_name(inner.name), s.loop_var + " on (" + dims + ")", {});
          }
          std::string pred = (s.body.size() == 1 && s.body[0]->kind == Stmt::Kind::If) ? format_expr(*s.body[0]->expr) : "true";
          info.join_node = add(OpKind::ThetaJoin, "", over + " on " + pred, {cur, info.scan_node});
        } else {
          info.join_node = add(OpKind::Unnest, "", over, {cur});
        }
        acc_depth_[s.slot] = depth;
        int join_idx = static_cast<int>(tmpl_.joins.size());
        tmpl_.joins.push_back(info);
        tmpl_.depth_count = std::max(tmpl_.depth_count, depth + 2);

        Step st;
        st.kind = Step::Kind::Join;
        st.stmt = &s;
        st.join = join_idx;
        st.body = block(s.body, info.join_node, depth + 1);
        auto& ji = tmpl_.joins[static_cast<std::size_t>(join_idx)];
        if (ji.index_eligible) ji.filter_node = st.body[0].node;
        std::vector<int> agg_inputs{cur};
        for (int p : acc_projects_[s.slot]) agg_inputs.push_back(p);
        ji.agg_node = add(OpKind::GroupAggregate, "", std::string(combinator_name(s.acc_comb)) + " " + s.name, agg_inputs);
        st.node = ji.agg_node;
        cur = ji.agg_node;
        out.push_back(std::move(st));
        for (const auto& b2 : s.orelse) stmt(*b2, cur, depth, out);
        return;
      }
      case Stmt::Kind::Atomic:
        for (const auto& b : s.body) stmt(*b, cur, depth, out);
        return;
      case Stmt::Kind::Spawn: {
        Step st;
        st.kind = Step::Kind::Spawn;
        st.stmt = &s;
        std::string inits;
        for (const auto& [n, e] : s.spawn_inits) inits += (inits.empty() ? "" : ", ") + n + ": " + format_expr(*e);
        int proj = add(OpKind::Project, "", s.spawn_class + "(" + inits + ")", {cur});
        st.node = add(OpKind::EffectEmit, "spawn", s.spawn_class, {proj});
        out.push_back(std::move(st));
        return;
      }
      case Stmt::Kind::Destroy: {
        Step st;
        st.kind = Step::Kind::Destroy;
        st.stmt = &s;
        int proj = add(OpKind::Project, "", format_expr(*s.expr), {cur});
        st.node = add(OpKind::EffectEmit, "destroy", "", {proj});
        out.push_back(std::move(st));
        return;
      }
      case Stmt::Kind::Wait: uncompilable(s, "waitNextTick after lowering");
      case Stmt::Kind::Restart: uncompilable(s, "restart after lowering");
    }
  }
};

}  // namespace

PlanTemplate compile_to_plan(const Program& prog, const LoweredScript& script) {
  return PlanCompiler(prog, script.cls).run(script);
}

PlanSet optimize(const Program& prog, PlanTemplate tmpl, const std::vector<std::size_t>& extent_sizes) {
  PlanSet set;
  const auto& name = prog.classes[static_cast<std::size_t>(tmpl.cls)].name;
  for (Profile p : {Profile::Uniform, Profile::Clustered}) {
    PhysicalPlan plan;
    plan.profile = profile_name(p);
    plan.id = name + ":" + plan.profile;
    for (const auto& j : tmpl.joins) {
      bool idx = false;
      if (j.index_eligible) {
        double n = static_cast<double>(extent_sizes[static_cast<std::size_t>(j.inner_cls)]);
        double outer = std::max(1.0, static_cast<double>(extent_sizes[static_cast<std::size_t>(tmpl.cls)]));
        idx = index_cost(outer, n, static_cast<int>(j.dims.size()), assumed_fanout(p, n)) < scan_cost(outer, n);
      }
      plan.use_index.push_back(idx ? 1 : 0);
    }
    bool dup = false;
    for (const auto& q : set.plans) dup = dup || q.use_index == plan.use_index;
    if (!dup) set.plans.push_back(std::move(plan));
  }
  set.tmpl = std::move(tmpl);
  return set;
}

namespace {
json render(const PlanTemplate& t, const PhysicalPlan& plan, int id, const std::vector<double>& card,
            const std::map<int, int>& index_of_join_node) {
  const OpNode& n = t.nodes[static_cast<std::size_t>(id)];
  json j{{"id", n.id}, {"op", op_name(n.kind)}};
  if (!n.table.empty()) j["table"] = n.table;
  if (!n.detail.empty()) j["detail"] = n.detail;
  if (static_cast<std::size_t>(id) < card.size()) j["rows"] = card[static_cast<std::size_t>(id)];
  json children = json::array();
  std::vector<int> inputs = n.inputs;
  if (auto it = index_of_join_node.find(id); it != index_of_join_node.end()) {
    const auto& ji = t.joins[static_cast<std::size_t>(it->second)];
    if (ji.index_eligible) {
      bool idx = plan.use_index[static_cast<std::size_t>(it->second)] != 0;
      inputs[1] = idx ? ji.index_node : ji.scan_node;
      j["access"] = idx ? "index" : "scan";
      j["indexEligible"] = true;
    }
  }
  for (int in : inputs) children.push_back(render(t, plan, in, card, index_of_join_node));
  j["children"] = std::move(children);
  return j;
}
}  // namespace

std::string plan_to_json(const Program& prog, const PlanSet& set, int active, const std::vector<double>& card) {
  const auto& t = set.tmpl;
  std::map<int, int> join_of;
  for (std::size_t k = 0; k < t.joins.size(); ++k) {
    if (t.joins[k].extent) join_of[t.joins[k].join_node] = static_cast<int>(k);
  }
  json doc{{"class", prog.classes[static_cast<std::size_t>(t.cls)].name}};
  json plans = json::array();
  for (std::size_t p = 0; p < set.plans.size(); ++p) {
    json roots = json::array();
    for (const auto& n : t.nodes) {
      if (n.kind == OpKind::EffectEmit) roots.push_back(render(t, set.plans[p], n.id, card, join_of));
    }
    plans.push_back(json{{"id", set.plans[p].id},
                         {"profile", set.plans[p].profile},
                         {"active", static_cast<int>(p) == active},
                         {"roots", std::move(roots)}});
  }
  doc["plans"] = std::move(plans);
  if (active >= 0 && static_cast<std::size_t>(active) < set.plans.size()) doc["active"] = set.plans[static_cast<std::size_t>(active)].id;
  return doc.dump(2);
}

}  // namespace sgl
