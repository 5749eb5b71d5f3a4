#include "sgl/exec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>
#include <unordered_set>

#include "json_util.hpp"
#include "sgl/eval.hpp"

namespace sgl {

namespace {

constexpr std::size_t kChunkRows = 1 << 16;

/// Columnar relation: one row per binding of the script's slots.
struct Rel {
  std::size_t n = 0;
  std::vector<ObjectId> self;
  std::vector<std::vector<Value>> cols;            // by slot; empty when unbound
  std::vector<std::vector<std::uint32_t>> origin;  // by loop depth: row of the relation that entered that loop
};

Rel gather(const Rel& r, const std::vector<std::uint32_t>& rows) {
  Rel out;
  out.n = rows.size();
  out.self.reserve(rows.size());
  for (auto i : rows) out.self.push_back(r.self[i]);
  out.cols.resize(r.cols.size());
  for (std::size_t s = 0; s < r.cols.size(); ++s) {
    if (r.cols[s].empty() && r.n > 0) continue;
    if (r.cols[s].size() != r.n) continue;
    auto& c = out.cols[s];
    c.reserve(rows.size());
    for (auto i : rows) c.push_back(r.cols[s][i]);
  }
  out.origin.resize(r.origin.size());
  for (std::size_t d = 0; d < r.origin.size(); ++d) {
    if (r.origin[d].size() != r.n) continue;
    auto& o = out.origin[d];
    o.reserve(rows.size());
    for (auto i : rows) o.push_back(r.origin[d][i]);
  }
  return out;
}

struct RowEnv {
  const Rel& r;
  std::size_t i;
  const Tables& snap;
  std::int64_t now;
  std::uint64_t sd;

  Value slot(int s) const {
    const auto& c = r.cols[static_cast<std::size_t>(s)];
    return i < c.size() ? c[i] : Value{};
  }
  ObjectId self() const { return r.self[i]; }
  Value state(ObjectId o, int c, int f) const { return snap.state(o, c, f); }
  Value effect(int) const { throw Fault{"effect read in script"}; }
  std::int64_t tick() const { return now; }
  std::uint64_t seed() const { return sd; }
};

/// Maintained range indexes keyed by (class, dims); refreshed at most once per tick.
struct IndexCache {
  struct Entry {
    std::unique_ptr<MaintainedIndex> idx;
    std::int64_t tick = std::numeric_limits<std::int64_t>::min();
    const ClassTable* table = nullptr;
  };
  std::map<std::pair<int, std::vector<int>>, Entry> entries;
  double fraction = 0.25;
  std::size_t rebuilds = 0;

  void prepare(const Tables& snap, int cls, const std::vector<int>& dims) {
    auto& e = entries[{cls, dims}];
    const ClassTable* t = snap.classes[static_cast<std::size_t>(cls)].get();
    if (e.idx && e.tick == snap.tick && e.table == t) return;
    if (!e.idx) e.idx = std::make_unique<MaintainedIndex>(static_cast<int>(dims.size()), fraction);
    std::vector<double> coords;
    coords.reserve(t->size() * dims.size());
    for (std::size_t row = 0; row < t->size(); ++row) {
      for (int f : dims) coords.push_back(t->cols[static_cast<std::size_t>(f)].number_at(row));
    }
    if (e.idx->refresh(coords, t->ids)) ++rebuilds;
    e.tick = snap.tick;
    e.table = t;
  }

  const MaintainedIndex& get(int cls, const std::vector<int>& dims) const { return *entries.at({cls, dims}).idx; }
};

void prepare_indexes(IndexCache& cache, const Tables& snap, const PlanTemplate& t, const PhysicalPlan& plan) {
  for (std::size_t j = 0; j < t.joins.size(); ++j) {
    if (plan.use_index[j]) cache.prepare(snap, t.joins[j].inner_cls, t.joins[j].dims);
  }
}

/// Executes a plan over a slice of the class extent. Thread-confined.
class Worker {
 public:
  Worker(const Program& prog, const Tables& snap, const PlanTemplate& t, const PhysicalPlan& plan, const IndexCache& idx,
         std::uint64_t seed)
      : prog_(prog),
        ci_(prog.classes[static_cast<std::size_t>(t.cls)]),
        snap_(snap),
        t_(t),
        plan_(plan),
        idx_(idx),
        seed_(seed),
        acc_(ci_.slots.size(), nullptr) {
    rows.assign(t.nodes.size(), 0.0);
    join_outer.assign(t.joins.size(), 0.0);
  }

  void run(std::size_t begin, std::size_t end) {
    const ClassTable& table = *snap_.classes[static_cast<std::size_t>(t_.cls)];
    Rel r;
    r.n = end - begin;
    r.self.assign(table.ids.begin() + static_cast<std::ptrdiff_t>(begin), table.ids.begin() + static_cast<std::ptrdiff_t>(end));
    r.cols.resize(ci_.slots.size());
    r.cols[0].reserve(r.n);
    for (ObjectId id : r.self) r.cols[0].push_back(Value::ref(id));
    r.origin.resize(static_cast<std::size_t>(std::max(t_.depth_count, 1)));
    rows[static_cast<std::size_t>(t_.scan_node)] += static_cast<double>(r.n);
    steps(r, t_.steps);
  }

  EffectBuffer out;
  std::vector<double> rows;        // per node
  std::vector<double> join_outer;  // per join: outer rows entering it

 private:
  struct AccCtx {
    int depth;
    std::vector<std::vector<Value>> contrib;
  };

  const Program& prog_;
  const ClassInfo& ci_;
  const Tables& snap_;
  const PlanTemplate& t_;
  const PhysicalPlan& plan_;
  const IndexCache& idx_;
  std::uint64_t seed_;
  std::vector<AccCtx*> acc_;
  std::unordered_set<ObjectId> faulted_;

  RowEnv env(const Rel& r, std::size_t i) const { return RowEnv{r, i, snap_, snap_.tick, seed_}; }

  void fault(ObjectId self, const std::string& cause) {
    if (faulted_.insert(self).second) out.faults.push_back({self, t_.cls, cause});
  }

  void count(int node, std::size_t n) {
    if (node >= 0) rows[static_cast<std::size_t>(node)] += static_cast<double>(n);
  }

  const Type& slot_type(int s) const { return ci_.slots[static_cast<std::size_t>(s)].type; }

  void steps(Rel& r, const std::vector<Step>& ss) {
    for (const auto& s : ss) {
      if (r.n == 0) return;
      step(r, s);
    }
  }

  void step(Rel& r, const Step& s) {
    switch (s.kind) {
      case Step::Kind::Let: return let(r, s);
      case Step::Kind::Branch: return branch(r, s);
      case Step::Kind::Join: return join(r, s);
      case Step::Kind::EmitAcc: return emit_acc(r, s);
      case Step::Kind::EmitEffect: return emit_effect(r, s);
      case Step::Kind::Spawn: return spawn(r, s);
      case Step::Kind::Destroy: return destroy(r, s);
    }
  }

  void let(Rel& r, const Step& s) {
    std::vector<Value> col(r.n);
    std::vector<std::uint32_t> keep;
    bool lost = false;
    const Type& ty = slot_type(s.slot);
    for (std::size_t i = 0; i < r.n; ++i) {
      try {
        col[i] = coerce(eval(*s.stmt->expr, env(r, i)), ty);
        keep.push_back(static_cast<std::uint32_t>(i));
      } catch (const Fault& f) {
        fault(r.self[i], f.cause);
        lost = true;
      }
    }
    r.cols[static_cast<std::size_t>(s.slot)] = std::move(col);
    if (lost) r = gather(r, keep);
    count(s.node, r.n);
  }

  void branch(Rel& r, const Step& s) {
    std::vector<std::uint32_t> yes, no;
    for (std::size_t i = 0; i < r.n; ++i) {
      try {
        (eval(*s.stmt->expr, env(r, i)).as_bool() ? yes : no).push_back(static_cast<std::uint32_t>(i));
      } catch (const Fault& f) {
        fault(r.self[i], f.cause);
      }
    }
    count(s.node, yes.size());
    count(s.else_node, no.size());
    if (!yes.empty() && !s.body.empty()) {
      Rel sub = yes.size() == r.n ? r : gather(r, yes);
      steps(sub, s.body);
    }
    if (!no.empty() && !s.orelse.empty()) {
      Rel sub = no.size() == r.n ? r : gather(r, no);
      steps(sub, s.orelse);
    }
  }

  /// Box for outer row i; false when some bound is NaN or the box is empty.
  bool box_for(const JoinInfo& j, const Rel& r, std::size_t i, Box& box) {
    std::size_t d = j.dims.size();
    box.lo.assign(d, -std::numeric_limits<double>::infinity());
    box.hi.assign(d, std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < d; ++k) {
      for (const auto& b : j.bounds[k]) {
        double v = eval(*b.expr, env(r, i)).as_number();
        if (std::isnan(v)) return false;
        if (b.lower) {
          box.lo[k] = std::max(box.lo[k], v);
        } else {
          box.hi[k] = std::min(box.hi[k], v);
        }
      }
      if (!(box.lo[k] <= box.hi[k])) return false;
    }
    return true;
  }

  void join(Rel& r, const Step& s) {
    const JoinInfo& j = t_.joins[static_cast<std::size_t>(s.join)];
    join_outer[static_cast<std::size_t>(s.join)] += static_cast<double>(r.n);
    AccCtx ctx{j.depth, std::vector<std::vector<Value>>(r.n)};
    AccCtx* saved = acc_[static_cast<std::size_t>(j.acc_slot)];
    acc_[static_cast<std::size_t>(j.acc_slot)] = &ctx;

    bool use_index = plan_.use_index[static_cast<std::size_t>(s.join)] != 0;
    const std::vector<ObjectId>* inner_ids = nullptr;
    if (j.extent) {
      inner_ids = &snap_.classes[static_cast<std::size_t>(j.inner_cls)]->ids;
      if (!use_index) count(j.scan_node, inner_ids->size());
    }

    // Pending join rows: (outer row, element), flushed in chunks.
    std::vector<std::uint32_t> outer;
    std::vector<Value> elems;
    auto flush = [&] {
      if (outer.empty()) return;
      Rel jr = gather(r, outer);
      jr.cols[static_cast<std::size_t>(j.loop_slot)] = std::move(elems);
      jr.origin[static_cast<std::size_t>(j.depth)] = outer;
      count(j.join_node, jr.n);
      steps(jr, s.body);
      outer.clear();
      elems.clear();
    };

    std::vector<ObjectId> hits;
    Box box;
    for (std::size_t i = 0; i < r.n; ++i) {
      auto ui = static_cast<std::uint32_t>(i);
      try {
        if (!j.extent) {
          Value src = eval(*j.stmt->expr, env(r, i));
          for (const auto& e : src.as_set()) {
            outer.push_back(ui);
            elems.push_back(e);
          }
        } else if (use_index) {
          hits.clear();
          if (box_for(j, r, i, box)) idx_.get(j.inner_cls, j.dims).query(box, hits);
          std::sort(hits.begin(), hits.end());
          count(j.index_node, hits.size());
          for (ObjectId id : hits) {
            outer.push_back(ui);
            elems.push_back(Value::ref(id));
          }
        } else {
          for (ObjectId id : *inner_ids) {
            outer.push_back(ui);
            elems.push_back(Value::ref(id));
          }
        }
      } catch (const Fault& f) {
        fault(r.self[i], f.cause);
      }
      if (outer.size() >= kChunkRows) flush();
    }
    flush();

    std::vector<Value> col(r.n);
    for (std::size_t i = 0; i < r.n; ++i) col[i] = reduce_values(j.comb, ctx.contrib[i], j.acc_int);
    r.cols[static_cast<std::size_t>(j.acc_slot)] = std::move(col);
    r.cols[static_cast<std::size_t>(j.loop_slot)].clear();
    acc_[static_cast<std::size_t>(j.acc_slot)] = saved;
    count(j.agg_node, r.n);
  }

  void emit_acc(Rel& r, const Step& s) {
    AccCtx& ctx = *acc_[static_cast<std::size_t>(s.slot)];
    const Type& ty = slot_type(s.slot);
    const auto& origin = r.origin[static_cast<std::size_t>(ctx.depth)];
    for (std::size_t i = 0; i < r.n; ++i) {
      try {
        Value v = eval(*s.stmt->expr, env(r, i));
        if (s.stmt->kind == Stmt::Kind::Insert) v = Value::set({coerce(v, *ty.elem)});
        ctx.contrib[origin[i]].push_back(coerce(v, ty));
      } catch (const Fault& f) {
        fault(r.self[i], f.cause);
      }
    }
    count(s.node, r.n);
  }

  void emit_effect(Rel& r, const Step& s) {
    const Stmt& st = *s.stmt;
    const auto& ef = prog_.classes[static_cast<std::size_t>(st.target_cls)].effects[static_cast<std::size_t>(st.target_field)];
    for (std::size_t i = 0; i < r.n; ++i) {
      try {
        auto e = env(r, i);
        Value v = eval(*st.expr, e);
        if (st.kind == Stmt::Kind::Insert) v = Value::set({coerce(v, *ef.type.elem)});
        ObjectId target = r.self[i];
        if (st.target->kind != Expr::Kind::Name) {
          target = eval(*st.target->args[0], e).as_ref();
          if (target == kNullId) throw Fault{"effect on null reference"};
          auto loc = snap_.locate(target);
          if (!loc || loc->first != st.target_cls) throw Fault{"effect on dead reference " + std::to_string(target)};
        }
        out.entries.push_back({target, st.target_cls, st.target_field, coerce(v, ef.type), r.self[i], st.id, st.txn_site});
      } catch (const Fault& f) {
        fault(r.self[i], f.cause);
      }
    }
    count(s.node, r.n);
  }

  void spawn(Rel& r, const Step& s) {
    const Stmt& st = *s.stmt;
    const auto& target = prog_.classes[static_cast<std::size_t>(st.target_cls)];
    for (std::size_t i = 0; i < r.n; ++i) {
      try {
        SpawnEntry sp{st.target_cls, {}, r.self[i], st.id, st.txn_site};
        for (std::size_t k = 0; k < st.spawn_inits.size(); ++k) {
          int f = st.spawn_fields[k];
          sp.inits.emplace_back(f, coerce(eval(*st.spawn_inits[k].second, env(r, i)), target.state[static_cast<std::size_t>(f)].type));
        }
        std::sort(sp.inits.begin(), sp.inits.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        out.spawns.push_back(std::move(sp));
      } catch (const Fault& f) {
        fault(r.self[i], f.cause);
      }
    }
    count(s.node, r.n);
  }

  void destroy(Rel& r, const Step& s) {
    for (std::size_t i = 0; i < r.n; ++i) {
      try {
        ObjectId id = eval(*s.stmt->expr, env(r, i)).as_ref();
        if (id == kNullId) throw Fault{"destroy of null reference"};
        if (!snap_.locate(id)) throw Fault{"destroy of dead reference " + std::to_string(id)};
        out.destroys.push_back({id, r.self[i], s.stmt->id, s.stmt->txn_site});
      } catch (const Fault& f) {
        fault(r.self[i], f.cause);
      }
    }
    count(s.node, r.n);
  }
};

struct RunResult {
  EffectBuffer buf;
  std::vector<double> rows;
  std::vector<double> join_outer;
};

RunResult run_workers(const Program& prog, const PlanTemplate& t, const PhysicalPlan& plan, const Tables& snap,
                      const IndexCache& idx, std::uint64_t seed, int workers) {
  std::size_t n = snap.classes[static_cast<std::size_t>(t.cls)]->size();
  std::size_t w = static_cast<std::size_t>(std::max(1, workers));
  w = std::min(w, std::max<std::size_t>(1, n));
  std::vector<std::unique_ptr<Worker>> ws;
  for (std::size_t k = 0; k < w; ++k) ws.push_back(std::make_unique<Worker>(prog, snap, t, plan, idx, seed));
  auto slice = [&](std::size_t k) { return std::make_pair(n * k / w, n * (k + 1) / w); };
  if (w == 1) {
    ws[0]->run(0, n);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t k = 0; k < w; ++k) {
      threads.emplace_back([&, k] {
        auto [b, e] = slice(k);
        ws[k]->run(b, e);
      });
    }
    for (auto& th : threads) th.join();
  }
  RunResult res;
  res.rows.assign(t.nodes.size(), 0.0);
  res.join_outer.assign(t.joins.size(), 0.0);
  for (auto& wk : ws) {
    res.buf.append(std::move(wk->out));
    for (std::size_t i = 0; i < res.rows.size(); ++i) res.rows[i] += wk->rows[i];
    for (std::size_t i = 0; i < res.join_outer.size(); ++i) res.join_outer[i] += wk->join_outer[i];
  }
  // The self scan and inner scans are counted once per tick, not per worker.
  res.rows[static_cast<std::size_t>(t.scan_node)] = static_cast<double>(n);
  for (std::size_t j = 0; j < t.joins.size(); ++j) {
    const auto& ji = t.joins[j];
    if (ji.extent && !plan.use_index[j]) {
      res.rows[static_cast<std::size_t>(ji.scan_node)] =
          static_cast<double>(snap.classes[static_cast<std::size_t>(ji.inner_cls)]->size());
    }
  }
  return res;
}

}  // namespace

EffectBuffer execute_plan(const Program& prog, const PlanTemplate& tmpl, const PhysicalPlan& plan, const Tables& snap,
                          std::uint64_t seed, int workers, std::vector<double>* rows) {
  IndexCache cache;
  prepare_indexes(cache, snap, tmpl, plan);
  RunResult r = run_workers(prog, tmpl, plan, snap, cache, seed, workers);
  if (rows) *rows = std::move(r.rows);
  return std::move(r.buf);
}

struct RelationalEngine::Impl {
  const Program& prog;
  const std::vector<LoweredScript>& scripts;
  EngineConfig cfg;
  std::vector<ClassPlanState> classes;
  IndexCache indexes;
  json pending;  // restored selection state, applied once plans are compiled

  Impl(const Program& p, const std::vector<LoweredScript>& s, const EngineConfig& c) : prog(p), scripts(s), cfg(c) {
    classes.resize(prog.classes.size());
    indexes.fraction = cfg.index_rebuild_fraction;
  }

  void compile(const Tables& snap) {
    std::vector<std::size_t> sizes;
    for (const auto& t : snap.classes) sizes.push_back(t->size());
    for (std::size_t c = 0; c < classes.size(); ++c) {
      auto& cp = classes[c];
      if (cp.compiled || scripts[c].body.empty()) continue;
      cp.set = optimize(prog, compile_to_plan(prog, scripts[c]), sizes);
      cp.compiled = true;
      cp.rows.assign(cp.set.tmpl.nodes.size(), 0.0);
      cp.decayed.assign(cp.set.tmpl.nodes.size(), 0.0);
      cp.fanout.assign(cp.set.tmpl.joins.size(), 0.0);
      cp.active = pinned_index(cp);
      apply_pending(static_cast<int>(c), cp);
    }
  }

  int pinned_index(const ClassPlanState& cp) const {
    const auto& pin = cfg.optimizer.pinned;
    if (pin.empty()) return 0;
    for (std::size_t p = 0; p < cp.set.plans.size(); ++p) {
      const auto& plan = cp.set.plans[p];
      if (plan.profile == pin || plan.id == pin) return static_cast<int>(p);
      if (pin.find(plan.id) != std::string::npos) return static_cast<int>(p);
    }
    // A pinned profile that merged into another plan is that plan.
    return 0;
  }

  bool pinned() const { return !cfg.optimizer.pinned.empty(); }

  void apply_pending(int c, ClassPlanState& cp) {
    if (pending.is_null()) return;
    const auto& name = prog.classes[static_cast<std::size_t>(c)].name;
    if (!pending.contains(name)) return;
    const auto& j = pending[name];
    cp.set.plans.clear();
    for (const auto& p : j["plans"]) {
      PhysicalPlan plan;
      plan.id = p["id"].get<std::string>();
      plan.profile = p["profile"].get<std::string>();
      plan.use_index = p["useIndex"].get<std::vector<std::uint8_t>>();
      cp.set.plans.push_back(std::move(plan));
    }
    cp.active = j["active"].get<int>();
    cp.fanout = j["fanout"].get<std::vector<double>>();
    cp.decayed = j["decayed"].get<std::vector<double>>();
    cp.seen = j["seen"].get<bool>();
    cp.misses = j["misses"].get<int>();
    cp.switched_at = j["switchedAt"].get<std::int64_t>();
  }

  /// Folds one tick's counts into the decayed statistics and applies the
  /// hysteresis rule.
  void observe(int c, ClassPlanState& cp, const RunResult& res, std::int64_t tick, const Tables& snap,
               std::vector<std::string>& notes) {
    const auto& t = cp.set.tmpl;
    double a = cfg.optimizer.decay;
    cp.rows = res.rows;
    std::vector<double> fan(t.joins.size(), 0.0);
    for (std::size_t j = 0; j < t.joins.size(); ++j) {
      const auto& ji = t.joins[j];
      if (ji.filter_node >= 0 && res.join_outer[j] > 0) fan[j] = res.rows[static_cast<std::size_t>(ji.filter_node)] / res.join_outer[j];
    }
    for (std::size_t i = 0; i < cp.decayed.size(); ++i) cp.decayed[i] = cp.seen ? a * res.rows[i] + (1 - a) * cp.decayed[i] : res.rows[i];
    for (std::size_t j = 0; j < fan.size(); ++j) cp.fanout[j] = cp.seen ? a * fan[j] + (1 - a) * cp.fanout[j] : fan[j];
    cp.seen = true;
    if (pinned() || cp.set.plans.size() < 2) return;

    // Deviation of the decayed fan-out from a profile's assumption (>= 1).
    auto deviation = [&](Profile p) {
      double worst = 1.0;
      for (std::size_t j = 0; j < t.joins.size(); ++j) {
        const auto& ji = t.joins[j];
        if (!ji.index_eligible || res.join_outer[j] == 0) continue;
        double n = static_cast<double>(snap.classes[static_cast<std::size_t>(ji.inner_cls)]->size());
        double want = assumed_fanout(p, n) + 1.0, got = cp.fanout[j] + 1.0;
        worst = std::max(worst, std::max(want / got, got / want));
      }
      return worst;
    };
    auto profile_of = [](const PhysicalPlan& p) { return p.profile == "uniform" ? Profile::Uniform : Profile::Clustered; };
    // A miss: the active profile is off by the ratio and another profile fits better.
    const auto& active = cp.set.plans[static_cast<std::size_t>(cp.active)];
    double active_dev = deviation(profile_of(active));
    int best = cp.active;
    double best_dev = active_dev;
    for (std::size_t p = 0; p < cp.set.plans.size(); ++p) {
      double d = deviation(profile_of(cp.set.plans[p]));
      if (d < best_dev) {
        best_dev = d;
        best = static_cast<int>(p);
      }
    }
    if (active_dev >= cfg.optimizer.deviation_ratio && best != cp.active) {
      ++cp.misses;
    } else {
      cp.misses = 0;
    }
    if (cp.misses < cfg.optimizer.hysteresis_ticks) return;
    cp.misses = 0;
    if (best != cp.active) {
      notes.push_back(prog.classes[static_cast<std::size_t>(c)].name + ": " + active.id + " -> " +
                      cp.set.plans[static_cast<std::size_t>(best)].id + " at tick " + std::to_string(tick));
      cp.active = best;
      cp.switched_at = tick;
    }
  }
};

RelationalEngine::RelationalEngine(const Program& prog, const std::vector<LoweredScript>& scripts, const EngineConfig& cfg)
    : impl_(std::make_unique<Impl>(prog, scripts, cfg)) {}

RelationalEngine::~RelationalEngine() = default;

EffectBuffer RelationalEngine::run(const Snapshot& snap, std::uint64_t seed, std::vector<std::string>& notes) {
  auto& im = *impl_;
  im.compile(*snap);
  EffectBuffer all;
  for (std::size_t c = 0; c < im.classes.size(); ++c) {
    auto& cp = im.classes[c];
    if (!cp.compiled) continue;
    const auto& plan = cp.set.plans[static_cast<std::size_t>(cp.active)];
    prepare_indexes(im.indexes, *snap, cp.set.tmpl, plan);
    RunResult res = run_workers(im.prog, cp.set.tmpl, plan, *snap, im.indexes, seed, im.cfg.workers);
    im.observe(static_cast<int>(c), cp, res, snap->tick, *snap, notes);
    all.append(std::move(res.buf));
  }
  return all;
}

std::string RelationalEngine::save_state() const {
  // Restored but not yet compiled classes keep their restored state.
  json j = impl_->pending.is_object() ? impl_->pending : json::object();
  for (std::size_t c = 0; c < impl_->classes.size(); ++c) {
    const auto& cp = impl_->classes[c];
    if (!cp.compiled) continue;
    json plans = json::array();
    for (const auto& p : cp.set.plans) plans.push_back(json{{"id", p.id}, {"profile", p.profile}, {"useIndex", p.use_index}});
    j[impl_->prog.classes[c].name] = json{{"plans", plans},         {"active", cp.active}, {"fanout", cp.fanout},
                                          {"decayed", cp.decayed},  {"seen", cp.seen},     {"misses", cp.misses},
                                          {"switchedAt", cp.switched_at}};
  }
  return j.dump();
}

void RelationalEngine::load_state(const std::string& state) {
  auto& im = *impl_;
  im.pending = json::parse(state);
  for (std::size_t c = 0; c < im.classes.size(); ++c) {
    auto& cp = im.classes[c];
    if (cp.compiled) im.apply_pending(static_cast<int>(c), cp);
  }
}

const ClassPlanState* RelationalEngine::plans(int cls) const {
  if (cls < 0 || static_cast<std::size_t>(cls) >= impl_->classes.size()) return nullptr;
  const auto& cp = impl_->classes[static_cast<std::size_t>(cls)];
  return cp.compiled ? &cp : nullptr;
}

std::string RelationalEngine::plan_json(int cls) const {
  const auto* cp = plans(cls);
  if (!cp) return "{}";
  return plan_to_json(impl_->prog, cp->set, cp->active, cp->rows);
}

std::size_t RelationalEngine::index_rebuilds() const { return impl_->indexes.rebuilds; }

}  // namespace sgl
