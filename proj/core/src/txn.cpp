#include "sgl/txn.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <unordered_map>

#include "sgl/rule_eval.hpp"

namespace sgl {

namespace {

struct TxnParts {
  std::vector<const EffectEntry*> entries;
  std::vector<const SpawnEntry*> spawns;
  std::vector<const DestroyEntry*> destroys;
};

struct CheckResult {
  bool ok = true;
  int constraint = -1;
  std::string fault;
};

/// Evaluates every constraint of class `cls` with the object's own state
/// taken from `own` where present.
template <class Own>
CheckResult check_object(const Program& prog, const Tables& snap, int cls, ObjectId id, std::int64_t tick, Own own) {
  const auto& ci = prog.classes[static_cast<std::size_t>(cls)];
  auto no_effects = [](int) -> Value { return {}; };
  ObjectEnv<decltype(no_effects), Own> env{snap, id, cls, tick, no_effects, own};
  for (std::size_t k = 0; k < ci.constraints.size(); ++k) {
    try {
      if (!eval(*ci.constraints[k], env).as_bool()) return {false, static_cast<int>(k), {}};
    } catch (const Fault& f) {
      return {false, static_cast<int>(k), f.cause};
    } catch (const AbsentEffectRead&) {
      return {false, static_cast<int>(k), "constraint reads an effect"};
    }
  }
  return {};
}

class Admitter {
 public:
  Admitter(const Program& prog, const Tables& snap, std::int64_t tick) : prog_(prog), snap_(snap), tick_(tick) {}

  /// Post values of every constrained field of `id` given the entries that
  /// target it. Throws Fault.
  std::vector<std::optional<Value>> post_state(int cls, ObjectId id, std::vector<EffectEntry> entries) const {
    const auto& ci = prog_.classes[static_cast<std::size_t>(cls)];
    std::sort(entries.begin(), entries.end(), entry_less);
    auto effect = [&](int f) -> Value {
      auto lo = std::find_if(entries.begin(), entries.end(), [&](const EffectEntry& e) { return e.field == f; });
      auto hi = std::find_if(lo, entries.end(), [&](const EffectEntry& e) { return e.field != f; });
      const auto& ef = ci.effects[static_cast<std::size_t>(f)];
      if (lo == hi) return identity_value(ef.comb, ef.type.kind == TypeKind::Int);
      return reduce_group(ef, std::span<const EffectEntry>(&*lo, static_cast<std::size_t>(hi - lo)));
    };
    std::vector<std::optional<Value>> post(ci.state.size());
    for (std::size_t f = 0; f < ci.state.size(); ++f) {
      const auto& sf = ci.state[f];
      if (!sf.constrained) continue;
      std::optional<Value> v;
      if (sf.rule) v = eval_rule(prog_, snap_, cls, static_cast<int>(f), id, tick_, effect);
      post[f] = v ? *v : snap_.state(id, cls, static_cast<int>(f));
    }
    return post;
  }

  CheckResult check(int cls, ObjectId id, const std::vector<EffectEntry>& entries,
                    std::vector<std::optional<Value>>* out = nullptr) const {
    std::vector<std::optional<Value>> post;
    try {
      post = post_state(cls, id, entries);
    } catch (const Fault& f) {
      return {false, -1, f.cause};
    }
    auto own = [&post](int f) -> std::optional<Value> { return post[static_cast<std::size_t>(f)]; };
    CheckResult r = check_object(prog_, snap_, cls, id, tick_, own);
    if (out) *out = std::move(post);
    return r;
  }

  CheckResult check_spawn(const SpawnEntry& s) const {
    std::vector<Value> vals = default_fields(prog_.classes[static_cast<std::size_t>(s.cls)]);
    for (const auto& [f, v] : s.inits) vals[static_cast<std::size_t>(f)] = v;
    auto own = [&vals](int f) -> std::optional<Value> { return vals[static_cast<std::size_t>(f)]; };
    return check_object(prog_, snap_, s.cls, kSpawnSelf, tick_, own);
  }

  static constexpr ObjectId kSpawnSelf = -1;

 private:
  const Program& prog_;
  const Tables& snap_;
  std::int64_t tick_;
};

}  // namespace

Admission admit(const Program& prog, const Tables& snap, const EffectBuffer& buf, std::int64_t tick) {
  Admission out;
  Admitter adm(prog, snap, tick);
  auto constrained_cls = [&](int cls) { return prog.classes[static_cast<std::size_t>(cls)].has_constraints(); };

  std::map<TxnId, TxnParts> txns;
  std::unordered_map<ObjectId, std::vector<EffectEntry>> by_target;  // committed entries on constrained objects
  for (const auto& e : buf.entries) {
    if (e.txn_site >= 0) {
      txns[{e.source, e.txn_site}].entries.push_back(&e);
      continue;
    }
    out.committed.push_back(e);
    if (constrained_cls(e.cls)) by_target[e.target].push_back(e);
  }
  for (const auto& s : buf.spawns) {
    if (s.txn_site >= 0) {
      txns[{s.source, s.txn_site}].spawns.push_back(&s);
    } else if (constrained_cls(s.cls) && !adm.check_spawn(s).ok) {
      out.rejected_spawns.push_back(s);
    } else {
      out.spawns.push_back(s);
    }
  }
  for (const auto& d : buf.destroys) {
    if (d.txn_site >= 0) {
      txns[{d.source, d.txn_site}].destroys.push_back(&d);
    } else {
      out.destroys.push_back(d);
    }
  }

  std::map<ObjectId, std::int64_t> status;
  for (auto& [id, parts] : txns) {
    TxnRecord rec;
    rec.id = id;
    rec.entries = parts.entries.size() + parts.spawns.size() + parts.destroys.size();
    std::map<ObjectId, int> touched;  // target -> class
    for (const auto* e : parts.entries) {
      if (constrained_cls(e->cls)) touched.emplace(e->target, e->cls);
    }
    bool ok = true;
    for (const auto& [obj, cls] : touched) {
      rec.touched.push_back(obj);
      if (!ok) continue;
      std::vector<EffectEntry> entries;
      if (auto it = by_target.find(obj); it != by_target.end()) entries = it->second;
      for (const auto* e : parts.entries) {
        if (e->target == obj) entries.push_back(*e);
      }
      CheckResult r = adm.check(cls, obj, entries);
      if (!r.ok) {
        ok = false;
        rec.violated_object = obj;
        rec.violated_constraint = r.constraint;
        rec.fault = r.fault;
      }
    }
    for (const auto* s : parts.spawns) {
      if (!ok || !constrained_cls(s->cls)) continue;
      CheckResult r = adm.check_spawn(*s);
      if (!r.ok) {
        ok = false;
        rec.violated_object = kNullId;
        rec.violated_constraint = r.constraint;
        rec.fault = r.fault;
      }
    }
    rec.committed = ok;
    for (const auto* e : parts.entries) {
      if (ok) {
        out.committed.push_back(*e);
        if (constrained_cls(e->cls)) by_target[e->target].push_back(*e);
      } else {
        out.aborted.push_back(*e);
      }
    }
    if (ok) {
      for (const auto* s : parts.spawns) out.spawns.push_back(*s);
      for (const auto* d : parts.destroys) out.destroys.push_back(*d);
    } else {
      for (const auto* s : parts.spawns) out.rejected_spawns.push_back(*s);
    }
    auto& st = status[id.issuer];
    st = (!ok || st == kTxnAborted) ? kTxnAborted : kTxnCommitted;
    out.txns.push_back(std::move(rec));
  }
  std::sort(out.committed.begin(), out.committed.end(), entry_less);
  std::sort(out.spawns.begin(), out.spawns.end(), spawn_less);
  std::sort(out.destroys.begin(), out.destroys.end(), destroy_less);

  // Final constrained values and lastTxnStatus.
  for (std::size_t c = 0; c < prog.classes.size(); ++c) {
    const auto& ci = prog.classes[c];
    const auto& table = *snap.classes[c];
    int cls = static_cast<int>(c);
    for (std::size_t row = 0; row < table.size(); ++row) {
      ObjectId id = table.ids[row];
      if (ci.has_constraints()) {
        std::vector<EffectEntry> entries;
        if (auto it = by_target.find(id); it != by_target.end()) entries = it->second;
        std::vector<std::optional<Value>> post;
        if (!adm.check(cls, id, entries, &post).ok) {
          out.frozen.push_back(id);
        } else {
          for (std::size_t f = 0; f < post.size(); ++f) {
            if (!post[f]) continue;
            if (!identical(*post[f], table.get(row, static_cast<int>(f)))) {
              out.owned_updates.push_back({cls, id, static_cast<int>(f), *post[f]});
            }
          }
        }
      }
      std::int64_t st = kTxnNone;
      if (auto it = status.find(id); it != status.end()) st = it->second;
      if (table.get(row, ci.txn_status_field).as_int() != st) {
        out.owned_updates.push_back({cls, id, ci.txn_status_field, Value::integer(st)});
      }
    }
  }
  return out;
}

std::vector<Violation> check_constraints(const Program& prog, const Tables& snap) {
  std::vector<Violation> out;
  for (std::size_t c = 0; c < prog.classes.size(); ++c) {
    if (!prog.classes[c].has_constraints()) continue;
    const auto& table = *snap.classes[c];
    for (ObjectId id : table.ids) {
      CheckResult r = check_object(prog, snap, static_cast<int>(c), id, snap.tick, no_post());
      if (!r.ok) out.push_back({id, static_cast<int>(c), r.constraint, r.fault});
    }
  }
  return out;
}

}  // namespace sgl
