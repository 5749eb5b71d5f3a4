#include "sgl/interpreter.hpp"

#include <algorithm>

#include "sgl/eval.hpp"

namespace sgl {

namespace {

struct Frame {
  const Program& prog;
  const ClassInfo& ci;
  const Tables& snap;
  ObjectId me;
  std::int64_t now;
  std::uint64_t sd;
  bool descending;
  std::vector<Value> slots;
  std::vector<std::vector<Value>> acc;
  EffectBuffer out;

  Value slot(int s) const { return slots[static_cast<std::size_t>(s)]; }
  ObjectId self() const { return me; }
  Value state(ObjectId o, int c, int f) const { return snap.state(o, c, f); }
  Value effect(int) const { throw Fault{"effect read in script"}; }
  std::int64_t tick() const { return now; }
  std::uint64_t seed() const { return sd; }

  const Type& slot_type(int s) const { return ci.slots[static_cast<std::size_t>(s)].type; }

  ObjectId live_target(const Expr& target, int cls) {
    if (target.kind == Expr::Kind::Name) return me;
    ObjectId id = eval(*target.args[0], *this).as_ref();
    if (id == kNullId) throw Fault{"effect on null reference"};
    auto loc = snap.locate(id);
    if (!loc || loc->first != cls) throw Fault{"effect on dead reference " + std::to_string(id)};
    return id;
  }

  void emit(const Stmt& s, Value v) {
    const auto& ef = prog.classes[static_cast<std::size_t>(s.target_cls)].effects[static_cast<std::size_t>(s.target_field)];
    ObjectId target = live_target(*s.target, s.target_cls);
    out.entries.push_back({target, s.target_cls, s.target_field, coerce(v, ef.type), me, s.id, s.txn_site});
  }

  void exec(const Block& b) {
    for (const auto& s : b) exec(*s);
  }

  void exec(const Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::Let:
        slots[static_cast<std::size_t>(s.slot)] = coerce(eval(*s.expr, *this), slot_type(s.slot));
        return;
      case Stmt::Kind::Assign:
      case Stmt::Kind::Insert: {
        Value v = eval(*s.expr, *this);
        if (s.to_accumulator) {
          int slot = s.target->slot;
          const Type& t = slot_type(slot);
          if (s.kind == Stmt::Kind::Insert) v = Value::set({coerce(v, *t.elem)});
          acc[static_cast<std::size_t>(slot)].push_back(coerce(v, t));
          return;
        }
        if (s.kind == Stmt::Kind::Insert) {
          const auto& ef = prog.classes[static_cast<std::size_t>(s.target_cls)].effects[static_cast<std::size_t>(s.target_field)];
          v = Value::set({coerce(v, *ef.type.elem)});
        }
        emit(s, std::move(v));
        return;
      }
      case Stmt::Kind::If:
        if (eval(*s.expr, *this).as_bool()) {
          exec(s.body);
        } else {
          exec(s.orelse);
        }
        return;
      case Stmt::Kind::Accum: {
        auto& buf = acc[static_cast<std::size_t>(s.slot)];
        buf.clear();
        std::vector<Value> elems;
        if (s.expr->ref == NameRef::ClassExtent) {
          for (ObjectId id : snap.classes[static_cast<std::size_t>(s.expr->cls)]->ids) elems.push_back(Value::ref(id));
        } else {
          Value src = eval(*s.expr, *this);
          elems.assign(src.as_set().begin(), src.as_set().end());
        }
        if (descending) std::reverse(elems.begin(), elems.end());
        for (const auto& e : elems) {
          slots[static_cast<std::size_t>(s.loop_slot)] = e;
          exec(s.body);
        }
        slots[static_cast<std::size_t>(s.slot)] =
            reduce_values(s.acc_comb, buf, slot_type(s.slot).kind == TypeKind::Int);
        buf.clear();
        exec(s.orelse);
        return;
      }
      case Stmt::Kind::Atomic:
        exec(s.body);
        return;
      case Stmt::Kind::Spawn: {
        const auto& target = prog.classes[static_cast<std::size_t>(s.target_cls)];
        SpawnEntry sp{s.target_cls, {}, me, s.id, s.txn_site};
        for (std::size_t i = 0; i < s.spawn_inits.size(); ++i) {
          int f = s.spawn_fields[i];
          sp.inits.emplace_back(f, coerce(eval(*s.spawn_inits[i].second, *this), target.state[static_cast<std::size_t>(f)].type));
        }
        std::sort(sp.inits.begin(), sp.inits.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        out.spawns.push_back(std::move(sp));
        return;
      }
      case Stmt::Kind::Destroy: {
        ObjectId id = eval(*s.expr, *this).as_ref();
        if (id == kNullId) throw Fault{"destroy of null reference"};
        if (!snap.locate(id)) throw Fault{"destroy of dead reference " + std::to_string(id)};
        out.destroys.push_back({id, me, s.id, s.txn_site});
        return;
      }
      case Stmt::Kind::Wait:
      case Stmt::Kind::Restart:
        throw Fault{"unlowered control statement"};
    }
  }
};

}  // namespace

EffectBuffer ReferenceInterpreter::run_object(const Tables& snap, int cls, ObjectId id, std::uint64_t seed) const {
  const auto& ci = prog_.classes[static_cast<std::size_t>(cls)];
  Frame fr{prog_, ci, snap, id, snap.tick, seed, descending_, {}, {}, {}};
  fr.slots.assign(ci.slots.size(), Value{});
  fr.slots[0] = Value::ref(id);
  fr.acc.resize(ci.slots.size());
  try {
    fr.exec(scripts_[static_cast<std::size_t>(cls)].body);
  } catch (const Fault& f) {
    EffectBuffer failed;
    failed.faults.push_back({id, cls, f.cause});
    return failed;
  }
  return std::move(fr.out);
}

EffectBuffer ReferenceInterpreter::run(const Snapshot& snap, std::uint64_t seed, std::vector<std::string>&) {
  EffectBuffer all;
  std::vector<int> order(prog_.classes.size());
  for (std::size_t c = 0; c < order.size(); ++c) order[c] = static_cast<int>(c);
  if (descending_) std::reverse(order.begin(), order.end());
  for (int c : order) {
    if (scripts_[static_cast<std::size_t>(c)].body.empty()) continue;
    std::vector<ObjectId> ids = snap->classes[static_cast<std::size_t>(c)]->ids;
    if (descending_) std::reverse(ids.begin(), ids.end());
    for (ObjectId id : ids) all.append(run_object(*snap, c, id, seed));
  }
  return all;
}

}  // namespace sgl
