#include "sgl/trace.hpp"

#include <algorithm>
#include <map>

#include "json_util.hpp"

namespace sgl {

std::vector<EffectView> effects_of(const Program& prog, const TickLog& log, ObjectId id) {
  std::map<std::pair<int, int>, EffectView> by_field;
  auto add = [&](const EffectEntry& e, bool aborted) {
    if (e.target != id) return;
    auto& v = by_field[{e.cls, e.field}];
    v.cls = e.cls;
    v.field = e.field;
    v.entries.push_back(e);
    v.aborted.push_back(aborted);
  };
  for (const auto& e : log.committed) add(e, false);
  for (const auto& e : log.aborted) add(e, true);
  std::vector<EffectView> out;
  for (auto& [key, v] : by_field) {
    std::vector<EffectEntry> live;
    for (std::size_t i = 0; i < v.entries.size(); ++i) {
      if (!v.aborted[i]) live.push_back(v.entries[i]);
    }
    if (!live.empty()) {
      const auto& ef = prog.classes[static_cast<std::size_t>(key.first)].effects[static_cast<std::size_t>(key.second)];
      v.reduced = reduce_group(ef, live);
    }
    out.push_back(std::move(v));
  }
  return out;
}

namespace {
json entry_json(const Program& prog, const EffectEntry& e) {
  const auto& ci = prog.classes[static_cast<std::size_t>(e.cls)];
  json j{{"target", e.target},
         {"class", ci.name},
         {"field", ci.effects[static_cast<std::size_t>(e.field)].name},
         {"value", value_to_json(e.value)},
         {"source", e.source},
         {"stmt", e.stmt}};
  if (e.txn_site >= 0) j["txn"] = json{{"issuer", e.source}, {"site", e.txn_site}};
  return j;
}
}  // namespace

void write_ndjson(const Program& prog, const TickLog& log, std::ostream& os) {
  std::uint64_t seq = 0;
  auto emit = [&](const char* kind, json payload) {
    json rec{{"tick", log.tick}, {"seq", seq++}, {"kind", kind}, {"payload", std::move(payload)}};
    os << rec.dump() << '\n';
  };
  std::vector<std::pair<const EffectEntry*, bool>> entries;
  for (const auto& e : log.committed) entries.emplace_back(&e, false);
  for (const auto& e : log.aborted) entries.emplace_back(&e, true);
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return entry_less(*a.first, *b.first); });
  for (const auto& [e, aborted] : entries) {
    json p = entry_json(prog, *e);
    p["aborted"] = aborted;
    emit("effectEntry", std::move(p));
  }
  for (const auto& t : log.txns) {
    json p{{"issuer", t.id.issuer}, {"site", t.id.site}, {"status", t.committed ? "committed" : "aborted"},
           {"touched", t.touched}, {"entries", t.entries}};
    if (!t.committed) {
      p["violatedObject"] = t.violated_object;
      p["violatedConstraint"] = t.violated_constraint;
      if (!t.fault.empty()) p["fault"] = t.fault;
    }
    emit("txnOutcome", std::move(p));
  }
  for (ObjectId id : log.frozen) emit("txnOutcome", json{{"frozen", id}});
  for (const auto& f : log.faults) {
    emit("fault", json{{"source", f.source}, {"class", prog.classes[static_cast<std::size_t>(f.cls)].name},
                       {"phase", "effect"}, {"cause", f.cause}});
  }
  for (const auto& f : log.update_faults) {
    emit("fault", json{{"source", f.source}, {"class", prog.classes[static_cast<std::size_t>(f.cls)].name},
                       {"phase", "update"}, {"cause", f.cause}});
  }
  for (const auto& s : log.plan_switches) emit("planSwitch", json{{"detail", s}});
  for (const auto& [name, rows] : log.component_updates) emit("componentUpdate", json{{"component", name}, {"rows", rows}});
  for (ObjectId id : log.spawned) emit("spawn", json{{"id", id}});
  for (const auto& s : log.rejected_spawns) {
    emit("spawn", json{{"class", prog.classes[static_cast<std::size_t>(s.cls)].name}, {"source", s.source},
                       {"stmt", s.stmt}, {"rejected", true}});
  }
  for (ObjectId id : log.destroyed) emit("destroy", json{{"id", id}});
}

}  // namespace sgl
