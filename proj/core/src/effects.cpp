#include "sgl/effects.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "sgl/combinator.hpp"

namespace sgl {

bool entry_less(const EffectEntry& a, const EffectEntry& b) {
  if (std::tie(a.cls, a.field, a.target, a.source, a.stmt, a.txn_site) !=
      std::tie(b.cls, b.field, b.target, b.source, b.stmt, b.txn_site)) {
    return std::tie(a.cls, a.field, a.target, a.source, a.stmt, a.txn_site) <
           std::tie(b.cls, b.field, b.target, b.source, b.stmt, b.txn_site);
  }
  return canonical_compare(a.value, b.value) < 0;
}

namespace {
int compare_inits(const SpawnEntry& a, const SpawnEntry& b) {
  std::size_t n = std::min(a.inits.size(), b.inits.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a.inits[i].first != b.inits[i].first) return a.inits[i].first < b.inits[i].first ? -1 : 1;
    int c = canonical_compare(a.inits[i].second, b.inits[i].second);
    if (c) return c;
  }
  return a.inits.size() < b.inits.size() ? -1 : (a.inits.size() > b.inits.size() ? 1 : 0);
}
}  // namespace

bool spawn_less(const SpawnEntry& a, const SpawnEntry& b) {
  if (std::tie(a.source, a.stmt, a.cls, a.txn_site) != std::tie(b.source, b.stmt, b.cls, b.txn_site)) {
    return std::tie(a.source, a.stmt, a.cls, a.txn_site) < std::tie(b.source, b.stmt, b.cls, b.txn_site);
  }
  return compare_inits(a, b) < 0;
}

bool destroy_less(const DestroyEntry& a, const DestroyEntry& b) {
  return std::tie(a.target, a.source, a.stmt, a.txn_site) < std::tie(b.target, b.source, b.stmt, b.txn_site);
}

bool fault_less(const FaultRecord& a, const FaultRecord& b) {
  return std::tie(a.source, a.cls, a.cause) < std::tie(b.source, b.cls, b.cause);
}

void EffectBuffer::append(EffectBuffer&& o) {
  entries.insert(entries.end(), std::make_move_iterator(o.entries.begin()), std::make_move_iterator(o.entries.end()));
  spawns.insert(spawns.end(), std::make_move_iterator(o.spawns.begin()), std::make_move_iterator(o.spawns.end()));
  destroys.insert(destroys.end(), std::make_move_iterator(o.destroys.begin()), std::make_move_iterator(o.destroys.end()));
  faults.insert(faults.end(), std::make_move_iterator(o.faults.begin()), std::make_move_iterator(o.faults.end()));
}

void EffectBuffer::canonicalize() {
  std::sort(entries.begin(), entries.end(), entry_less);
  std::sort(spawns.begin(), spawns.end(), spawn_less);
  std::sort(destroys.begin(), destroys.end(), destroy_less);
  std::sort(faults.begin(), faults.end(), fault_less);
}

void EffectBuffer::drop_faulted() {
  if (faults.empty()) return;
  std::set<ObjectId> bad;
  for (const auto& f : faults) bad.insert(f.source);
  std::erase_if(entries, [&](const EffectEntry& e) { return bad.count(e.source) > 0; });
  std::erase_if(spawns, [&](const SpawnEntry& e) { return bad.count(e.source) > 0; });
  std::erase_if(destroys, [&](const DestroyEntry& e) { return bad.count(e.source) > 0; });
}

bool buffers_identical(const EffectBuffer& a, const EffectBuffer& b) {
  auto same_entry = [](const EffectEntry& x, const EffectEntry& y) {
    return !entry_less(x, y) && !entry_less(y, x) && identical(x.value, y.value);
  };
  if (a.entries.size() != b.entries.size() || a.spawns.size() != b.spawns.size() ||
      a.destroys.size() != b.destroys.size() || a.faults.size() != b.faults.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    if (!same_entry(a.entries[i], b.entries[i])) return false;
  }
  for (std::size_t i = 0; i < a.spawns.size(); ++i) {
    if (spawn_less(a.spawns[i], b.spawns[i]) || spawn_less(b.spawns[i], a.spawns[i])) return false;
  }
  for (std::size_t i = 0; i < a.destroys.size(); ++i) {
    if (destroy_less(a.destroys[i], b.destroys[i]) || destroy_less(b.destroys[i], a.destroys[i])) return false;
  }
  for (std::size_t i = 0; i < a.faults.size(); ++i) {
    if (a.faults[i].source != b.faults[i].source) return false;
  }
  return true;
}

Value ReducedField::lookup(ObjectId id) const {
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) return {};
  return vals[static_cast<std::size_t>(it - ids.begin())];
}

Value ReducedEffects::get(const Program& prog, int cls, int field, ObjectId id) const {
  Value v = fields[static_cast<std::size_t>(cls)][static_cast<std::size_t>(field)].lookup(id);
  if (!v.is_absent()) return v;
  const auto& f = prog.classes[static_cast<std::size_t>(cls)].effects[static_cast<std::size_t>(field)];
  return identity_value(f.comb, f.type.kind == TypeKind::Int);
}

Value reduce_group(const EffectField& f, std::span<const EffectEntry> group) {
  // Group members are already in canonical entry order; the combinator sees values in that order.
  std::vector<Value> vals;
  vals.reserve(group.size());
  for (const auto& e : group) vals.push_back(e.value);
  return reduce_sorted(f.comb, vals, f.type.kind == TypeKind::Int);
}

ReducedEffects reduce_effects(const Program& prog, std::span<const EffectEntry> sorted) {
  ReducedEffects r;
  r.fields.resize(prog.classes.size());
  for (std::size_t c = 0; c < prog.classes.size(); ++c) r.fields[c].resize(prog.classes[c].effects.size());
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].cls == sorted[i].cls && sorted[j].field == sorted[i].field &&
           sorted[j].target == sorted[i].target) {
      ++j;
    }
    const auto& e = sorted[i];
    const auto& f = prog.classes[static_cast<std::size_t>(e.cls)].effects[static_cast<std::size_t>(e.field)];
    auto& out = r.fields[static_cast<std::size_t>(e.cls)][static_cast<std::size_t>(e.field)];
    out.ids.push_back(e.target);
    out.vals.push_back(reduce_group(f, sorted.subspan(i, j - i)));
    i = j;
  }
  return r;
}

}  // namespace sgl
