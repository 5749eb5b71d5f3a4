#include "sgl/store.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <set>

#include "json.hpp"
#include "json_util.hpp"
#include "sgl/eval.hpp"

namespace sgl {

std::size_t Column::size() const {
  switch (kind_) {
    case TypeKind::Number: return num_.size();
    case TypeKind::String: return str_.size();
    default: return ints_.size();
  }
}

Value Column::get(std::size_t row) const {
  switch (kind_) {
    case TypeKind::Number: return Value::number(num_[row]);
    case TypeKind::Int: return Value::integer(ints_[row]);
    case TypeKind::Bool: return Value::boolean(ints_[row] != 0);
    case TypeKind::Ref: return Value::ref(ints_[row]);
    case TypeKind::String: return Value::string(str_[row]);
    default: return {};
  }
}

void Column::push(const Value& v) {
  switch (kind_) {
    case TypeKind::Number: num_.push_back(v.as_number()); break;
    case TypeKind::Int: ints_.push_back(v.as_int()); break;
    case TypeKind::Bool: ints_.push_back(v.as_bool() ? 1 : 0); break;
    case TypeKind::Ref: ints_.push_back(v.as_ref()); break;
    case TypeKind::String: str_.push_back(v.as_string()); break;
    default: ints_.push_back(0); break;  // set placeholder keeps row alignment
  }
}

void Column::set(std::size_t row, const Value& v) {
  switch (kind_) {
    case TypeKind::Number: num_[row] = v.as_number(); break;
    case TypeKind::Int: ints_[row] = v.as_int(); break;
    case TypeKind::Bool: ints_[row] = v.as_bool() ? 1 : 0; break;
    case TypeKind::Ref: ints_[row] = v.as_ref(); break;
    case TypeKind::String: str_[row] = v.as_string(); break;
    default: break;
  }
}

namespace {
template <class T>
void keep_rows(std::vector<T>& v, const std::vector<std::uint8_t>& keep) {
  std::size_t w = 0;
  for (std::size_t r = 0; r < v.size(); ++r) {
    if (keep[r]) v[w++] = std::move(v[r]);
  }
  v.resize(w);
}
}  // namespace

void Column::filter(const std::vector<std::uint8_t>& keep) {
  keep_rows(num_, keep);
  keep_rows(ints_, keep);
  keep_rows(str_, keep);
}

Value ChildTable::get(ObjectId id) const {
  auto lo = std::lower_bound(owner.begin(), owner.end(), id);
  auto hi = std::upper_bound(lo, owner.end(), id);
  return Value::set(std::vector<Value>(elem.begin() + (lo - owner.begin()), elem.begin() + (hi - owner.begin())));
}

std::optional<std::size_t> ClassTable::row_of(ObjectId id) const {
  if (!ids.empty() && ids.back() - ids.front() + 1 == static_cast<ObjectId>(ids.size())) {
    if (id < ids.front() || id > ids.back()) return std::nullopt;
    return static_cast<std::size_t>(id - ids.front());
  }
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - ids.begin());
}

Value ClassTable::get(std::size_t row, int field) const {
  if (is_set_field(field)) return children[static_cast<std::size_t>(field)].get(ids[row]);
  return cols[static_cast<std::size_t>(field)].get(row);
}

Value Tables::state(ObjectId id, int cls, int field) const {
  if (id == kNullId) throw Fault{"null dereference"};
  const ClassTable& t = *classes[static_cast<std::size_t>(cls)];
  auto row = t.row_of(id);
  if (!row) throw Fault{"reference to dead object " + std::to_string(id)};
  return t.get(*row, field);
}

std::optional<std::pair<int, std::size_t>> Tables::locate(ObjectId id) const {
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (auto r = classes[c]->row_of(id)) return std::make_pair(static_cast<int>(c), *r);
  }
  return std::nullopt;
}

std::size_t Tables::object_count() const {
  std::size_t n = 0;
  for (const auto& c : classes) n += c->size();
  return n;
}

Tables create_tables(const Program& prog) {
  Tables t;
  for (const auto& c : prog.classes) {
    auto ct = std::make_shared<ClassTable>();
    ct->cls = c.index;
    for (const auto& f : c.state) ct->cols.emplace_back(f.type.kind);
    ct->children.resize(c.state.size());
    t.classes.push_back(std::move(ct));
    t.effects.emplace_back(c.effects.size());
  }
  return t;
}

std::vector<Value> default_fields(const ClassInfo& cls) {
  std::vector<Value> out;
  out.reserve(cls.state.size());
  for (const auto& f : cls.state) out.push_back(f.init ? constant_value(*f.init, f.type) : zero_value(f.type));
  return out;
}

namespace {

using nlohmann::json;

[[noreturn]] void world_error(const std::string& msg) { throw EngineError("E_WORLD", msg); }

void build_children(ClassTable& t, int field, const std::map<ObjectId, Value>& values) {
  ChildTable ch;
  for (ObjectId id : t.ids) {
    auto it = values.find(id);
    if (it == values.end()) continue;
    for (const auto& e : it->second.as_set()) {
      ch.owner.push_back(id);
      ch.elem.push_back(e);
    }
  }
  t.children[static_cast<std::size_t>(field)] = std::move(ch);
}

}  // namespace

Snapshot load_world(const Program& prog, std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    world_error(std::string("malformed world document: ") + e.what());
  }
  if (!doc.is_object()) world_error("world document must be an object");

  std::vector<std::vector<Value>> defaults;
  for (const auto& c : prog.classes) defaults.push_back(default_fields(c));
  if (doc.contains("classes")) {
    for (const auto& [cname, fields] : doc["classes"].items()) {
      int ci = prog.class_index(cname);
      if (ci < 0) world_error("unknown class '" + cname + "'");
      const auto& cls = prog.classes[static_cast<std::size_t>(ci)];
      for (const auto& [fname, v] : fields.items()) {
        int fi = cls.state_index(fname);
        if (fi < 0 || cls.state[static_cast<std::size_t>(fi)].synthesized) {
          world_error("class '" + cname + "' has no state field '" + fname + "'");
        }
        defaults[static_cast<std::size_t>(ci)][static_cast<std::size_t>(fi)] =
            value_from_json(v, cls.state[static_cast<std::size_t>(fi)].type, cname + "." + fname);
      }
    }
  }

  struct Pending {
    int cls;
    ObjectId id;
    std::vector<Value> fields;
  };
  std::vector<Pending> objs;
  std::set<ObjectId> seen;
  if (doc.contains("objects")) {
    for (const auto& o : doc["objects"]) {
      if (!o.contains("class") || !o["class"].is_string()) world_error("object without a class");
      std::string cname = o["class"].get<std::string>();
      int ci = prog.class_index(cname);
      if (ci < 0) world_error("unknown class '" + cname + "'");
      if (!o.contains("id") || !o["id"].is_number_integer() || o["id"].get<std::int64_t>() <= 0) {
        world_error("object of class '" + cname + "' needs a positive integer id");
      }
      ObjectId id = o["id"].get<std::int64_t>();
      if (!seen.insert(id).second) world_error("duplicate object id " + std::to_string(id));
      const auto& cls = prog.classes[static_cast<std::size_t>(ci)];
      Pending p{ci, id, defaults[static_cast<std::size_t>(ci)]};
      if (o.contains("fields")) {
        for (const auto& [fname, v] : o["fields"].items()) {
          int fi = cls.state_index(fname);
          if (fi < 0) world_error("class '" + cname + "' has no state field '" + fname + "'");
          p.fields[static_cast<std::size_t>(fi)] =
              value_from_json(v, cls.state[static_cast<std::size_t>(fi)].type, cname + "." + fname);
        }
      }
      objs.push_back(std::move(p));
    }
  }
  std::sort(objs.begin(), objs.end(), [](const Pending& a, const Pending& b) { return a.id < b.id; });

  Tables t = create_tables(prog);
  std::vector<std::shared_ptr<ClassTable>> tabs;
  for (auto& c : t.classes) tabs.push_back(std::make_shared<ClassTable>(*c));
  std::vector<std::map<ObjectId, std::map<int, Value>>> sets(prog.classes.size());
  for (auto& p : objs) {
    auto& ct = *tabs[static_cast<std::size_t>(p.cls)];
    ct.ids.push_back(p.id);
    for (std::size_t f = 0; f < p.fields.size(); ++f) {
      ct.cols[f].push(p.fields[f]);
      if (ct.is_set_field(static_cast<int>(f))) sets[static_cast<std::size_t>(p.cls)][p.id][static_cast<int>(f)] = p.fields[f];
    }
    t.next_id = std::max(t.next_id, p.id + 1);
  }
  for (std::size_t c = 0; c < tabs.size(); ++c) {
    for (std::size_t f = 0; f < tabs[c]->cols.size(); ++f) {
      if (!tabs[c]->is_set_field(static_cast<int>(f))) continue;
      std::map<ObjectId, Value> vals;
      for (auto& [id, fm] : sets[c]) vals[id] = fm[static_cast<int>(f)];
      build_children(*tabs[c], static_cast<int>(f), vals);
    }
    t.classes[c] = tabs[c];
  }
  return std::make_shared<const Tables>(std::move(t));
}

ApplyResult apply_row_updates(const Tables& prev, const Program& prog, std::vector<RowUpdate> updates,
                              const std::vector<NewObject>& spawns, const std::vector<ObjectId>& destroys,
                              std::vector<std::vector<EffectRows>> effects) {
  ApplyResult res;
  Tables next;
  next.classes = prev.classes;
  next.effects = std::move(effects);
  if (next.effects.empty()) next.effects = prev.effects;
  next.tick = prev.tick + 1;
  next.next_id = prev.next_id;

  std::set<ObjectId> dead(destroys.begin(), destroys.end());
  std::vector<std::vector<RowUpdate>> per_class(prev.classes.size());
  for (auto& u : updates) {
    if (dead.count(u.id)) {
      res.dropped.push_back(std::move(u));
      continue;
    }
    per_class[static_cast<std::size_t>(u.cls)].push_back(std::move(u));
  }
  std::vector<std::vector<const NewObject*>> born(prev.classes.size());
  for (const auto& s : spawns) {
    born[static_cast<std::size_t>(s.cls)].push_back(&s);
    next.next_id = std::max(next.next_id, s.id + 1);
  }

  for (std::size_t c = 0; c < prev.classes.size(); ++c) {
    const ClassTable& old = *prev.classes[c];
    bool any_dead = std::any_of(old.ids.begin(), old.ids.end(), [&](ObjectId id) { return dead.count(id) > 0; });
    if (per_class[c].empty() && born[c].empty() && !any_dead) continue;
    auto t = std::make_shared<ClassTable>(old);
    std::map<int, std::map<ObjectId, Value>> set_updates;
    for (auto& u : per_class[c]) {
      auto row = t->row_of(u.id);
      if (!row) {
        res.dropped.push_back(std::move(u));
        continue;
      }
      if (t->is_set_field(u.field)) {
        set_updates[u.field][u.id] = std::move(u.value);
      } else {
        t->cols[static_cast<std::size_t>(u.field)].set(*row, u.value);
      }
    }
    // Gather current set values of every row before reshaping.
    std::map<int, std::map<ObjectId, Value>> set_values;
    bool reshape = any_dead || !born[c].empty();
    for (std::size_t f = 0; f < t->cols.size(); ++f) {
      int fi = static_cast<int>(f);
      if (!t->is_set_field(fi)) continue;
      if (!reshape && !set_updates.count(fi)) continue;
      auto& vals = set_values[fi];
      const ChildTable& ch = t->children[f];
      for (std::size_t i = 0; i < ch.size(); ++i) {
        auto& v = vals[ch.owner[i]];
        std::vector<Value> elems = v.is_absent() ? std::vector<Value>{} : v.as_set();
        elems.push_back(ch.elem[i]);
        v = Value::set(std::move(elems));
      }
      for (auto& [id, v] : set_updates[fi]) vals[id] = v;
    }
    if (any_dead) {
      std::vector<std::uint8_t> keep(t->ids.size());
      for (std::size_t r = 0; r < t->ids.size(); ++r) keep[r] = dead.count(t->ids[r]) ? 0 : 1;
      for (auto& col : t->cols) col.filter(keep);
      keep_rows(t->ids, keep);
    }
    for (const NewObject* s : born[c]) {
      if (!t->ids.empty() && s->id <= t->ids.back()) {
        throw EngineError("E_SPAWN_ID", "spawned id " + std::to_string(s->id) + " is not fresh");
      }
      t->ids.push_back(s->id);
      for (std::size_t f = 0; f < s->fields.size(); ++f) {
        t->cols[f].push(s->fields[f]);
        if (t->is_set_field(static_cast<int>(f))) set_values[static_cast<int>(f)][s->id] = s->fields[f];
      }
    }
    for (auto& [f, vals] : set_values) build_children(*t, f, vals);
    next.classes[c] = std::move(t);
  }
  (void)prog;
  res.snap = std::make_shared<const Tables>(std::move(next));
  return res;
}

std::uint64_t fingerprint(const Tables& t) {
  Hasher h;
  h.i64(t.tick);
  h.i64(t.next_id);
  for (const auto& c : t.classes) {
    h.u64(c->ids.size());
    for (std::size_t r = 0; r < c->size(); ++r) {
      h.i64(c->ids[r]);
      for (std::size_t f = 0; f < c->cols.size(); ++f) h.value(c->get(r, static_cast<int>(f)));
    }
  }
  return h.digest();
}

bool state_equal(const Tables& a, const Tables& b) {
  if (a.tick != b.tick || a.next_id != b.next_id || a.classes.size() != b.classes.size()) return false;
  for (std::size_t c = 0; c < a.classes.size(); ++c) {
    const auto& x = *a.classes[c];
    const auto& y = *b.classes[c];
    if (x.ids != y.ids || x.cols.size() != y.cols.size()) return false;
    for (std::size_t r = 0; r < x.size(); ++r) {
      for (std::size_t f = 0; f < x.cols.size(); ++f) {
        if (!identical(x.get(r, static_cast<int>(f)), y.get(r, static_cast<int>(f)))) return false;
      }
    }
  }
  return true;
}

std::string dump_world(const Program& prog, const Tables& t) {
  json objs = json::array();
  for (const auto& ci : prog.classes) {
    const ClassTable& tab = *t.classes[static_cast<std::size_t>(ci.index)];
    for (std::size_t r = 0; r < tab.size(); ++r) {
      json fields = json::object();
      for (std::size_t f = 0; f < ci.state.size(); ++f) {
        fields[ci.state[f].name] = value_to_json(tab.get(r, static_cast<int>(f)), true);
      }
      objs.push_back({{"class", ci.name}, {"id", tab.ids[r]}, {"fields", std::move(fields)}});
    }
  }
  return json{{"tick", t.tick}, {"nextId", t.next_id}, {"objects", std::move(objs)}}.dump();
}

}  // namespace sgl
