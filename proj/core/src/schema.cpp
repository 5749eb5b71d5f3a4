#include "sgl/schema.hpp"

#include "sgl/diagnostics.hpp"

namespace sgl {

std::string state_table_name(const std::string& cls) { return cls + "_state"; }
std::string effect_table_name(const std::string& cls, const std::string& field) { return cls + "_eff_" + field; }

const TableDef* PhysicalSchema::table(const std::string& name) const {
  for (const auto& t : tables) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

namespace {

std::string element_column(const Type& set_type) {
  return set_type.elem->kind == TypeKind::Ref ? "item_id" : "elem";
}

}  // namespace

PhysicalSchema derive_schema(const Program& prog) {
  PhysicalSchema s;
  auto add = [&](TableDef t) {
    if (s.table(t.name)) throw EngineError("E_SCHEMA", "duplicate table " + t.name);
    s.tables.push_back(std::move(t));
  };
  for (const auto& c : prog.classes) {
    TableDef st{state_table_name(c.name), TableDef::Kind::State, c.index, -1, {{"id", Type::integer()}}};
    std::vector<TableDef> children;
    for (std::size_t f = 0; f < c.state.size(); ++f) {
      const auto& sf = c.state[f];
      if (sf.type.kind == TypeKind::Set) {
        std::string col = element_column(sf.type);
        children.push_back({c.name + "_" + sf.name, TableDef::Kind::StateSet, c.index, static_cast<int>(f),
                            {{"owner_id", Type::integer()}, {col, *sf.type.elem}}});
        s.fields[{c.name, sf.name}] = {children.back().name, col};
      } else {
        st.columns.emplace_back(sf.name, sf.type);
        s.fields[{c.name, sf.name}] = {st.name, sf.name};
      }
    }
    add(std::move(st));
    for (auto& t : children) add(std::move(t));
    for (std::size_t f = 0; f < c.effects.size(); ++f) {
      const auto& ef = c.effects[f];
      std::string name = effect_table_name(c.name, ef.name);
      if (ef.type.kind == TypeKind::Set) {
        std::string col = element_column(ef.type);
        add({name, TableDef::Kind::EffectSet, c.index, static_cast<int>(f),
             {{"owner_id", Type::integer()}, {col, *ef.type.elem}}});
        s.fields[{c.name, ef.name}] = {name, col};
      } else {
        add({name, TableDef::Kind::Effect, c.index, static_cast<int>(f), {{"id", Type::integer()}, {"val", ef.type}}});
        s.fields[{c.name, ef.name}] = {name, "val"};
      }
    }
  }
  return s;
}

}  // namespace sgl
