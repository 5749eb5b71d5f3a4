#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sgl/program.hpp"

namespace sgl {

struct ColumnRef {
  std::string table;
  std::string column;
};

struct TableDef {
  enum class Kind { State, Effect, StateSet, EffectSet };
  std::string name;
  Kind kind = Kind::State;
  int cls = -1;
  int field = -1;  // effect / set tables: the field they hold
  std::vector<std::pair<std::string, Type>> columns;
};

/// Relational layout derived from class definitions: one state table per
/// class (id + every scalar state field), one table per effect field
/// (id, val), and a child table (owner_id, item_id|elem) per set field.
struct PhysicalSchema {
  std::vector<TableDef> tables;
  /// (class, field) -> (table, column); covers every state and effect field.
  std::map<std::pair<std::string, std::string>, ColumnRef> fields;

  const TableDef* table(const std::string& name) const;
};

PhysicalSchema derive_schema(const Program& prog);

std::string state_table_name(const std::string& cls);
std::string effect_table_name(const std::string& cls, const std::string& field);

}  // namespace sgl
