#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sgl/program.hpp"
#include "sgl/value.hpp"

namespace sgl {

/// One typed value column. Bools and refs share the 64-bit integer storage.
class Column {
 public:
  Column() = default;
  explicit Column(TypeKind kind) : kind_(kind) {}

  TypeKind kind() const { return kind_; }
  std::size_t size() const;
  Value get(std::size_t row) const;
  double number_at(std::size_t row) const { return num_[row]; }
  const std::vector<double>& numbers() const { return num_; }
  void push(const Value& v);
  void set(std::size_t row, const Value& v);
  /// Keeps rows whose flag is set, preserving order.
  void filter(const std::vector<std::uint8_t>& keep);

 private:
  TypeKind kind_ = TypeKind::Void;
  std::vector<double> num_;
  std::vector<std::int64_t> ints_;
  std::vector<std::string> str_;
};

/// (owner_id, element) rows for one set-typed field, sorted by owner then
/// canonical element order.
struct ChildTable {
  std::vector<ObjectId> owner;
  std::vector<Value> elem;

  Value get(ObjectId id) const;
  std::size_t size() const { return owner.size(); }
};

/// State relation of one class: ids ascending, one column per state field.
/// Set fields keep an empty placeholder column and live in `children`.
struct ClassTable {
  int cls = -1;
  std::vector<ObjectId> ids;
  std::vector<Column> cols;
  std::vector<ChildTable> children;  // indexed by field; empty for scalar fields

  std::size_t size() const { return ids.size(); }
  std::optional<std::size_t> row_of(ObjectId id) const;
  Value get(std::size_t row, int field) const;
  bool is_set_field(int field) const { return cols[static_cast<std::size_t>(field)].kind() == TypeKind::Set; }
};

/// Reduced values of one effect field from the last completed tick (present
/// entries only), kept for inspection.
struct EffectRows {
  std::vector<ObjectId> ids;
  std::vector<Value> vals;
};

/// All relations at a tick boundary. Immutable once published as a Snapshot;
/// unchanged class tables are shared between consecutive snapshots.
struct Tables {
  std::vector<std::shared_ptr<const ClassTable>> classes;
  std::vector<std::vector<EffectRows>> effects;  // [class][effect field]
  ObjectId next_id = 1;
  std::int64_t tick = 0;

  /// State read used by both engines. Throws Fault for a null, dead or
  /// wrong-class reference.
  Value state(ObjectId id, int cls, int field) const;
  /// (class, row) of a live object.
  std::optional<std::pair<int, std::size_t>> locate(ObjectId id) const;
  std::size_t object_count() const;
};

using Snapshot = std::shared_ptr<const Tables>;

struct RowUpdate {
  int cls = -1;
  ObjectId id = kNullId;
  int field = -1;
  Value value;
};

struct NewObject {
  int cls = -1;
  ObjectId id = kNullId;
  std::vector<Value> fields;  // one per state field, already coerced
};

struct ApplyResult {
  Snapshot snap;
  std::vector<RowUpdate> dropped;  // updates addressed to destroyed or missing objects
};

/// Empty tables for every class.
Tables create_tables(const Program& prog);

/// Declared initializer (or zero value) of every state field.
std::vector<Value> default_fields(const ClassInfo& cls);

/// Parses a world document {"classes": {C: {field: default}}, "objects":
/// [{"class", "id", "fields"}]}. Throws EngineError E_WORLD naming the
/// offending class, field or id.
Snapshot load_world(const Program& prog, std::string_view json_text);

/// World document for `t` in load_world's format with every state field and
/// exact values, plus informational "tick" and "nextId".
std::string dump_world(const Program& prog, const Tables& t);

/// Next-tick relations: updates, then destroys (which win over updates to
/// the same id), then spawns (ids must exceed every existing id).
ApplyResult apply_row_updates(const Tables& prev, const Program& prog, std::vector<RowUpdate> updates,
                              const std::vector<NewObject>& spawns, const std::vector<ObjectId>& destroys,
                              std::vector<std::vector<EffectRows>> effects);

/// Hash over every state value (bit patterns for doubles), ids, next_id and
/// tick; equal fingerprints are used as the trajectory comparison key.
std::uint64_t fingerprint(const Tables& t);
/// Exact equality of state (effects excluded).
bool state_equal(const Tables& a, const Tables& b);

}  // namespace sgl
