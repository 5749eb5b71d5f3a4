#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sgl/ast.hpp"

namespace sgl {

inline constexpr const char* kPcField = "_pc";
inline constexpr const char* kTxnStatusField = "lastTxnStatus";
inline constexpr const char* kPcNextEffect = "_pc_next";
inline constexpr const char* kPcResetEffect = "_pc_reset";

/// lastTxnStatus values.
inline constexpr std::int64_t kTxnNone = 0;
inline constexpr std::int64_t kTxnCommitted = 1;
inline constexpr std::int64_t kTxnAborted = 2;

struct StateField {
  std::string name;
  Type type;
  ExprPtr init;  // constant; null means the type's zero value
  ExprPtr rule;  // annotated update rule, null if none
  bool synthesized = false;
  bool constrained = false;  // referenced by a class constraint: owned by the transaction engine
};

struct EffectField {
  std::string name;
  Type type;
  Combinator comb = Combinator::Sum;
  bool synthesized = false;
  bool transactional = false;  // feeds a constrained field's update rule
};

struct SlotInfo {
  enum class Kind { This, Local, LoopVar, Accumulator, Temp };
  std::string name;
  Type type;
  Kind kind = Kind::Local;
};

/// One analyzed class: fields, rules, constraints, and its (optional)
/// script and handlers with resolved annotations.
struct ClassInfo {
  std::string name;
  int index = -1;
  std::vector<StateField> state;
  std::vector<EffectField> effects;
  std::vector<ExprPtr> constraints;

  int pc_field = -1;
  int txn_status_field = -1;
  int pc_next_effect = -1;
  int pc_reset_effect = -1;

  bool has_script = false;
  std::string script_name;
  Block body;  // original (multi-tick) script body
  std::vector<HandlerDef> handlers;
  int wait_count = 0;
  int end_stmt_id = -1;  // provenance id for the end-of-script pc emission

  std::vector<SlotInfo> slots;  // slot 0 is `this`

  int state_index(std::string_view n) const;
  int effect_index(std::string_view n) const;
  bool has_constraints() const { return !constraints.empty(); }
};

/// Fully analyzed compilation unit: the input to lowering, planning and
/// both execution engines.
struct Program {
  CompilationUnit source;  // as parsed, unannotated
  std::vector<ClassInfo> classes;
  std::uint64_t hash = 0;  // hash of the canonical source text
  int stmt_count = 0;
  int expr_count = 0;

  int class_index(std::string_view name) const;
  const ClassInfo& cls(std::string_view name) const;
};

/// An external update component's claim on state fields, checked for
/// partition overlap at analysis time.
struct ComponentClaim {
  std::string component;
  std::string cls;
  std::vector<std::string> fields;
};

struct AnalyzeOptions {
  std::vector<ComponentClaim> claims;
};

/// Resolution, typing and access-discipline checks. Diagnostics codes:
/// E_READ_EFFECT, E_WRITE_STATE, E_READ_ACC_IN_BLOCK1, E_WRITE_ACC_OUTSIDE_BLOCK1,
/// E_WAIT_IN_ACCUM, E_WAIT_IN_ATOMIC, E_WAIT_IN_HANDLER,
/// E_UNPARTITIONED_STATE, E_LOCAL_ACROSS_WAIT, E_TYPE, E_UNKNOWN_NAME, ...
/// Throws CompileError when any error is found; warnings are returned.
Program check_access(CompilationUnit unit, const AnalyzeOptions& opts = {},
                     std::vector<Diagnostic>* warnings = nullptr);

/// parse + check_access.
Program compile_program(std::string_view source, const AnalyzeOptions& opts = {});

/// Parses and types a boolean expression over one object's own state, with
/// the same rules as a constraint (breakpoint conditions). Throws CompileError.
ExprPtr analyze_condition(const Program& prog, int cls, std::string_view text);

/// Int -> number widening used wherever a value is stored into a typed slot.
bool assignable(const Type& to, const Type& from);

}  // namespace sgl
