#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sgl/combinator.hpp"
#include "sgl/diagnostics.hpp"

namespace sgl {

enum class TypeKind { Void, Number, Int, Bool, String, Ref, Set, Null, AnySet };

struct Type {
  TypeKind kind = TypeKind::Void;
  std::string cls;                   // Ref: class name
  std::shared_ptr<const Type> elem;  // Set: element type

  static Type number() { return {TypeKind::Number, {}, nullptr}; }
  static Type integer() { return {TypeKind::Int, {}, nullptr}; }
  static Type boolean() { return {TypeKind::Bool, {}, nullptr}; }
  static Type string() { return {TypeKind::String, {}, nullptr}; }
  static Type ref(std::string c) { return {TypeKind::Ref, std::move(c), nullptr}; }
  static Type set(Type e) { return {TypeKind::Set, {}, std::make_shared<const Type>(std::move(e))}; }
  static Type null() { return {TypeKind::Null, {}, nullptr}; }
  static Type any_set() { return {TypeKind::AnySet, {}, nullptr}; }

  bool is_numeric() const { return kind == TypeKind::Number || kind == TypeKind::Int; }
  bool is_set() const { return kind == TypeKind::Set || kind == TypeKind::AnySet; }
  std::string str() const;
  friend bool operator==(const Type& a, const Type& b);
};

enum class BinOp { Or, And, Eq, Ne, Lt, Le, Gt, Ge, Add, Sub, Mul, Div, Mod };
enum class UnOp { Not, Neg };

const char* binop_text(BinOp op);

/// How an identifier was resolved by the analyzer.
enum class NameRef { Unresolved, StateField, EffectField, Local, LoopVar, Accumulator, ClassExtent };

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Expr {
  enum class Kind { Number, Int, Bool, String, Null, This, Name, Field, Unary, Binary, Call, SetLit };

  Kind kind = Kind::Null;
  SourceLoc loc;
  double num = 0.0;
  std::int64_t ival = 0;
  bool bval = false;
  std::string text;  // string literal contents / identifier / field name / callee
  UnOp uop = UnOp::Not;
  BinOp bop = BinOp::Add;
  std::vector<ExprPtr> args;  // Field: [object]; Unary: [x]; Binary: [l, r]; Call/SetLit: elements

  // Filled in by the analyzer.
  Type type;
  NameRef ref = NameRef::Unresolved;
  int slot = -1;      // Local / LoopVar / Accumulator
  int cls = -1;       // owning class of the field, or extent class
  int field = -1;     // state or effect field index within cls
  int id = -1;        // unique per program; seeds random()
  int loop_slot = -1; // random(): innermost enclosing loop variable slot
};

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;
using Block = std::vector<StmtPtr>;

struct Stmt {
  enum class Kind { Let, Assign, Insert, If, Accum, Wait, Atomic, Spawn, Destroy, Restart };

  Kind kind = Kind::Let;
  SourceLoc loc;
  std::string name;  // Let: local name; Accum: accumulator name
  ExprPtr target;    // Assign/Insert lvalue (Name or Field)
  ExprPtr expr;      // Let value, assigned value, If condition, Accum source, Destroy target
  Block body;        // If then / Accum block1 / Atomic body
  Block orelse;      // If else / Accum block2

  // accum-loop
  Type acc_type;
  Combinator acc_comb = Combinator::Sum;
  Type loop_type;
  std::string loop_var;

  // spawn
  std::string spawn_class;
  std::vector<std::pair<std::string, ExprPtr>> spawn_inits;

  // Filled in by the analyzer.
  int id = -1;
  int slot = -1;       // Let / Accum accumulator
  int loop_slot = -1;  // Accum loop variable
  int wait_index = 0;  // Wait: 1-based ordinal within its script
  int txn_site = -1;   // Assign/Insert/Spawn/Destroy: transaction site, -1 if none
  bool to_accumulator = false;  // Assign/Insert into an accumulator
  int target_cls = -1;          // Assign/Insert effect target; Spawn class
  int target_field = -1;
  std::vector<int> spawn_fields;  // Spawn: state field index per init
};

struct StateDecl {
  std::string name;
  Type type;
  ExprPtr init;  // may be null
  SourceLoc loc;
};

struct EffectDecl {
  std::string name;
  Type type;
  Combinator comb = Combinator::Sum;
  SourceLoc loc;
};

struct UpdateRule {
  std::string field;
  ExprPtr expr;
  SourceLoc loc;
};

struct ClassDef {
  std::string name;
  SourceLoc loc;
  std::vector<StateDecl> state;
  std::vector<EffectDecl> effects;
  std::vector<UpdateRule> rules;
  std::vector<ExprPtr> constraints;
};

struct ScriptDef {
  std::string name;
  std::string cls;
  Block body;
  SourceLoc loc;
};

struct HandlerDef {
  std::string cls;
  ExprPtr cond;
  Block body;
  bool may_restart = false;
  SourceLoc loc;
  int id = -1;  // analyzer
};

struct CompilationUnit {
  std::vector<ClassDef> classes;
  std::vector<ScriptDef> scripts;
  std::vector<HandlerDef> handlers;
};

/// Structural equality ignoring source positions and analyzer annotations.
bool ast_equal(const Expr& a, const Expr& b);
bool ast_equal(const Block& a, const Block& b);
bool ast_equal(const CompilationUnit& a, const CompilationUnit& b);

/// Deep copy (annotations included).
ExprPtr clone(const ExprPtr& e);
StmtPtr clone(const StmtPtr& s);
Block clone(const Block& b);
CompilationUnit clone(const CompilationUnit& u);

bool contains_wait(const Block& b);
bool contains_wait(const Stmt& s);

}  // namespace sgl
