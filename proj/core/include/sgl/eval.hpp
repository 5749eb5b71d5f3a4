#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "sgl/ast.hpp"
#include "sgl/value.hpp"

namespace sgl {

/// Per-object runtime fault: division by zero, dereferencing a null or dead
/// reference, reading an accumulator that received nothing under avg/min/max.
/// The faulting object's effects for the tick are discarded.
struct Fault {
  std::string cause;
};

/// Thrown by update-rule evaluation when it reads an effect whose combinator
/// has no identity and that received no assignment; the ruled field keeps its
/// previous value.
struct AbsentEffectRead {};

Value apply_unary(UnOp op, const Value& x);
/// Non-short-circuit operators only (And/Or are handled by eval()).
Value apply_binary(BinOp op, const Value& a, const Value& b);
/// Widens ints to numbers wherever `t` asks for number (recursively in sets).
Value coerce(const Value& v, const Type& t);
/// Default value of a state field without an initializer.
Value zero_value(const Type& t);
/// Value of a constant initializer expression, coerced to `t`.
Value constant_value(const Expr& e, const Type& t);
/// Deterministic uniform [0,1) draw for a random() call site.
double script_random(std::uint64_t seed, std::int64_t tick, ObjectId self, int expr_id, const Value& loop_elem);
/// Non-random builtins over evaluated arguments.
Value call_builtin(const std::string& name, std::span<const Value> args);

/// Evaluates an analyzed expression. Env provides:
///   Value slot(int) const; ObjectId self() const;
///   Value state(ObjectId id, int cls, int field) const;   // throws Fault
///   Value effect(int field) const;                        // rules only
///   std::int64_t tick() const; std::uint64_t seed() const;
template <class Env>
Value eval(const Expr& e, const Env& env) {
  switch (e.kind) {
    case Expr::Kind::Number: return Value::number(e.num);
    case Expr::Kind::Int: return Value::integer(e.ival);
    case Expr::Kind::Bool: return Value::boolean(e.bval);
    case Expr::Kind::String: return Value::string(e.text);
    case Expr::Kind::Null: return Value::null_ref();
    case Expr::Kind::This: return Value::ref(env.self());
    case Expr::Kind::Name:
      switch (e.ref) {
        case NameRef::StateField: return env.state(env.self(), e.cls, e.field);
        case NameRef::EffectField: return env.effect(e.field);
        default: {
          Value v = env.slot(e.slot);
          if (v.is_absent()) throw Fault{"read of empty accumulator '" + e.text + "'"};
          return v;
        }
      }
    case Expr::Kind::Field: {
      ObjectId id = eval(*e.args[0], env).as_ref();
      if (id == kNullId) throw Fault{"null dereference reading '" + e.text + "'"};
      return env.state(id, e.cls, e.field);
    }
    case Expr::Kind::Unary: return apply_unary(e.uop, eval(*e.args[0], env));
    case Expr::Kind::Binary:
      if (e.bop == BinOp::And) {
        return eval(*e.args[0], env).as_bool() ? eval(*e.args[1], env) : Value::boolean(false);
      }
      if (e.bop == BinOp::Or) {
        return eval(*e.args[0], env).as_bool() ? Value::boolean(true) : eval(*e.args[1], env);
      }
      {
        Value a = eval(*e.args[0], env);
        return apply_binary(e.bop, a, eval(*e.args[1], env));
      }
    case Expr::Kind::Call: {
      if (e.text == "random") {
        return Value::number(script_random(env.seed(), env.tick(), env.self(), e.id,
                                           e.loop_slot >= 0 ? env.slot(e.loop_slot) : Value{}));
      }
      if (e.text == "tick") return Value::integer(env.tick());
      Value args[2];
      for (std::size_t i = 0; i < e.args.size() && i < 2; ++i) args[i] = eval(*e.args[i], env);
      return coerce(call_builtin(e.text, std::span<const Value>(args, e.args.size())), e.type);
    }
    case Expr::Kind::SetLit: {
      std::vector<Value> elems;
      elems.reserve(e.args.size());
      for (const auto& a : e.args) elems.push_back(eval(*a, env));
      return coerce(Value::set(std::move(elems)), e.type);
    }
  }
  return {};
}

inline bool eval_bool(const Expr& e, const auto& env) { return eval(e, env).as_bool(); }

}  // namespace sgl
