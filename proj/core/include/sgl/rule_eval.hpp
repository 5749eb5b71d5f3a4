#pragma once

#include <cstdint>
#include <optional>

#include "sgl/eval.hpp"
#include "sgl/program.hpp"
#include "sgl/store.hpp"

namespace sgl {

/// Environment for update rules and constraints of one object. `Effects`
/// is callable as Value(int field) and returns Absent for a missing
/// avg/min/max reduction. `Post` is callable as std::optional<Value>(int
/// field) and overrides the object's own state (constraint evaluation on a
/// tentative post-state).
template <class Effects, class Post>
struct ObjectEnv {
  const Tables& snap;
  ObjectId id;
  int cls;
  std::int64_t now;
  Effects effects;
  Post post;

  Value slot(int) const { throw Fault{"rule reads a script binding"}; }
  ObjectId self() const { return id; }
  Value state(ObjectId o, int c, int f) const {
    if (o == id && c == cls) {
      if (auto v = post(f)) return *v;
    }
    return snap.state(o, c, f);
  }
  Value effect(int f) const {
    Value v = effects(f);
    if (v.is_absent()) throw AbsentEffectRead{};
    return v;
  }
  std::int64_t tick() const { return now; }
  std::uint64_t seed() const { return 0; }
};

inline auto no_post() {
  return [](int) -> std::optional<Value> { return std::nullopt; };
}

/// New value of a ruled field; nullopt when the rule reads an absent effect
/// (the field keeps its value). Throws Fault.
template <class Effects>
std::optional<Value> eval_rule(const Program& prog, const Tables& snap, int cls, int field, ObjectId id,
                               std::int64_t tick, Effects effects) {
  const auto& f = prog.classes[static_cast<std::size_t>(cls)].state[static_cast<std::size_t>(field)];
  ObjectEnv<Effects, decltype(no_post())> env{snap, id, cls, tick, effects, no_post()};
  try {
    return coerce(eval(*f.rule, env), f.type);
  } catch (const AbsentEffectRead&) {
    return std::nullopt;
  }
}

}  // namespace sgl
