#include "sgl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sgl {

namespace {

std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
std::int64_t wrap_sub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
std::int64_t wrap_mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

bool values_equal(const Value& a, const Value& b) {
  if (a.is_numeric() && b.is_numeric()) {
    if (a.is_int() && b.is_int()) return a.as_int() == b.as_int();
    return a.as_number() == b.as_number();
  }
  if (a.kind() == Value::Kind::Set && b.kind() == Value::Kind::Set) {
    const auto& x = a.as_set();
    const auto& y = b.as_set();
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!values_equal(x[i], y[i])) return false;
    }
    return true;
  }
  return identical(a, b);
}

int order(const Value& a, const Value& b) {
  // -2 means unordered (NaN involved)
  if (a.kind() == Value::Kind::String) {
    int c = a.as_string().compare(b.as_string());
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  if (a.is_int() && b.is_int()) return a.as_int() < b.as_int() ? -1 : (a.as_int() > b.as_int() ? 1 : 0);
  double x = a.as_number();
  double y = b.as_number();
  if (x < y) return -1;
  if (x > y) return 1;
  if (x == y) return 0;
  return -2;
}

}  // namespace

Value apply_unary(UnOp op, const Value& x) {
  if (op == UnOp::Not) return Value::boolean(!x.as_bool());
  if (x.is_int()) return Value::integer(wrap_sub(0, x.as_int()));
  return Value::number(-x.as_number());
}

Value apply_binary(BinOp op, const Value& a, const Value& b) {
  switch (op) {
    case BinOp::Eq: return Value::boolean(values_equal(a, b));
    case BinOp::Ne: return Value::boolean(!values_equal(a, b));
    case BinOp::Lt: return Value::boolean(order(a, b) == -1);
    case BinOp::Le: {
      int o = order(a, b);
      return Value::boolean(o == -1 || o == 0);
    }
    case BinOp::Gt: return Value::boolean(order(a, b) == 1);
    case BinOp::Ge: {
      int o = order(a, b);
      return Value::boolean(o == 1 || o == 0);
    }
    case BinOp::Add:
      if (a.kind() == Value::Kind::String) return Value::string(a.as_string() + b.as_string());
      if (a.is_int() && b.is_int()) return Value::integer(wrap_add(a.as_int(), b.as_int()));
      return Value::number(a.as_number() + b.as_number());
    case BinOp::Sub:
      if (a.is_int() && b.is_int()) return Value::integer(wrap_sub(a.as_int(), b.as_int()));
      return Value::number(a.as_number() - b.as_number());
    case BinOp::Mul:
      if (a.is_int() && b.is_int()) return Value::integer(wrap_mul(a.as_int(), b.as_int()));
      return Value::number(a.as_number() * b.as_number());
    case BinOp::Div: {
      double d = b.as_number();
      if (d == 0.0) throw Fault{"division by zero"};
      return Value::number(a.as_number() / d);
    }
    case BinOp::Mod: {
      std::int64_t d = b.as_int();
      if (d == 0) throw Fault{"modulo by zero"};
      if (d == -1) return Value::integer(0);
      return Value::integer(a.as_int() % d);
    }
    case BinOp::And: return Value::boolean(a.as_bool() && b.as_bool());
    case BinOp::Or: return Value::boolean(a.as_bool() || b.as_bool());
  }
  return {};
}

Value coerce(const Value& v, const Type& t) {
  if (t.kind == TypeKind::Number && v.is_int()) return Value::number(static_cast<double>(v.as_int()));
  if (t.kind == TypeKind::Set && t.elem->kind == TypeKind::Number && v.kind() == Value::Kind::Set) {
    const auto& s = v.as_set();
    if (std::none_of(s.begin(), s.end(), [](const Value& x) { return x.is_int(); })) return v;
    std::vector<Value> out;
    out.reserve(s.size());
    for (const auto& x : s) out.push_back(x.is_int() ? Value::number(static_cast<double>(x.as_int())) : x);
    return Value::set(std::move(out));
  }
  return v;
}

Value zero_value(const Type& t) {
  switch (t.kind) {
    case TypeKind::Number: return Value::number(0.0);
    case TypeKind::Int: return Value::integer(0);
    case TypeKind::Bool: return Value::boolean(false);
    case TypeKind::String: return Value::string("");
    case TypeKind::Ref: return Value::null_ref();
    case TypeKind::Set: return Value::empty_set();
    default: return {};
  }
}

namespace {
struct ConstEnv {
  Value slot(int) const { throw Fault{"not constant"}; }
  ObjectId self() const { return kNullId; }
  Value state(ObjectId, int, int) const { throw Fault{"not constant"}; }
  Value effect(int) const { throw Fault{"not constant"}; }
  std::int64_t tick() const { return 0; }
  std::uint64_t seed() const { return 0; }
};
}  // namespace

Value constant_value(const Expr& e, const Type& t) { return coerce(eval(e, ConstEnv{}), t); }

double script_random(std::uint64_t seed, std::int64_t tick, ObjectId self, int expr_id, const Value& loop_elem) {
  Hasher h;
  h.u64(seed);
  h.i64(tick);
  h.i64(self);
  h.i64(expr_id);
  h.value(loop_elem);
  return static_cast<double>(mix64(h.digest()) >> 11) * 0x1.0p-53;
}

Value call_builtin(const std::string& f, std::span<const Value> a) {
  if (f == "abs") {
    if (a[0].is_int()) return Value::integer(a[0].as_int() < 0 ? wrap_sub(0, a[0].as_int()) : a[0].as_int());
    return Value::number(std::fabs(a[0].as_number()));
  }
  if (f == "sqrt") return Value::number(std::sqrt(a[0].as_number()));
  if (f == "floor") return Value::number(std::floor(a[0].as_number()));
  if (f == "toNumber") return Value::number(a[0].as_number());
  if (f == "toInt") {
    if (a[0].is_int()) return a[0];
    double d = std::trunc(a[0].as_number());
    if (!(d >= -9223372036854775808.0 && d < 9223372036854775808.0)) throw Fault{"toInt out of range"};
    return Value::integer(static_cast<std::int64_t>(d));
  }
  if (f == "min" || f == "max") {
    bool want_min = f == "min";
    if (a[0].is_int() && a[1].is_int()) {
      std::int64_t x = a[0].as_int();
      std::int64_t y = a[1].as_int();
      return Value::integer(want_min ? (y < x ? y : x) : (y > x ? y : x));
    }
    double x = a[0].as_number();
    double y = a[1].as_number();
    return Value::number(want_min ? (y < x ? y : x) : (y > x ? y : x));
  }
  if (f == "size") return Value::integer(static_cast<std::int64_t>(a[0].as_set().size()));
  if (f == "contains") {
    const auto& s = a[0].as_set();
    Value key = a[1];
    if (key.is_int() && !s.empty() && s.front().is_number()) key = Value::number(static_cast<double>(key.as_int()));
    return Value::boolean(std::binary_search(s.begin(), s.end(), key, CanonicalLess{}));
  }
  if (f == "union") {
    std::vector<Value> all(a[0].as_set().begin(), a[0].as_set().end());
    all.insert(all.end(), a[1].as_set().begin(), a[1].as_set().end());
    return Value::set(std::move(all));
  }
  throw Fault{"unknown builtin " + f};
}

}  // namespace sgl
