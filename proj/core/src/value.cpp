#include "sgl/value.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace sgl {

Value Value::string(std::string s) {
  Value v;
  v.v_ = std::make_shared<const std::string>(std::move(s));
  return v;
}

Value Value::set(std::vector<Value> elems) {
  std::sort(elems.begin(), elems.end(), CanonicalLess{});
  elems.erase(std::unique(elems.begin(), elems.end(), [](const Value& a, const Value& b) { return identical(a, b); }),
              elems.end());
  Value v;
  v.v_ = std::make_shared<const SetData>(std::move(elems));
  return v;
}

Value Value::empty_set() {
  static const auto kEmpty = std::make_shared<const SetData>();
  Value v;
  v.v_ = kEmpty;
  return v;
}

double Value::as_number() const {
  if (auto* d = std::get_if<double>(&v_)) return *d;
  if (auto* i = std::get_if<std::int64_t>(&v_)) return static_cast<double>(*i);
  throw std::logic_error(std::string("value is not numeric: ") + kind_name(kind()));
}

std::int64_t Value::as_int() const {
  if (auto* i = std::get_if<std::int64_t>(&v_)) return *i;
  throw std::logic_error(std::string("value is not an int: ") + kind_name(kind()));
}

bool Value::as_bool() const {
  if (auto* b = std::get_if<bool>(&v_)) return *b;
  throw std::logic_error(std::string("value is not a bool: ") + kind_name(kind()));
}

const std::string& Value::as_string() const {
  if (auto* s = std::get_if<std::shared_ptr<const std::string>>(&v_)) return **s;
  throw std::logic_error(std::string("value is not a string: ") + kind_name(kind()));
}

ObjectId Value::as_ref() const {
  if (auto* r = std::get_if<RefBox>(&v_)) return r->id;
  throw std::logic_error(std::string("value is not a ref: ") + kind_name(kind()));
}

const SetData& Value::as_set() const {
  if (auto* s = std::get_if<std::shared_ptr<const SetData>>(&v_)) return **s;
  throw std::logic_error(std::string("value is not a set: ") + kind_name(kind()));
}

namespace {

std::uint64_t total_order_key(double d) {
  auto bits = std::bit_cast<std::uint64_t>(d);
  return (bits >> 63) ? ~bits : (bits | (1ull << 63));
}

template <class T>
int cmp3(const T& a, const T& b) {
  return a < b ? -1 : (b < a ? 1 : 0);
}

}  // namespace

int canonical_compare(const Value& a, const Value& b) {
  if (a.kind() != b.kind()) return cmp3(static_cast<int>(a.kind()), static_cast<int>(b.kind()));
  switch (a.kind()) {
    case Value::Kind::Absent: return 0;
    case Value::Kind::Number: return cmp3(total_order_key(a.as_number()), total_order_key(b.as_number()));
    case Value::Kind::Int: return cmp3(a.as_int(), b.as_int());
    case Value::Kind::Bool: return cmp3(a.as_bool(), b.as_bool());
    case Value::Kind::String: return a.as_string().compare(b.as_string()) < 0 ? -1 : (a.as_string() == b.as_string() ? 0 : 1);
    case Value::Kind::Ref: return cmp3(a.as_ref(), b.as_ref());
    case Value::Kind::Set: {
      const auto& x = a.as_set();
      const auto& y = b.as_set();
      for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
        int c = canonical_compare(x[i], y[i]);
        if (c != 0) return c;
      }
      return cmp3(x.size(), y.size());
    }
  }
  return 0;
}

const char* kind_name(Value::Kind k) {
  switch (k) {
    case Value::Kind::Absent: return "absent";
    case Value::Kind::Number: return "number";
    case Value::Kind::Int: return "int";
    case Value::Kind::Bool: return "bool";
    case Value::Kind::String: return "string";
    case Value::Kind::Ref: return "ref";
    case Value::Kind::Set: return "set";
  }
  return "?";
}

std::string to_string(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::Absent: return "<absent>";
    case Value::Kind::Number: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v.as_number());
      return buf;
    }
    case Value::Kind::Int: return std::to_string(v.as_int());
    case Value::Kind::Bool: return v.as_bool() ? "true" : "false";
    case Value::Kind::String: return "\"" + v.as_string() + "\"";
    case Value::Kind::Ref: return v.as_ref() == kNullId ? "null" : "#" + std::to_string(v.as_ref());
    case Value::Kind::Set: {
      std::string out = "{";
      bool first = true;
      for (const auto& e : v.as_set()) {
        if (!first) out += ", ";
        first = false;
        out += to_string(e);
      }
      return out + "}";
    }
  }
  return "?";
}

void Hasher::bytes(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h_ ^= p[i];
    h_ *= 0x100000001b3ull;
  }
}

void Hasher::value(const Value& v) {
  u64(static_cast<std::uint64_t>(v.kind()));
  switch (v.kind()) {
    case Value::Kind::Absent: break;
    case Value::Kind::Number: u64(std::bit_cast<std::uint64_t>(v.as_number())); break;
    case Value::Kind::Int: i64(v.as_int()); break;
    case Value::Kind::Bool: u64(v.as_bool()); break;
    case Value::Kind::String: str(v.as_string()); break;
    case Value::Kind::Ref: i64(v.as_ref()); break;
    case Value::Kind::Set:
      u64(v.as_set().size());
      for (const auto& e : v.as_set()) value(e);
      break;
  }
}

std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace sgl
