#include "json_util.hpp"

#include <bit>
#include <cmath>
#include <cstdio>

#include "sgl/diagnostics.hpp"

namespace sgl {

json value_to_json(const Value& v, bool exact) {
  switch (v.kind()) {
    case Value::Kind::Absent: return nullptr;
    case Value::Kind::Number: {
      double d = v.as_number();
      if (std::isfinite(d)) return d;
      if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
      if (!exact) return "nan";
      char buf[32];
      std::snprintf(buf, sizeof buf, "nan:%016llx", static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(d)));
      return std::string(buf);
    }
    case Value::Kind::Int: return v.as_int();
    case Value::Kind::Bool: return v.as_bool();
    case Value::Kind::String: return v.as_string();
    case Value::Kind::Ref:
      if (v.as_ref() == kNullId) return nullptr;
      return v.as_ref();
    case Value::Kind::Set: {
      json a = json::array();
      for (const auto& e : v.as_set()) a.push_back(value_to_json(e, exact));
      return a;
    }
  }
  return nullptr;
}

Value value_from_json(const json& j, const Type& t, const std::string& where, const char* code) {
  auto bad = [&]() -> Value { throw EngineError(code, where + ": expected " + t.str() + ", got " + j.dump()); };
  switch (t.kind) {
    case TypeKind::Number:
      if (j.is_number()) return Value::number(j.get<double>());
      if (j.is_string()) {
        auto s = j.get<std::string>();
        if (s == "inf") return Value::number(INFINITY);
        if (s == "-inf") return Value::number(-INFINITY);
        if (s == "nan") return Value::number(NAN);
        if (s.rfind("nan:", 0) == 0 && s.size() == 20) {
          try {
            return Value::number(std::bit_cast<double>(static_cast<std::uint64_t>(std::stoull(s.substr(4), nullptr, 16))));
          } catch (const std::exception&) {
            return bad();
          }
        }
      }
      return bad();
    case TypeKind::Int:
      if (j.is_number_integer()) return Value::integer(j.get<std::int64_t>());
      return bad();
    case TypeKind::Bool:
      if (j.is_boolean()) return Value::boolean(j.get<bool>());
      return bad();
    case TypeKind::String:
      if (j.is_string()) return Value::string(j.get<std::string>());
      return bad();
    case TypeKind::Ref:
      if (j.is_null()) return Value::null_ref();
      if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return Value::ref(j.get<std::int64_t>());
      return bad();
    case TypeKind::Set: {
      if (!j.is_array()) return bad();
      std::vector<Value> elems;
      for (const auto& e : j) elems.push_back(value_from_json(e, *t.elem, where, code));
      return Value::set(std::move(elems));
    }
    default: return bad();
  }
}

}  // namespace sgl
