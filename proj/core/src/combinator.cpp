#include "sgl/combinator.hpp"

#include <algorithm>
#include <vector>

namespace sgl {

const char* combinator_name(Combinator c) {
  switch (c) {
    case Combinator::Sum: return "sum";
    case Combinator::Avg: return "avg";
    case Combinator::Min: return "min";
    case Combinator::Max: return "max";
    case Combinator::Count: return "count";
    case Combinator::Or: return "or";
    case Combinator::And: return "and";
    case Combinator::SetUnion: return "setUnion";
  }
  return "?";
}

std::optional<Combinator> parse_combinator(std::string_view name) {
  for (auto c : {Combinator::Sum, Combinator::Avg, Combinator::Min, Combinator::Max, Combinator::Count,
                 Combinator::Or, Combinator::And, Combinator::SetUnion}) {
    if (name == combinator_name(c)) return c;
  }
  return std::nullopt;
}

bool has_identity(Combinator c) {
  return c != Combinator::Avg && c != Combinator::Min && c != Combinator::Max;
}

Value identity_value(Combinator c, bool integral) {
  switch (c) {
    case Combinator::Sum:
    case Combinator::Count: return integral ? Value::integer(0) : Value::number(0.0);
    case Combinator::Or: return Value::boolean(false);
    case Combinator::And: return Value::boolean(true);
    case Combinator::SetUnion: return Value::empty_set();
    default: return Value{};
  }
}

Value reduce_sorted(Combinator c, std::span<const Value> vals, bool integral) {
  if (vals.empty()) return identity_value(c, integral);
  switch (c) {
    case Combinator::Sum:
      if (integral) {
        std::uint64_t acc = 0;
        for (const auto& v : vals) acc += static_cast<std::uint64_t>(v.as_int());
        return Value::integer(static_cast<std::int64_t>(acc));
      } else {
        double acc = 0.0;
        for (const auto& v : vals) acc += v.as_number();
        return Value::number(acc);
      }
    case Combinator::Avg: {
      double acc = 0.0;
      for (const auto& v : vals) acc += v.as_number();
      return Value::number(acc / static_cast<double>(vals.size()));
    }
    case Combinator::Min:
    case Combinator::Max: {
      // Refs by id, strings lexicographically, numbers by IEEE comparison; first occurrence wins ties.
      Value best = vals[0];
      for (const auto& v : vals.subspan(1)) {
        bool better;
        if (v.kind() == Value::Kind::Ref) {
          better = c == Combinator::Min ? v.as_ref() < best.as_ref() : v.as_ref() > best.as_ref();
        } else if (v.kind() == Value::Kind::String) {
          better = c == Combinator::Min ? v.as_string() < best.as_string() : v.as_string() > best.as_string();
        } else if (integral) {
          better = c == Combinator::Min ? v.as_int() < best.as_int() : v.as_int() > best.as_int();
        } else {
          double a = v.as_number();
          double b = best.as_number();
          better = c == Combinator::Min ? a < b : a > b;
          if (a != a) better = false;  // NaN never wins
          if (b != b && a == a) better = true;
        }
        if (better) best = v;
      }
      if (!integral && best.is_int()) return Value::number(best.as_number());
      return best;
    }
    case Combinator::Count:
      return integral ? Value::integer(static_cast<std::int64_t>(vals.size()))
                      : Value::number(static_cast<double>(vals.size()));
    case Combinator::Or: {
      bool acc = false;
      for (const auto& v : vals) acc = acc || v.as_bool();
      return Value::boolean(acc);
    }
    case Combinator::And: {
      bool acc = true;
      for (const auto& v : vals) acc = acc && v.as_bool();
      return Value::boolean(acc);
    }
    case Combinator::SetUnion: {
      std::vector<Value> all;
      for (const auto& v : vals) {
        if (v.kind() == Value::Kind::Set) {
          all.insert(all.end(), v.as_set().begin(), v.as_set().end());
        } else {
          all.push_back(v);
        }
      }
      return Value::set(std::move(all));
    }
  }
  return Value{};
}

Value reduce_values(Combinator c, std::span<const Value> values, bool integral) {
  std::vector<Value> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end(), CanonicalLess{});
  return reduce_sorted(c, sorted, integral);
}

}  // namespace sgl
