#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace sgl {

using ObjectId = std::int64_t;
inline constexpr ObjectId kNullId = 0;

class Value;
/// Sorted by canonical order, no duplicates.
using SetData = std::vector<Value>;

/// A dynamically typed SGL value. The default-constructed value is Absent,
/// which marks an effect or accumulator that received no assignment.
class Value {
 public:
  enum class Kind : std::uint8_t { Absent, Number, Int, Bool, String, Ref, Set };

  Value() = default;

  static Value number(double d) { Value v; v.v_ = d; return v; }
  static Value integer(std::int64_t i) { Value v; v.v_ = i; return v; }
  static Value boolean(bool b) { Value v; v.v_ = b; return v; }
  static Value string(std::string s);
  static Value ref(ObjectId id) { Value v; v.v_ = RefBox{id}; return v; }
  static Value null_ref() { return ref(kNullId); }
  /// Canonicalizes (sorts, dedups) the elements.
  static Value set(std::vector<Value> elems);
  static Value empty_set();

  Kind kind() const { return static_cast<Kind>(v_.index()); }
  bool is_absent() const { return v_.index() == 0; }
  bool is_number() const { return kind() == Kind::Number; }
  bool is_int() const { return kind() == Kind::Int; }
  bool is_numeric() const { return is_number() || is_int(); }

  double as_number() const;  // Int promotes
  std::int64_t as_int() const;
  bool as_bool() const;
  const std::string& as_string() const;
  ObjectId as_ref() const;
  const SetData& as_set() const;

 private:
  struct AbsentTag {};
  struct RefBox { ObjectId id; };
  std::variant<AbsentTag, double, std::int64_t, bool, std::shared_ptr<const std::string>, RefBox,
               std::shared_ptr<const SetData>>
      v_;
};

/// Total order over all values: kind first, then IEEE totalOrder for
/// numbers, lexicographic for strings and sets.
int canonical_compare(const Value& a, const Value& b);
/// Equality under the canonical order (bitwise for doubles).
inline bool identical(const Value& a, const Value& b) { return canonical_compare(a, b) == 0; }

struct CanonicalLess {
  bool operator()(const Value& a, const Value& b) const { return canonical_compare(a, b) < 0; }
};

/// Human-readable rendering with full precision (17 significant digits).
std::string to_string(const Value& v);
const char* kind_name(Value::Kind k);

/// 64-bit FNV-1a, used for fingerprints, checksums and the script RNG.
class Hasher {
 public:
  void bytes(const void* data, std::size_t n);
  void u64(std::uint64_t x) { bytes(&x, sizeof x); }
  void i64(std::int64_t x) { bytes(&x, sizeof x); }
  void str(const std::string& s) { u64(s.size()); bytes(s.data(), s.size()); }
  void value(const Value& v);
  std::uint64_t digest() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ull;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace sgl
