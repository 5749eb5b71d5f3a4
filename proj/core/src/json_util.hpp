#pragma once

#include <string>

#include "json.hpp"
#include "sgl/ast.hpp"
#include "sgl/value.hpp"

namespace sgl {

using nlohmann::json;

/// Display form: refs as ids (null for 0), non-finite numbers as
/// "inf" / "-inf" / "nan". With `exact`, NaNs keep their bit pattern as
/// "nan:<hex>" so a round trip is bit-identical.
json value_to_json(const Value& v, bool exact = false);

/// Inverse of value_to_json for a declared type. Throws EngineError with
/// `code`, naming `where`.
Value value_from_json(const json& j, const Type& t, const std::string& where, const char* code = "E_WORLD");

}  // namespace sgl
