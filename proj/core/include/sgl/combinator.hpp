#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "sgl/value.hpp"

namespace sgl {

enum class Combinator { Sum, Avg, Min, Max, Count, Or, And, SetUnion };

const char* combinator_name(Combinator c);
std::optional<Combinator> parse_combinator(std::string_view name);

/// True when a zero-assignment reduction has a value (the identity);
/// avg/min/max have none and reduce to Absent.
bool has_identity(Combinator c);

/// Identity for the given result kind (sum/count -> 0, or -> false,
/// and -> true, setUnion -> {}). Absent for avg/min/max.
Value identity_value(Combinator c, bool integral);

/// Reduces values already sorted in canonical order. `integral` selects the
/// int flavour of sum/min/max/count. The caller guarantees type agreement.
Value reduce_sorted(Combinator c, std::span<const Value> sorted, bool integral);

/// Sorts a copy by canonical value order, then reduces. Used for
/// accumulators, whose entries carry no provenance.
Value reduce_values(Combinator c, std::span<const Value> values, bool integral);

}  // namespace sgl
