#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgl/lowering.hpp"
#include "sgl/program.hpp"
#include "sgl/schema.hpp"

namespace sgl {

enum class OpKind { TableScan, IndexRangeScan, Select, Project, ThetaJoin, Unnest, GroupAggregate, Map, EffectEmit };

const char* op_name(OpKind k);

/// One relational operator. Inputs are node ids; the graph is a DAG whose
/// leaves are scans of state tables and whose roots are EffectEmit nodes.
struct OpNode {
  int id = -1;
  OpKind kind = OpKind::TableScan;
  std::string table;
  std::string detail;
  std::vector<int> inputs;
};

/// One inclusive (or strict) bound on an index dimension; `expr` reads only
/// the outer row.
struct BoxBound {
  bool lower = true;
  ExprPtr expr;
};

/// Join of the current relation with an accum-loop source.
struct JoinInfo {
  const Stmt* stmt = nullptr;
  bool extent = false;  // class extent (ThetaJoin) or set-valued expression (Unnest)
  int inner_cls = -1;
  int loop_slot = -1;
  int depth = 0;        // nesting depth of the loop, 0 = outermost
  int acc_slot = -1;
  Combinator comb = Combinator::Sum;
  bool acc_int = false;

  /// Leading if-predicate of block1 whose fault-free prefix bounds the loop
  /// variable's numeric fields; rows outside the box are pruned by an index.
  bool index_eligible = false;
  std::vector<int> dims;                      // inner state fields (number)
  std::vector<std::vector<BoxBound>> bounds;  // per dim

  int scan_node = -1;     // TableScan of the inner table
  int index_node = -1;    // IndexRangeScan alternative (eligible joins)
  int join_node = -1;     // ThetaJoin / Unnest
  int filter_node = -1;   // Select of the leading if (eligible joins)
  int agg_node = -1;      // GroupAggregate
};

/// Executable step; mirrors the lowered statement tree.
struct Step {
  enum class Kind { Let, Branch, Join, EmitEffect, EmitAcc, Spawn, Destroy };
  Kind kind = Kind::Let;
  const Stmt* stmt = nullptr;
  int node = -1;       // Map / Select(true) / EffectEmit / Project
  int else_node = -1;  // Branch: Select(false)
  int slot = -1;       // Let target; EmitAcc accumulator
  int acc_depth = -1;  // EmitAcc: depth of the accumulator's loop
  int join = -1;       // Join: index into PlanTemplate::joins
  std::vector<Step> body;    // Branch then / Join block1
  std::vector<Step> orelse;  // Branch else
};

/// Logical plan of one class with every physical alternative annotated.
struct PlanTemplate {
  int cls = -1;
  std::vector<Step> steps;
  std::vector<JoinInfo> joins;
  std::vector<OpNode> nodes;
  int scan_node = -1;
  int depth_count = 0;  // maximum loop nesting + 1
};

/// A physical choice per join: scan or index.
struct PhysicalPlan {
  std::string id;       // "<Class>:<profile>"
  std::string profile;  // uniform | clustered
  std::vector<std::uint8_t> use_index;  // per join
};

/// Workload profile: assumed join fan-out per outer row.
enum class Profile { Uniform, Clustered };
const char* profile_name(Profile p);
double assumed_fanout(Profile p, double inner_size);

/// Estimated cost of probing `inner` rows `outer` times through a d-dim
/// range index (c * log2(N)^d + 3 * fanout per probe) versus a scan
/// (N per probe).
double scan_cost(double outer, double inner);
double index_cost(double outer, double inner, int dims, double fanout);

struct PlanSet {
  PlanTemplate tmpl;
  std::vector<PhysicalPlan> plans;  // distinct physical plans, uniform first
};

/// Compiles one lowered script. Throws CompileError E_UNCOMPILABLE on a
/// construct without a relational translation.
PlanTemplate compile_to_plan(const Program& prog, const LoweredScript& script);

/// Chooses access paths for each profile given extent sizes; duplicate
/// physical plans are merged.
PlanSet optimize(const Program& prog, PlanTemplate tmpl, const std::vector<std::size_t>& extent_sizes);

/// Tree-structured JSON: one tree per EffectEmit root, children are
/// inputs, index-eligible joins list both access paths. `cardinalities`
/// (per node, may be empty) are attached as "rows".
std::string plan_to_json(const Program& prog, const PlanSet& set, int active,
                         const std::vector<double>& cardinalities = {});

}  // namespace sgl
