#include "sgl/components.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "sgl/rule_eval.hpp"

namespace sgl {

void ExpressionUpdater::update(const UpdateContext& ctx, std::vector<RowUpdate>& out,
                               std::vector<FaultRecord>& faults) const {
  for (const auto& [cls, field] : owned_) {
    const auto& ci = ctx.prog.classes[static_cast<std::size_t>(cls)];
    const auto& sf = ci.state[static_cast<std::size_t>(field)];
    const auto& table = *ctx.snap.classes[static_cast<std::size_t>(cls)];
    if (field == ci.pc_field) {
      const auto& next = ctx.effects.fields[static_cast<std::size_t>(cls)][static_cast<std::size_t>(ci.pc_next_effect)];
      const auto& reset = ctx.effects.fields[static_cast<std::size_t>(cls)][static_cast<std::size_t>(ci.pc_reset_effect)];
      for (std::size_t row = 0; row < table.size(); ++row) {
        ObjectId id = table.ids[row];
        Value v = reset.lookup(id);
        if (v.is_absent()) v = next.lookup(id);
        if (!v.is_absent() && !identical(v, table.get(row, field))) out.push_back({cls, id, field, v});
      }
      continue;
    }
    if (!sf.rule) continue;
    for (std::size_t row = 0; row < table.size(); ++row) {
      ObjectId id = table.ids[row];
      auto eff = [&](int f) { return ctx.effects.get(ctx.prog, cls, f, id); };
      try {
        auto v = eval_rule(ctx.prog, ctx.snap, cls, field, id, ctx.tick, eff);
        if (v && !identical(*v, table.get(row, field))) out.push_back({cls, id, field, std::move(*v)});
      } catch (const Fault& f) {
        faults.push_back({id, cls, "update rule for '" + sf.name + "': " + f.cause});
      }
    }
  }
}

std::vector<FieldKey> TxnComponent::claims(const Program& prog) const {
  std::vector<FieldKey> out;
  for (const auto& ci : prog.classes) {
    for (std::size_t f = 0; f < ci.state.size(); ++f) {
      if (ci.state[f].constrained || static_cast<int>(f) == ci.txn_status_field) out.emplace_back(ci.index, static_cast<int>(f));
    }
  }
  return out;
}

void TxnComponent::update(const UpdateContext& ctx, std::vector<RowUpdate>& out, std::vector<FaultRecord>&) const {
  out.insert(out.end(), ctx.admission.owned_updates.begin(), ctx.admission.owned_updates.end());
}

namespace {
struct PhysicsFields {
  int cls, x, y, vx, vy;
};

PhysicsFields resolve(const Program& prog, const PhysicsConfig& cfg) {
  int cls = prog.class_index(cfg.cls);
  if (cls < 0) throw EngineError("E_CONFIG", "physics: unknown class '" + cfg.cls + "'");
  const auto& ci = prog.classes[static_cast<std::size_t>(cls)];
  PhysicsFields p{cls, ci.state_index(cfg.x), ci.state_index(cfg.y), ci.effect_index(cfg.vx), ci.effect_index(cfg.vy)};
  if (p.x < 0 || p.y < 0) throw EngineError("E_CONFIG", "physics: class '" + cfg.cls + "' lacks position fields");
  if (p.vx < 0 || p.vy < 0) throw EngineError("E_CONFIG", "physics: class '" + cfg.cls + "' lacks velocity effects");
  for (int f : {p.x, p.y}) {
    if (ci.state[static_cast<std::size_t>(f)].type.kind != TypeKind::Number) {
      throw EngineError("E_CONFIG", "physics: position fields must be number");
    }
  }
  return p;
}
}  // namespace

std::vector<FieldKey> PhysicsComponent::claims(const Program& prog) const {
  auto p = resolve(prog, cfg_);
  return {{p.cls, p.x}, {p.cls, p.y}};
}

void PhysicsComponent::update(const UpdateContext& ctx, std::vector<RowUpdate>& out, std::vector<FaultRecord>&) const {
  auto p = resolve(ctx.prog, cfg_);
  const auto& table = *ctx.snap.classes[static_cast<std::size_t>(p.cls)];
  const auto& evx = ctx.effects.fields[static_cast<std::size_t>(p.cls)][static_cast<std::size_t>(p.vx)];
  const auto& evy = ctx.effects.fields[static_cast<std::size_t>(p.cls)][static_cast<std::size_t>(p.vy)];
  auto vel = [](const ReducedField& f, ObjectId id) {
    Value v = f.lookup(id);
    return v.is_absent() ? 0.0 : v.as_number();
  };
  const double cx_lo = std::ceil(cfg_.min_x), cx_hi = std::floor(cfg_.max_x);
  const double cy_lo = std::ceil(cfg_.min_y), cy_hi = std::floor(cfg_.max_y);
  std::set<std::pair<double, double>> occupied;
  auto cell_of = [](double x, double y) { return std::make_pair(std::floor(x), std::floor(y)); };

  for (std::size_t row = 0; row < table.size(); ++row) {
    ObjectId id = table.ids[row];
    double x = table.cols[static_cast<std::size_t>(p.x)].number_at(row);
    double y = table.cols[static_cast<std::size_t>(p.y)].number_at(row);
    double nx = std::clamp(x + vel(evx, id), cfg_.min_x, cfg_.max_x);
    double ny = std::clamp(y + vel(evy, id), cfg_.min_y, cfg_.max_y);
    if (std::isnan(nx) || std::isnan(ny)) {
      nx = x;
      ny = y;
    }
    auto cell = cell_of(nx, ny);
    if (occupied.count(cell)) {
      // Rings of growing Chebyshev radius; within a ring, nearest by
      // Euclidean distance, then dy, then dx.
      bool placed = false;
      double span = std::max(cx_hi - cx_lo, cy_hi - cy_lo);
      for (int r = 1; !placed && r <= span + 1; ++r) {
        std::vector<std::pair<double, std::pair<int, int>>> ring;
        for (int dy = -r; dy <= r; ++dy) {
          for (int dx = -r; dx <= r; ++dx) {
            if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
            ring.push_back({static_cast<double>(dx * dx + dy * dy), {dy, dx}});
          }
        }
        std::sort(ring.begin(), ring.end());
        for (const auto& [d2, off] : ring) {
          double ccx = cell.first + off.second, ccy = cell.second + off.first;
          if (ccx < cx_lo || ccx > cx_hi || ccy < cy_lo || ccy > cy_hi) continue;
          if (occupied.count({ccx, ccy})) continue;
          nx = ccx;
          ny = ccy;
          cell = {ccx, ccy};
          placed = true;
          break;
        }
      }
    }
    occupied.insert(cell);
    if (nx != x || std::signbit(nx) != std::signbit(x)) out.push_back({p.cls, id, p.x, Value::number(nx)});
    if (ny != y || std::signbit(ny) != std::signbit(y)) out.push_back({p.cls, id, p.y, Value::number(ny)});
  }
}

void check_partition(const Program& prog, const std::vector<std::shared_ptr<UpdateComponent>>& comps) {
  std::map<FieldKey, std::string> owner;
  for (const auto& c : comps) {
    for (const auto& k : c->claims(prog)) {
      auto [it, fresh] = owner.emplace(k, c->name());
      if (!fresh) {
        const auto& ci = prog.classes[static_cast<std::size_t>(k.first)];
        throw EngineError("E_UNPARTITIONED_STATE", "state field " + ci.name + "." +
                                                       ci.state[static_cast<std::size_t>(k.second)].name +
                                                       " claimed by both '" + it->second + "' and '" + c->name() + "'");
      }
    }
  }
}

std::vector<FieldKey> unclaimed_fields(const Program& prog, const std::vector<std::shared_ptr<UpdateComponent>>& comps) {
  std::set<FieldKey> taken;
  for (const auto& c : comps) {
    for (const auto& k : c->claims(prog)) taken.insert(k);
  }
  std::vector<FieldKey> out;
  for (const auto& ci : prog.classes) {
    for (std::size_t f = 0; f < ci.state.size(); ++f) {
      FieldKey k{ci.index, static_cast<int>(f)};
      if (!taken.count(k)) out.push_back(k);
    }
  }
  return out;
}

}  // namespace sgl
