#include "sgl/world.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "sgl/txn.hpp"

namespace sgl {

namespace {
double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

bool logs_class(const TraceConfig& cfg, const Program& prog, int cls) {
  if (!cfg.effects) return false;
  if (cfg.effect_classes.empty()) return true;
  const auto& name = prog.classes[static_cast<std::size_t>(cls)].name;
  return std::find(cfg.effect_classes.begin(), cfg.effect_classes.end(), name) != cfg.effect_classes.end();
}
}  // namespace

World::World(std::shared_ptr<Program> prog, Snapshot initial, EngineConfig cfg)
    : prog_(std::move(prog)), cfg_(std::move(cfg)), snap_(std::move(initial)) {
  auto violations = check_constraints(*prog_, *snap_);
  if (!violations.empty()) {
    const auto& v = violations.front();
    throw EngineError("E_CONSTRAINT", "object " + std::to_string(v.id) + " of class " +
                                          prog_->classes[static_cast<std::size_t>(v.cls)].name +
                                          " violates constraint #" + std::to_string(v.constraint) +
                                          (v.fault.empty() ? "" : " (" + v.fault + ")"));
  }
  lowered_ = lower_program(*prog_);
  engine_ = make_engine(*prog_, lowered_, cfg_);
  comps_.push_back(std::make_shared<TxnComponent>());
  for (const auto& p : cfg_.physics) register_update_component(std::make_shared<PhysicsComponent>(p));
}

World::~World() = default;

void World::register_update_component(std::shared_ptr<UpdateComponent> comp) {
  if (closed_) throw EngineError("E_REGISTRATION_CLOSED", "components must be registered before the first tick");
  auto next = comps_;
  next.push_back(std::move(comp));
  check_partition(*prog_, next);
  comps_ = std::move(next);
}

void World::close_registration() {
  if (closed_) return;
  comps_.push_back(std::make_shared<ExpressionUpdater>(unclaimed_fields(*prog_, comps_)));
  check_partition(*prog_, comps_);
  std::size_t total = 0;
  std::vector<std::size_t> base;
  for (const auto& ci : prog_->classes) {
    base.push_back(total);
    total += ci.state.size();
  }
  owner_of_.assign(comps_.size(), std::vector<std::uint8_t>(total, 0));
  for (std::size_t i = 0; i < comps_.size(); ++i) {
    for (const auto& [c, f] : comps_[i]->claims(*prog_)) owner_of_[i][base[static_cast<std::size_t>(c)] + static_cast<std::size_t>(f)] = 1;
  }
  closed_ = true;
}

TickReport World::run_tick() {
  close_registration();
  const Tables& snap = *snap_;
  TickReport rep;
  TickLog log;
  log.tick = snap.tick;

  // Query and effect steps.
  auto t0 = std::chrono::steady_clock::now();
  EffectBuffer buf = engine_->run(snap_, cfg_.seed, log.plan_switches);
  rep.effect_ms = ms_since(t0);
  t0 = std::chrono::steady_clock::now();
  buf.canonicalize();
  log.faults = buf.faults;
  buf.drop_faulted();
  rep.faults = buf.faults.size();

  // Update step.
  Admission adm = admit(*prog_, snap, buf, snap.tick);
  ReducedEffects reduced = reduce_effects(*prog_, adm.committed);
  UpdateContext ctx{*prog_, snap, reduced, adm, snap.tick};
  std::vector<RowUpdate> updates;
  std::size_t base_idx = 0;
  std::vector<std::size_t> base;
  for (const auto& ci : prog_->classes) {
    base.push_back(base_idx);
    base_idx += ci.state.size();
  }
  for (std::size_t i = 0; i < comps_.size(); ++i) {
    std::size_t before = updates.size();
    comps_[i]->update(ctx, updates, log.update_faults);
    for (std::size_t k = before; k < updates.size(); ++k) {
      const auto& u = updates[k];
      if (!owner_of_[i][base[static_cast<std::size_t>(u.cls)] + static_cast<std::size_t>(u.field)]) {
        throw EngineError("E_UNPARTITIONED_STATE", "component '" + comps_[i]->name() + "' wrote a field it does not own");
      }
    }
    log.component_updates.emplace_back(comps_[i]->name(), updates.size() - before);
  }

  // Spawns in canonical order receive consecutive fresh ids.
  std::vector<NewObject> spawns;
  ObjectId next = snap.next_id;
  for (const auto& s : adm.spawns) {
    NewObject o{s.cls, next++, default_fields(prog_->classes[static_cast<std::size_t>(s.cls)])};
    for (const auto& [f, v] : s.inits) o.fields[static_cast<std::size_t>(f)] = v;
    log.spawned.push_back(o.id);
    spawns.push_back(std::move(o));
  }
  std::vector<ObjectId> destroys;
  for (const auto& d : adm.destroys) destroys.push_back(d.target);
  std::sort(destroys.begin(), destroys.end());
  destroys.erase(std::unique(destroys.begin(), destroys.end()), destroys.end());
  log.destroyed = destroys;

  std::vector<std::vector<EffectRows>> eff_rows(prog_->classes.size());
  for (std::size_t c = 0; c < prog_->classes.size(); ++c) {
    eff_rows[c].resize(prog_->classes[c].effects.size());
    for (std::size_t f = 0; f < eff_rows[c].size(); ++f) {
      eff_rows[c][f].ids = reduced.fields[c][f].ids;
      eff_rows[c][f].vals = reduced.fields[c][f].vals;
    }
  }
  ApplyResult applied = apply_row_updates(snap, *prog_, std::move(updates), spawns, destroys, std::move(eff_rows));
  rep.update_ms = ms_since(t0);

  for (const auto& t : adm.txns) (t.committed ? rep.txns_committed : rep.txns_aborted)++;
  txns_committed_ += rep.txns_committed;
  txns_aborted_ += rep.txns_aborted;
  rep.entries = adm.committed.size();
  rep.spawned = spawns.size();
  rep.destroyed = destroys.size();

  if (cfg_.trace.effects) {
    log.effects_logged = true;
    for (const auto& e : adm.committed) {
      if (logs_class(cfg_.trace, *prog_, e.cls)) log.committed.push_back(e);
    }
    for (const auto& e : adm.aborted) {
      if (logs_class(cfg_.trace, *prog_, e.cls)) log.aborted.push_back(e);
    }
  }
  log.txns = std::move(adm.txns);
  log.frozen = std::move(adm.frozen);
  log.rejected_spawns = std::move(adm.rejected_spawns);

  if (cfg_.trace.retain_ticks > 0) {
    history_.push_back(snap_);
    logs_.push_back(std::move(log));
    while (logs_.size() > cfg_.trace.retain_ticks) {
      logs_.pop_front();
      history_.pop_front();
    }
  }
  snap_ = std::move(applied.snap);
  rep.tick = snap_->tick;
  return rep;
}

const TickLog* World::log_for(std::int64_t tick) const {
  for (const auto& l : logs_) {
    if (l.tick == tick) return &l;
  }
  return nullptr;
}

Snapshot World::snapshot_at(std::int64_t tick) const {
  if (tick == snap_->tick) return snap_;
  for (const auto& s : history_) {
    if (s->tick == tick) return s;
  }
  return nullptr;
}

void World::reset(Snapshot snap, const std::string& engine_state) {
  snap_ = std::move(snap);
  engine_ = make_engine(*prog_, lowered_, cfg_);
  engine_->load_state(engine_state);
  logs_.clear();
  history_.clear();
}

}  // namespace sgl
