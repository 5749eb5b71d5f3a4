#include "sgl/checkpoint.hpp"

#include <cstdio>
#include <ostream>

#include "json_util.hpp"
#include "sgl/diagnostics.hpp"

namespace sgl {

namespace {

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

std::uint64_t text_checksum(const std::string& s) {
  Hasher h;
  h.bytes(s.data(), s.size());
  return h.digest();
}

json body_of(const World& w) {
  const Program& prog = w.program();
  const Tables& t = *w.snapshot();
  json classes = json::object();
  for (std::size_t c = 0; c < prog.classes.size(); ++c) {
    const auto& ci = prog.classes[c];
    const ClassTable& table = *t.classes[c];
    json fields = json::object();
    for (std::size_t f = 0; f < ci.state.size(); ++f) {
      json col = json::array();
      for (std::size_t row = 0; row < table.size(); ++row) col.push_back(value_to_json(table.get(row, static_cast<int>(f)), true));
      fields[ci.state[f].name] = std::move(col);
    }
    classes[ci.name] = json{{"ids", table.ids}, {"fields", std::move(fields)}};
  }
  return json{{"format", "sgl-checkpoint"},
              {"version", kCheckpointVersion},
              {"unitHash", hex64(prog.hash)},
              {"tick", t.tick},
              {"nextId", t.next_id},
              {"seed", hex64(w.config().seed)},
              {"txns", {{"committed", w.txns_committed_total()}, {"aborted", w.txns_aborted_total()}}},
              {"engine", json::parse(w.engine().save_state())},
              {"classes", std::move(classes)}};
}

[[noreturn]] void corrupt(const std::string& why) { throw EngineError("E_CHECKPOINT_CORRUPT", "checkpoint: " + why); }

}  // namespace

std::string checkpoint_text(const World& w) {
  json body = body_of(w);
  std::string text = body.dump();
  body["checksum"] = hex64(text_checksum(text));
  return body.dump();
}

CheckpointMeta write_checkpoint(const World& w, std::ostream& out) {
  json body = body_of(w);
  std::uint64_t sum = text_checksum(body.dump());
  body["checksum"] = hex64(sum);
  out << body.dump() << '\n';
  out.flush();
  if (!out) throw EngineError("E_IO", "checkpoint: write failed");
  return {w.tick(), sum};
}

CheckpointData read_checkpoint(const Program& prog, std::string_view text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) corrupt("not a JSON object");
  if (doc.value("format", "") != "sgl-checkpoint") corrupt("missing format tag");
  if (!doc.contains("version") || doc["version"] != kCheckpointVersion) {
    throw EngineError("E_CHECKPOINT_VERSION", "checkpoint: unsupported version " + doc.value("version", json()).dump());
  }
  if (!doc.contains("checksum") || !doc["checksum"].is_string()) corrupt("missing checksum");
  std::string want = doc["checksum"].get<std::string>();
  doc.erase("checksum");
  if (hex64(text_checksum(doc.dump())) != want) corrupt("checksum mismatch");
  if (doc.value("unitHash", "") != hex64(prog.hash)) {
    throw EngineError("E_CHECKPOINT_UNIT", "checkpoint: compiled from a different program");
  }

  CheckpointData out;
  try {
    out.seed = std::stoull(doc["seed"].get<std::string>(), nullptr, 16);
    out.txns_committed = doc["txns"]["committed"].get<std::size_t>();
    out.txns_aborted = doc["txns"]["aborted"].get<std::size_t>();
    out.engine_state = doc["engine"].dump();

    // Rebuilt as one batch of spawns into empty tables, then retimed.
    std::vector<NewObject> objs;
    const auto& classes = doc["classes"];
    for (std::size_t c = 0; c < prog.classes.size(); ++c) {
      const auto& ci = prog.classes[c];
      if (!classes.contains(ci.name)) corrupt("class " + ci.name + " missing");
      const auto& cj = classes[ci.name];
      auto ids = cj["ids"].get<std::vector<ObjectId>>();
      for (std::size_t row = 0; row < ids.size(); ++row) {
        NewObject o{static_cast<int>(c), ids[row], {}};
        for (const auto& f : ci.state) {
          const auto& col = cj["fields"].at(f.name);
          if (col.size() != ids.size()) corrupt("column " + ci.name + "." + f.name + " has the wrong length");
          o.fields.push_back(value_from_json(col[row], f.type, ci.name + "." + f.name, "E_CHECKPOINT_CORRUPT"));
        }
        objs.push_back(std::move(o));
      }
    }
    std::sort(objs.begin(), objs.end(), [](const NewObject& a, const NewObject& b) { return a.id < b.id; });
    Tables empty = create_tables(prog);
    auto res = apply_row_updates(empty, prog, {}, objs, {}, {});
    auto t = std::make_shared<Tables>(*res.snap);
    t->tick = doc["tick"].get<std::int64_t>();
    t->next_id = doc["nextId"].get<ObjectId>();
    out.snap = std::move(t);
  } catch (const json::exception& e) {
    corrupt(e.what());
  }
  return out;
}

std::unique_ptr<World> restore_world(std::shared_ptr<Program> prog, EngineConfig cfg, std::string_view text) {
  CheckpointData d = read_checkpoint(*prog, text);
  cfg.seed = d.seed;
  auto w = std::make_unique<World>(std::move(prog), d.snap, std::move(cfg));
  w->reset(d.snap, d.engine_state);
  w->set_txn_totals(d.txns_committed, d.txns_aborted);
  return w;
}

void restore_into(World& w, std::string_view text) {
  CheckpointData d = read_checkpoint(w.program(), text);
  w.set_seed(d.seed);
  w.reset(d.snap, d.engine_state);
  w.set_txn_totals(d.txns_committed, d.txns_aborted);
}

}  // namespace sgl
