#include "cupgame/spec_io.hpp"

#include "cupgame/json_units.hpp"

#include <fstream>
#include <set>

namespace cupgame {

using json = nlohmann::ordered_json;

namespace {

Rational rational_from(const json& j, const std::string& what) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_number_float()) return parse_rational(j.dump());
  throw ConfigError(what + ": expected a rational such as \"1/4\"");
}

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> known) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> ok(known.begin(), known.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw ConfigError("unknown field '" + (where.empty() ? k : where + "." + k) + "'");
}

StrategySpec strategy_from(const json& j, const std::string& where) {
  StrategySpec s;
  if (j.is_string()) {
    s.name = j.get<std::string>();
    return s;
  }
  reject_unknown(j, where, {"name", "params"});
  s.name = j.at("name").get<std::string>();
  if (j.contains("params")) {
    for (const auto& [k, v] : j["params"].items()) s.params[k] = v.is_string() ? v.get<std::string>() : v.dump();
  }
  return s;
}

json strategy_to(const StrategySpec& s) {
  json params = json::object();
  for (const auto& [k, v] : s.params) params[k] = v;
  return json{{"name", s.name}, {"params", params}};
}

}  // namespace

json default_spec_json() { return spec_to_json(ExperimentSpec{}); }

ExperimentSpec spec_from_json(const json& j) {
  try {
    reject_unknown(j, "", {"game", "filler", "emptier", "steps", "trials", "checkpoints", "verify", "recovery",
                           "counter_init", "tail_levels", "record_phi", "keep_traces", "oblivious_only", "workers"});
    ExperimentSpec s;
    if (j.contains("game")) {
      const json& g = j["game"];
      reject_unknown(g, "game", {"variant", "n", "p", "epsilon", "delta", "resolution", "seed", "flush_slack"});
      GameConfig& c = s.config;
      if (g.contains("variant")) c.variant.kind = parse_variant(g["variant"].get<std::string>());
      if (g.contains("n")) c.n = g["n"].get<std::int64_t>();
      if (g.contains("p")) c.p = g["p"].get<std::int64_t>();
      if (g.contains("epsilon")) c.epsilon = rational_from(g["epsilon"], "game.epsilon");
      if (g.contains("delta")) c.delta = rational_from(g["delta"], "game.delta");
      if (g.contains("seed")) c.seed = g["seed"].get<std::uint64_t>();
      if (g.contains("flush_slack") && !g["flush_slack"].is_null())
        c.variant.flush_slack = WaterAmount(units_from_json(g["flush_slack"]));
      if (g.contains("resolution")) {
        const json& r = g["resolution"];
        s.auto_resolution = r.is_string() && r.get<std::string>() == "auto";
        if (!s.auto_resolution) c.resolution = units_from_json(r);
      }
    }
    if (j.contains("filler")) s.filler = strategy_from(j["filler"], "filler");
    if (j.contains("emptier")) s.emptier = strategy_from(j["emptier"], "emptier");
    if (j.contains("steps")) s.steps = j["steps"].get<std::int64_t>();
    if (j.contains("trials")) s.trials = j["trials"].get<std::int64_t>();
    if (j.contains("checkpoints")) s.checkpoints = j["checkpoints"].get<std::vector<std::int64_t>>();
    if (j.contains("verify")) s.verify = parse_verify_level(j["verify"].get<std::string>());
    if (j.contains("recovery") && !j["recovery"].is_null()) {
      const json& r = j["recovery"];
      reject_unknown(r, "recovery", {"total", "placement"});
      RecoverySpec rec;
      rec.total = rational_from(r.at("total"), "recovery.total");
      if (r.contains("placement")) rec.placement = parse_placement(r["placement"].get<std::string>());
      s.recovery = rec;
    }
    if (j.contains("counter_init")) {
      const std::string v = j["counter_init"].get<std::string>();
      if (v == "scaled")
        s.counter_init = CounterInit::Scaled;
      else if (v == "literal")
        s.counter_init = CounterInit::Literal;
      else
        throw ConfigError("counter_init must be scaled or literal");
    }
    if (j.contains("tail_levels")) {
      s.tail_levels.clear();
      for (const json& t : j["tail_levels"]) s.tail_levels.push_back(rational_from(t, "tail_levels"));
    }
    if (j.contains("record_phi")) s.record_phi = j["record_phi"].get<bool>();
    if (j.contains("keep_traces")) s.keep_traces = j["keep_traces"].get<bool>();
    if (j.contains("oblivious_only")) s.oblivious_only = j["oblivious_only"].get<bool>();
    if (j.contains("workers")) s.workers = j["workers"].get<int>();
    if (s.filler.name.empty()) throw ConfigError("spec needs a filler");
    if (s.emptier.name.empty()) throw ConfigError("spec needs an emptier");
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("spec: ") + e.what());
  }
}

json spec_to_json(const ExperimentSpec& s) {
  const GameConfig& c = s.config;
  json g;
  g["variant"] = std::string(variant_name(c.kind()));
  g["n"] = c.n;
  g["p"] = c.p;
  g["epsilon"] = format_rational(c.epsilon);
  g["delta"] = format_rational(c.delta);
  g["resolution"] = s.auto_resolution ? json("auto") : units_to_json(c.resolution);
  g["seed"] = c.seed;
  g["flush_slack"] = c.variant.flush_slack ? units_to_json(c.variant.flush_slack->units()) : json(nullptr);
  json j;
  j["game"] = std::move(g);
  j["filler"] = strategy_to(s.filler);
  j["emptier"] = strategy_to(s.emptier);
  j["steps"] = s.steps;
  j["trials"] = s.trials;
  j["checkpoints"] = s.checkpoints;
  j["verify"] = std::string(verify_level_name(s.verify));
  j["recovery"] = s.recovery ? json{{"total", format_rational(s.recovery->total)},
                                    {"placement", std::string(placement_name(s.recovery->placement))}}
                             : json(nullptr);
  j["counter_init"] = s.counter_init == CounterInit::Scaled ? "scaled" : "literal";
  json tails = json::array();
  for (const Rational& t : s.tail_levels) tails.push_back(format_rational(t));
  j["tail_levels"] = std::move(tails);
  j["record_phi"] = s.record_phi;
  j["keep_traces"] = s.keep_traces;
  j["oblivious_only"] = s.oblivious_only;
  j["workers"] = s.workers;
  return j;
}

ExperimentSpec load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spec file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("spec file '" + path + "': " + e.what());
  }
  return spec_from_json(j);
}

void apply_overrides(json& doc, const std::vector<std::string>& overrides) {
  json defaults = default_spec_json();
  // Nullable sections still have a shape.
  defaults["recovery"] = json{{"total", "0"}, {"placement", "one_cup"}};
  defaults["game"]["flush_slack"] = 0;
  for (const std::string& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + ov + "' is not key=value");
    const std::string path = ov.substr(0, eq);
    const std::string text = ov.substr(eq + 1);
    json value;
    try {
      value = json::parse(text);
    } catch (const json::exception&) {
      value = text;
    }
    json* node = &doc;
    const json* shape = &defaults;
    std::size_t start = 0;
    bool free_keys = false;
    while (true) {
      const auto dot = path.find('.', start);
      const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (key.empty()) throw ConfigError("override '" + ov + "' has an empty path segment");
      if (!free_keys && !(shape && shape->is_object() && shape->contains(key)))
        throw ConfigError("override '" + path + "' does not name a spec field");
      if (node->is_string()) *node = json{{"name", node->get<std::string>()}};  // "filler": "name" shorthand
      if (!node->is_object()) *node = json::object();
      node = &(*node)[key];
      shape = (!free_keys && shape && shape->contains(key)) ? &(*shape)[key] : nullptr;
      if (key == "params") free_keys = true;
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    if (free_keys && !value.is_string()) value = value.dump();
    *node = value;
  }
}

}  // namespace cupgame
