#include "cupgame/trace_io.hpp"

#include "cupgame/json_units.hpp"

#include <fstream>
#include <istream>
#include <ostream>

namespace cupgame {

using json = nlohmann::ordered_json;

namespace {

json pours_json(const std::vector<Pour>& pours) {
  json arr = json::array();
  for (const Pour& p : pours) arr.push_back(json::array({p.cup, units_to_json(p.amount.units())}));
  return arr;
}

std::vector<Pour> pours_from(const json& j, const char* key) {
  std::vector<Pour> out;
  if (!j.contains(key)) return out;
  for (const json& e : j.at(key)) {
    if (!e.is_array() || e.size() != 2) throw ConfigError(std::string("trace: bad entry in ") + key);
    out.push_back({e[0].get<CupId>(), WaterAmount(units_from_json(e[1]))});
  }
  return out;
}

}  // namespace

void write_trace_header(std::ostream& out, const TraceHeader& h) {
  json j;
  j["type"] = "header";
  j["variant"] = std::string(variant_name(h.config.kind()));
  j["n"] = h.config.n;
  j["p"] = h.config.p;
  j["epsilon"] = format_rational(h.config.epsilon);
  j["delta"] = format_rational(h.config.delta);
  j["D"] = units_to_json(h.config.resolution);
  if (h.config.variant.flush_slack) j["flush_slack"] = units_to_json(h.config.variant.flush_slack->units());
  j["seed"] = h.config.seed;
  j["trial"] = h.trial;
  j["filler"] = h.filler;
  j["emptier"] = h.emptier;
  json init = json::array();
  for (const auto& [id, w] : h.initial) init.push_back(json::array({id, units_to_json(w.units())}));
  j["initial_fills"] = std::move(init);
  out << j.dump() << '\n';
}

void write_trace_record(std::ostream& out, const StepRecord& r) {
  json j;
  j["step"] = r.step;
  j["pours"] = pours_json(r.filler.pours);
  if (!r.filler.new_cups.empty()) j["new_cups"] = pours_json(r.filler.new_cups);
  j["removals"] = pours_json(r.emptier.removals);
  j["backlog"] = units_to_json(r.backlog.units());
  j["integer_fill"] = r.integer_fill;
  j["surplus"] = r.surplus;
  j["counter_sum"] = units_to_json(r.counter_sum.units());
  if (r.phi) j["phi"] = *r.phi;
  if (r.virtual_integer_fill) j["virtual_integer_fill"] = *r.virtual_integer_fill;
  if (r.virtual_backlog) j["virtual_backlog"] = units_to_json(r.virtual_backlog->units());
  out << j.dump() << '\n';
}

TraceFile read_trace(std::istream& in) {
  TraceFile file;
  std::string line;
  bool have_header = false;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ConfigError("trace line " + std::to_string(lineno) + ": " + e.what());
    }
    try {
      if (!have_header) {
        if (j.value("type", "") != "header") throw ConfigError("trace: first line must be the header");
        TraceHeader& h = file.header;
        h.config.variant.kind = parse_variant(j.at("variant").get<std::string>());
        h.config.n = j.at("n").get<std::int64_t>();
        h.config.p = j.at("p").get<std::int64_t>();
        h.config.epsilon = parse_rational(j.at("epsilon").get<std::string>());
        h.config.delta = parse_rational(j.at("delta").get<std::string>());
        h.config.resolution = units_from_json(j.at("D"));
        if (j.contains("flush_slack")) h.config.variant.flush_slack = WaterAmount(units_from_json(j["flush_slack"]));
        h.config.seed = j.value("seed", std::uint64_t{0});
        h.trial = j.value("trial", std::uint64_t{0});
        h.filler = j.value("filler", "");
        h.emptier = j.value("emptier", "");
        for (const Pour& p : pours_from(j, "initial_fills")) h.initial[p.cup] = p.amount;
        have_header = true;
        continue;
      }
      StepRecord r;
      r.step = j.at("step").get<std::int64_t>();
      r.filler.pours = pours_from(j, "pours");
      r.filler.new_cups = pours_from(j, "new_cups");
      r.emptier.removals = pours_from(j, "removals");
      if (j.contains("backlog")) r.backlog = WaterAmount(units_from_json(j["backlog"]));
      r.integer_fill = j.value("integer_fill", std::int64_t{0});
      r.surplus = j.value("surplus", std::int64_t{0});
      if (j.contains("counter_sum")) r.counter_sum = WaterAmount(units_from_json(j["counter_sum"]));
      if (j.contains("phi")) r.phi = j["phi"].get<double>();
      if (j.contains("virtual_integer_fill")) r.virtual_integer_fill = j["virtual_integer_fill"].get<std::int64_t>();
      if (j.contains("virtual_backlog")) r.virtual_backlog = WaterAmount(units_from_json(j["virtual_backlog"]));
      file.records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ConfigError("trace line " + std::to_string(lineno) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError("trace line " + std::to_string(lineno) + ": " + e.what());
    } catch (const NegativeWater& e) {
      throw ConfigError("trace line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_header) throw ConfigError("trace: missing header");
  return file;
}

TraceFile read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace file '" + path + "'");
  return read_trace(in);
}

}  // namespace cupgame
