// Command-line front end: simulate, duel, sweep, verify, replay.
// Exit codes: 0 success, 1 configuration or usage error, 2 invariant
// violation, protocol error or failed check.

#include "cupgame/harness.hpp"
#include "cupgame/spec_io.hpp"
#include "cupgame/trace_io.hpp"
#include "cupgame/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace cupgame;

namespace {

constexpr int kOk = 0;
constexpr int kConfig = 1;
constexpr int kViolation = 2;

std::string decimal(const Rational& x) {
  std::ostringstream s;
  s << std::setprecision(10) << to_double(x);
  return s.str();
}

// Exact value when short, decimal otherwise.
std::string water_text(const WaterAmount& w, const BigInt& D) {
  const Rational x = to_water(w, D);
  const std::string exact = format_rational(x);
  return exact.size() <= 24 ? exact + " (" + decimal(x) + ")" : decimal(x);
}

ParamMap parse_params(const std::vector<std::string>& kvs) {
  ParamMap out;
  for (const std::string& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("parameter '" + kv + "' is not key=value");
    out[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return out;
}

json result_json(const ExperimentResult& r) {
  const BigInt& D = r.spec.config.resolution;
  json j;
  j["trials"] = r.trials.size();
  WaterAmount max_b, max_final;
  for (const TrialResult& t : r.trials) {
    max_b = std::max(max_b, t.summary.max_backlog);
    max_final = std::max(max_final, t.summary.final_backlog);
  }
  j["max_backlog"] = to_double(max_b, D);
  j["max_backlog_exact"] = format_rational(to_water(max_b, D));
  j["max_final_backlog"] = to_double(max_final, D);
  j["max_final_backlog_exact"] = format_rational(to_water(max_final, D));
  json tails = json::array();
  for (const TailEstimate& t : r.tails)
    tails.push_back({{"level", format_rational(t.level)},
                     {"fraction_of_steps", t.any_step.value},
                     {"fraction_of_steps_se", t.any_step.standard_error},
                     {"final_step", t.final_step.value},
                     {"final_step_se", t.final_step.standard_error}});
  j["tails"] = std::move(tails);
  json checks = json::object();
  for (const auto& [k, v] : r.checks) checks[k] = v;
  j["checks"] = std::move(checks);
  json viol = json::array();
  for (const ViolationReport& v : r.violations)
    viol.push_back({{"trial", v.trial}, {"step", v.step}, {"invariant", v.invariant}, {"detail", v.detail}});
  j["violations"] = std::move(viol);
  j["wall_seconds"] = r.wall_seconds;
  return j;
}

void print_table(std::ostream& out, const ExperimentResult& r) {
  const BigInt& D = r.spec.config.resolution;
  WaterAmount max_b, max_final;
  for (const TrialResult& t : r.trials) {
    max_b = std::max(max_b, t.summary.max_backlog);
    max_final = std::max(max_final, t.summary.final_backlog);
  }
  out << "filler        " << r.spec.filler.name << "\n"
      << "emptier       " << r.spec.emptier.name << "\n"
      << "game          " << variant_name(r.spec.config.kind()) << " n=" << r.spec.config.n << " p=" << r.spec.config.p
      << " eps=" << format_rational(r.spec.config.epsilon) << " delta=" << format_rational(r.spec.config.delta) << "\n"
      << "trials        " << r.trials.size() << " x " << r.spec.steps << " steps\n"
      << "max backlog   " << water_text(max_b, D) << "\n"
      << "final backlog " << water_text(max_final, D) << " (largest over trials)\n";
  for (const TailEstimate& t : r.tails)
    out << "P[backlog > " << format_rational(t.level) << "]  steps " << t.any_step.value << " +- "
        << t.any_step.standard_error << ", final step " << t.final_step.value << " +- " << t.final_step.standard_error
        << "\n";
  out << "wall time     " << r.wall_seconds << " s\n";
}

int report_violations(const ExperimentResult& r) {
  for (const ViolationReport& v : r.violations)
    std::cerr << "invariant violation in trial " << v.trial << " at step " << v.step << " (" << v.invariant
              << "): " << v.detail << "\n";
  return r.violations.empty() ? kOk : kViolation;
}

void write_outputs(const ExperimentResult& r, const std::string& dir) {
  fs::create_directories(dir);
  std::vector<TraceSummary> sums;
  for (const TrialResult& t : r.trials) sums.push_back(t.summary);
  std::ofstream csv(fs::path(dir) / "summary.csv");
  write_summary_csv(csv, sums, r.spec.config.resolution);
  std::ofstream spec(fs::path(dir) / "effective_spec.json");
  ExperimentSpec eff = r.spec;
  eff.auto_resolution = false;
  spec << spec_to_json(eff).dump(2) << "\n";
  if (r.spec.keep_traces) {
    fs::create_directories(fs::path(dir) / "traces");
    for (const TrialResult& t : r.trials) {
      std::ofstream out(fs::path(dir) / "traces" / ("trial_" + std::to_string(t.trial) + ".jsonl"));
      write_trace_header(out, {r.spec.config, r.spec.filler.name, r.spec.emptier.name, t.trial, t.initial});
      for (const StepRecord& rec : t.trace) write_trace_record(out, rec);
    }
  }
}

struct RunFlags {
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> verify;
  bool traces = false;
  bool print_spec = false;
  bool oblivious_only = false;
  bool json_out = false;
};

void add_run_flags(CLI::App* app, RunFlags& f) {
  app->add_option("--set", f.overrides, "Override a spec field, e.g. game.n=64 or filler.params.budget=1/2");
  app->add_option("--seed", f.seed, "Master seed (game.seed)");
  app->add_option("--workers", f.workers, "Trial parallelism; results do not depend on it (workers)");
  app->add_option("--verify", f.verify, "off, invariants or full (verify)");
  app->add_flag("--traces", f.traces, "Write JSONL traces (keep_traces)");
  app->add_flag("--oblivious-only", f.oblivious_only, "Refuse adaptive fillers (oblivious_only)");
  app->add_flag("--print-effective-spec", f.print_spec, "Print the resolved spec and exit");
  app->add_flag("--json", f.json_out, "Machine-readable output");
}

// Flags become overrides so each has a spec-file equivalent.
void flags_to_overrides(const RunFlags& f, std::vector<std::string>& ov) {
  if (f.seed) ov.push_back("game.seed=" + std::to_string(*f.seed));
  if (f.workers) ov.push_back("workers=" + std::to_string(*f.workers));
  if (f.verify) ov.push_back("verify=\"" + *f.verify + "\"");
  if (f.traces) ov.push_back("keep_traces=true");
  if (f.oblivious_only) ov.push_back("oblivious_only=true");
}

ExperimentSpec build_spec(json doc, const RunFlags& f) {
  std::vector<std::string> ov = f.overrides;
  flags_to_overrides(f, ov);
  apply_overrides(doc, ov);
  return resolve_spec(spec_from_json(doc));
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spec file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("spec file '" + path + "': " + e.what());
  }
}

int print_effective(const ExperimentSpec& spec) {
  ExperimentSpec eff = spec;
  eff.auto_resolution = false;
  std::cout << spec_to_json(eff).dump(2) << "\n";
  return kOk;
}

int finish_run(const ExperimentResult& r, const RunFlags& f, const std::string& out_dir) {
  if (!out_dir.empty()) write_outputs(r, out_dir);
  if (f.json_out)
    std::cout << result_json(r).dump(2) << "\n";
  else
    print_table(std::cout, r);
  return report_violations(r);
}

// ---- subcommands ------------------------------------------------------------

int cmd_simulate(const std::string& spec_path, const std::string& out_dir, const RunFlags& f) {
  ExperimentSpec spec = build_spec(load_json(spec_path), f);
  if (f.print_spec) return print_effective(spec);
  ExperimentResult r = run_experiment(spec);
  return finish_run(r, f, out_dir.empty() ? "out" : out_dir);
}

struct DuelArgs {
  std::string filler, emptier, variant = "single";
  std::int64_t n = 16, p = 1, steps = 1000, trials = 1;
  std::string epsilon = "1/4", delta = "0", resolution = "auto";
  std::vector<std::string> filler_params, emptier_params;
  std::string out_dir;
};

int cmd_duel(const DuelArgs& a, const RunFlags& f) {
  json doc = default_spec_json();
  doc["game"]["variant"] = a.variant;
  doc["game"]["n"] = a.n;
  doc["game"]["p"] = a.p;
  doc["game"]["epsilon"] = a.epsilon;
  doc["game"]["delta"] = a.delta;
  doc["game"]["resolution"] = a.resolution == "auto" ? json("auto") : json(a.resolution);
  doc["filler"] = {{"name", a.filler}, {"params", parse_params(a.filler_params)}};
  doc["emptier"] = {{"name", a.emptier}, {"params", parse_params(a.emptier_params)}};
  doc["steps"] = a.steps;
  doc["trials"] = a.trials;
  ExperimentSpec spec = build_spec(doc, f);
  if (f.print_spec) return print_effective(spec);
  ExperimentResult r = run_experiment(spec);
  return finish_run(r, f, a.out_dir);
}

int cmd_sweep(const std::string& spec_path, const std::string& param, const std::vector<std::string>& values,
              const std::string& out_dir, const RunFlags& f) {
  const json base = load_json(spec_path);
  json rows = json::array();
  std::ostringstream csv;
  csv << "value,max_backlog,mean_max_backlog";
  bool header_done = false;
  int code = kOk;
  for (const std::string& v : values) {
    RunFlags g = f;
    g.overrides.push_back(param + "=" + v);
    ExperimentSpec spec = build_spec(base, g);
    ExperimentResult r = run_experiment(spec);
    const BigInt& D = spec.config.resolution;
    double worst = 0, mean = 0;
    for (const TrialResult& t : r.trials) {
      worst = std::max(worst, to_double(t.summary.max_backlog, D));
      mean += to_double(t.summary.max_backlog, D) / static_cast<double>(r.trials.size());
    }
    if (!header_done) {
      for (const TailEstimate& t : r.tails) csv << ",frac_backlog_gt_" << format_rational(t.level);
      csv << "\n";
      header_done = true;
    }
    csv << v << "," << worst << "," << mean;
    for (const TailEstimate& t : r.tails) csv << "," << t.any_step.value;
    csv << "\n";
    json row = result_json(r);
    row["value"] = v;
    rows.push_back(std::move(row));
    if (report_violations(r) != kOk) code = kViolation;
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream(fs::path(out_dir) / "sweep.csv") << csv.str();
  }
  if (f.json_out)
    std::cout << rows.dump(2) << "\n";
  else
    std::cout << csv.str();
  return code;
}

int cmd_verify(const std::string& suite, const std::vector<std::string>& only, const std::string& fault, int workers,
               bool quiet) {
  VerifyOptions opts;
  opts.scale = parse_suite(suite);
  opts.fault = fault;
  opts.workers = workers;
  if (!quiet) opts.progress = &std::cerr;
  VerifySession session(opts);
  std::vector<CheckResult> results;
  if (only.empty()) {
    results = session.run_all();
  } else {
    for (const std::string& id : only) results.push_back(session.run(id));
  }
  return report_checks(std::cout, results);
}

int cmd_replay(const std::string& trace_path, const std::string& emptier, const std::optional<std::uint64_t>& seed,
               const std::string& out_path, const RunFlags& f) {
  TraceFile file = read_trace_file(trace_path);
  ExperimentSpec spec;
  spec.config = file.header.config;
  if (seed) spec.config.seed = *seed;
  spec.auto_resolution = false;
  spec.filler = {"trace", {}};
  spec.emptier = {emptier.empty() ? file.header.emptier : emptier, {}};
  spec.steps = static_cast<std::int64_t>(file.records.size());
  spec.keep_traces = true;
  if (f.verify) spec.verify = parse_verify_level(*f.verify);
  if (auto bad = validate_config(spec.config, {.threshold_emptier = emptier_uses_thresholds(spec.emptier.name)});
      !bad.empty())
    throw ConfigError(bad.front());
  std::vector<FillerMove> moves;
  for (const StepRecord& r : file.records) moves.push_back(r.filler);
  TrialResult t = replay_trial(spec, moves, file.header.trial, file.header.initial);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    write_trace_header(out, {spec.config, file.header.filler, spec.emptier.name, t.trial, t.initial});
    for (const StepRecord& r : t.trace) write_trace_record(out, r);
  }
  const BigInt& D = spec.config.resolution;
  int code = kOk;
  const bool same_run = spec.emptier.name == file.header.emptier && spec.config.seed == file.header.config.seed;
  std::int64_t mismatches = 0;
  if (same_run) {
    for (std::size_t i = 0; i < t.trace.size(); ++i)
      if (!(t.trace[i].emptier == file.records[i].emptier)) {
        if (mismatches == 0)
          std::cerr << "replay diverges from the recorded emptier at step " << t.trace[i].step << "\n";
        ++mismatches;
      }
    if (mismatches > 0) code = kViolation;
  }
  if (f.json_out) {
    json j{{"steps", t.summary.steps},
           {"max_backlog", to_double(t.summary.max_backlog, D)},
           {"final_backlog", to_double(t.summary.final_backlog, D)},
           {"compared_with_recording", same_run},
           {"mismatched_steps", mismatches}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "replayed " << t.summary.steps << " steps against " << spec.emptier.name << "\n"
              << "max backlog   " << water_text(t.summary.max_backlog, D) << "\n"
              << "final backlog " << water_text(t.summary.final_backlog, D) << "\n";
    if (same_run) std::cout << "matches recording: " << (mismatches == 0 ? "yes" : "no") << "\n";
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cup game simulator: fillers against emptiers with exact water arithmetic"};
  app.require_subcommand(1);

  RunFlags flags;
  std::string spec_path, out_dir;

  auto* sim = app.add_subcommand("simulate", "Run an experiment spec and write summary.csv");
  sim->add_option("spec", spec_path, "Experiment spec (JSON)")->required();
  sim->add_option("-o,--out", out_dir, "Output directory (default: out)");
  add_run_flags(sim, flags);

  DuelArgs duel;
  auto* du = app.add_subcommand("duel", "Play one filler against one emptier and print a summary");
  du->add_option("filler", duel.filler, "Filler name")->required();
  du->add_option("emptier", duel.emptier, "Emptier name")->required();
  du->add_option("--variant", duel.variant, "Game variant");
  du->add_option("--n", duel.n, "Cups");
  du->add_option("--p", duel.p, "Processors");
  du->add_option("--epsilon", duel.epsilon, "Aggregate speed advantage, e.g. 1/4");
  du->add_option("--delta", duel.delta, "Per-cup advantage, e.g. 1/16");
  du->add_option("--resolution", duel.resolution, "Units per unit of water, or auto");
  du->add_option("--steps", duel.steps, "Steps per trial");
  du->add_option("--trials", duel.trials, "Trials");
  du->add_option("--filler-param", duel.filler_params, "Filler parameter key=value");
  du->add_option("--emptier-param", duel.emptier_params, "Emptier parameter key=value");
  du->add_option("-o,--out", duel.out_dir, "Also write summary.csv (and traces) here");
  add_run_flags(du, flags);

  std::string sweep_param;
  std::vector<std::string> sweep_values;
  auto* sw = app.add_subcommand("sweep", "Run a spec once per value of one field");
  sw->add_option("spec", spec_path, "Experiment spec (JSON)")->required();
  sw->add_option("--param", sweep_param, "Dotted spec field, e.g. game.p")->required();
  sw->add_option("--values", sweep_values, "Values to try")->required()->delimiter(',');
  sw->add_option("-o,--out", out_dir, "Write sweep.csv here");
  add_run_flags(sw, flags);

  std::string suite, fault = "none";
  std::vector<std::string> only;
  int verify_workers = 0;
  bool quiet = false;
  auto* ve = app.add_subcommand("verify", "Run the invariant and acceptance checks");
  ve->add_option("suite", suite, "fast or full")->required();
  ve->add_option("--only", only, "Run only these check ids");
  ve->add_option("--inject-fault", fault, "Run threshold emptiers with a deliberate bug (counter_drift)");
  ve->add_option("--workers", verify_workers, "Trial parallelism");
  ve->add_flag("-q,--quiet", quiet, "No progress output");

  std::string trace_path, replay_emptier, replay_out;
  std::optional<std::uint64_t> replay_seed;
  RunFlags replay_flags;
  auto* re = app.add_subcommand("replay", "Replay a JSONL trace's pours against an emptier");
  re->add_option("trace", trace_path, "Trace file (JSONL)")->required();
  re->add_option("--emptier", replay_emptier, "Emptier (default: the recorded one)");
  re->add_option("--seed", replay_seed, "Seed for a randomized emptier (default: the recorded one)");
  re->add_option("-o,--out", replay_out, "Write the replayed trace here");
  re->add_option("--verify", replay_flags.verify, "off, invariants or full");
  re->add_flag("--json", replay_flags.json_out, "Machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*sim) return cmd_simulate(spec_path, out_dir, flags);
    if (*du) return cmd_duel(duel, flags);
    if (*sw) return cmd_sweep(spec_path, sweep_param, sweep_values, out_dir, flags);
    if (*ve) return cmd_verify(suite, only, fault, verify_workers, quiet);
    if (*re) return cmd_replay(trace_path, replay_emptier, replay_seed, replay_out, replay_flags);
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation (" << e.invariant() << "): " << e.what() << "\n";
    return kViolation;
  } catch (const StrategyProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return kViolation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
  return kOk;
}
