// Times the OpenMP trial loop against the serial reference on the same
// spec and checks that both produce identical summaries.
// usage: bench_trials [--quick] [--workers=N]

#include "cupgame/harness.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <string>

using namespace cupgame;

namespace {

struct Case {
  const char* label;
  VariantKind kind;
  std::int64_t n, p;
  Rational delta;
  const char* filler;
  const char* emptier;
};

double seconds_of(auto&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool same(const ExperimentResult& a, const ExperimentResult& b) {
  if (a.trials.size() != b.trials.size() || a.checks != b.checks) return false;
  for (std::size_t i = 0; i < a.trials.size(); ++i) {
    const TraceSummary &x = a.trials[i].summary, &y = b.trials[i].summary;
    if (!(x.max_backlog == y.max_backlog) || !(x.final_backlog == y.final_backlog) || x.tail_counts != y.tail_counts ||
        x.surplus_total != y.surplus_total)
      return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  bool quick = false;
  int workers = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--quick") quick = true;
    else if (a.rfind("--workers=", 0) == 0) workers = std::stoi(a.substr(10));
    else {
      std::fprintf(stderr, "usage: bench_trials [--quick] [--workers=N]\n");
      return 1;
    }
  }
  const Case cases[] = {
      {"threshold n=64 p=16", VariantKind::RenormalizedMulti, 64, 16, Rational(1, 16), "uniform_random", "threshold_counter"},
      {"smoothed n=64", VariantKind::SingleProcessor, 64, 1, Rational(0), "uniform_random", "smoothed_greedy"},
      {"greedy multi n=128 p=8", VariantKind::MultiProcessor, 128, 8, Rational(1, 16), "adaptive_harmonic", "greedy_multi"},
  };
  std::printf("%-26s %8s %8s %10s %10s %8s %s\n", "case", "trials", "steps", "serial s", "omp s", "speedup", "match");
  bool ok = true;
  for (const Case& c : cases) {
    ExperimentSpec s;
    s.config.variant.kind = c.kind;
    s.config.n = c.n;
    s.config.p = c.p;
    s.config.epsilon = Rational(1, 4);
    s.config.delta = c.delta;
    s.config.seed = 1;
    s.filler = {c.filler, {}};
    s.emptier = {c.emptier, {}};
    s.trials = quick ? 4 : 32;
    s.steps = quick ? 200 : 2000;
    s.workers = workers;
    s = resolve_spec(s);
    ExperimentResult serial, parallel;
    const double ts = seconds_of([&] { serial = run_experiment_serial(s); });
    const double tp = seconds_of([&] { parallel = run_experiment(s); });
    const bool match = same(serial, parallel);
    ok = ok && match;
    std::printf("%-26s %8lld %8lld %10.3f %10.3f %8.2f %s\n", c.label, static_cast<long long>(s.trials),
                static_cast<long long>(s.steps), ts, tp, ts / tp, match ? "yes" : "NO");
  }
  std::printf("threads available: %d\n", workers > 0 ? workers : omp_get_max_threads());
  return ok ? 0 : 1;
}
