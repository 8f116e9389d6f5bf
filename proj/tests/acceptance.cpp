// Acceptance run: every check of the full verification suite, one
// PASS/FAIL line each. Exit status 0 only when all pass.

#include "cupgame/verify.hpp"

#include <iostream>
#include <string>

using namespace cupgame;

int main(int argc, char** argv) {
  VerifyOptions opts;
  opts.scale = SuiteScale::Full;
  opts.progress = &std::cerr;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--fast") opts.scale = SuiteScale::Fast;
    else if (a.rfind("--workers=", 0) == 0) opts.workers = std::stoi(a.substr(10));
    else {
      std::cerr << "usage: acceptance [--fast] [--workers=N]\n";
      return 1;
    }
  }
  VerifySession session(opts);
  std::vector<CheckResult> all;
  for (const std::string& id : check_ids()) {
    CheckResult r = session.run(id);
    report_checks(std::cout, {r});
    std::cout.flush();
    all.push_back(std::move(r));
  }
  std::size_t passed = 0;
  for (const CheckResult& r : all) passed += r.passed ? 1 : 0;
  std::cout << passed << " of " << all.size() << " acceptance checks passed\n";
  return passed == all.size() ? 0 : 1;
}
