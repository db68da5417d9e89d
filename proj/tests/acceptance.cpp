// One line per acceptance criterion; nonzero exit if any fails.
// Usage: acceptance [config-file]

#include <cstdio>
#include <exception>

#include "config.hpp"
#include "verify.hpp"

int main(int argc, char** argv) {
  try {
    const hypoctl::RunConfig cfg =
        argc > 1 ? hypoctl::RunConfig::load(argv[1]) : hypoctl::RunConfig{};
    int failed = 0;
    hypoctl::run_acceptance(cfg, {}, [&](const hypoctl::CheckResult& r) {
      std::printf("criterion %2d %s: %s [%s; %.2fs of %.0fs]\n", r.id, r.passed ? "PASS" : "FAIL",
                  r.name.c_str(), r.measured.c_str(), r.seconds, r.budget);
      std::fflush(stdout);
      failed += r.passed ? 0 : 1;
    });
    std::printf("%d of %d criteria passed\n", hypoctl::acceptance_count() - failed,
                hypoctl::acceptance_count());
    return failed == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance: %s\n", e.what());
    return 2;
  }
}
