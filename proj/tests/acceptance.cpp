// Runs the twelve acceptance criteria and prints one PASS/FAIL line each.
// Exit status is the number of failures (capped at 125).

#include <cstdio>
#include <thread>

#include "rwre/checks.hpp"

int main() {
  rwre::AcceptanceOptions o;
  o.workers = std::max(1u, std::thread::hardware_concurrency());
  int failures = 0;
  int index = 0;
  for (const auto& c : rwre::acceptance_checks(o)) {
    const auto r = rwre::detail::timed(c.name, c.run);
    std::printf("%s %2d %s (%.1fs): %s\n", r.passed ? "PASS" : "FAIL", ++index, r.name.c_str(), r.seconds,
                r.detail.c_str());
    std::fflush(stdout);
    failures += r.passed ? 0 : 1;
  }
  std::printf("%d of %d criteria passed\n", index - failures, index);
  return std::min(failures, 125);
}
