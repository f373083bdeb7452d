// Acceptance table: one PASS/FAIL line per criterion, supporting values
// indented beneath it. Exit status is nonzero when any criterion fails.

#include "hcmix/verify.hpp"

#include <chrono>
#include <cstring>
#include <iostream>

int main(int argc, char** argv) {
  hcmix::AcceptanceOptions opts;
  if (argc > 1 && std::strcmp(argv[1], "--progress") == 0) opts.progress = &std::cerr;
  const auto start = std::chrono::steady_clock::now();
  const auto report = hcmix::acceptance_suite(opts);
  hcmix::print_report(report, std::cout);
  const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << "elapsed " << secs << " s\n";
  return report.all_pass() ? 0 : 1;
}
