#pragma once

// Invariant suite behind `hcmix verify` and the acceptance table.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace hcmix {

struct Check {
  Check() = default;
  Check(std::string module_, std::string name_) : module(std::move(module_)), name(std::move(name_)) {}

  std::string module;
  std::string name;
  bool pass = false;
  double observed = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  /// Supporting lines: sub-results, informational values.
  std::vector<std::string> notes;
};

struct Report {
  std::vector<Check> checks;

  bool all_pass() const;
  std::size_t failures() const;
};

enum class VerifyLevel { quick, full };

/// Test hook: perturbs one entry of the two-dimensional kernel (keeping the
/// row stochastic) before the lumping checks run.
struct Mutation {
  bool perturb_kernel_2d = false;
  double amount = 1e-3;
};

/// quick: small-n oracles and closed-form identities. full: quick plus the
/// acceptance table.
Report verify_suite(VerifyLevel level, const Mutation& mutation = {}, std::ostream* progress = nullptr);

struct AcceptanceOptions {
  std::uint64_t seed = 20240611;
  std::ostream* progress = nullptr;
};

/// One check per acceptance criterion, named "1" .. "10".
Report acceptance_suite(const AcceptanceOptions& opts = {});

/// "[PASS] module/name: observed .. expected .. tol .." followed by indented notes.
void print_report(const Report& report, std::ostream& os);

}  // namespace hcmix
