#pragma once

// Experiment configuration, table output and the subcommand dispatcher used
// by the `hcmix` tool. Every table starts with its resolved config so a run
// can be replayed from its own output.

#include "hcmix/model.hpp"
#include "hcmix/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace hcmix {

/// Invalid configuration; `field` names the offending entry.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitUnresolved = 3, kExitVerify = 4 };

struct ExperimentConfig {
  std::string command;
  std::vector<int> n{64};
  double theta = 1.0;
  std::string schedule = "constant";  // constant | reciprocal | inverse-sqrt
  double q = 0.5;
  /// Start weight(s); empty means all-ones for `profile` and the default
  /// grid elsewhere.
  std::vector<int> k;
  std::vector<double> eps{0.25};
  /// "auto" (3x the predicted time) or a step count.
  std::string t_max = "auto";
  Step t_stride = 1;
  /// Explicit times for `coupon`.
  std::vector<Step> t_values;
  std::vector<double> alpha{1.0, 4.0, 16.0};
  long replicates = 10000;
  std::uint64_t seed = 20240611;
  std::string coupling = "independence";  // independence | coordinatewise
  std::string level = "quick";            // verify: quick | full
  bool mutate_kernel = false;             // verify test hook
  std::string output;                     // empty: standard output
  std::string format = "csv";             // csv | json

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

/// Reads a config from a JSON file or from the config line of an earlier
/// csv/json output.
ExperimentConfig load_config(const std::string& path);

ThetaSchedule parse_schedule(const std::string& tag);

/// Theta for dimension n under the configured schedule.
double config_theta(const ExperimentConfig& c, int n);

/// Cutoff prediction behind `--t-max auto`: n log n/(1+theta) for constant
/// theta, the varying-theta formula otherwise.
double predicted_time(const ExperimentConfig& c, int n);

Step resolve_t_max(const ExperimentConfig& c, int n);

/// A table of json scalars (integers, doubles, strings, booleans).
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;
};

/// csv: "# config: {...}", the header row, then rows; LF line ends, doubles
/// with 17 significant digits. json: {"config", "columns", "rows"}.
void write_table(const Table& table, const ExperimentConfig& config, std::ostream& os);

/// Runs one experiment; writes to config.output (or `out` when empty),
/// diagnostics to `err`. Returns an ExitCode.
int run_experiment(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

}  // namespace hcmix
