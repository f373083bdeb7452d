// hcmix: exact mixing profiles, lower bounds and coupling experiments for the
// lazy Metropolis chain on the biased hypercube.

#include "hcmix/experiment.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <memory>

namespace {

using hcmix::ExperimentConfig;

// Flags bound to scratch storage; only those given on the command line are
// copied over the base config (defaults or --config).
struct Flags {
  ExperimentConfig v;
  std::string config_path;
  std::vector<std::function<void(ExperimentConfig&)>> apply;

  template <class T>
  void bind(CLI::App* sub, const std::string& names, T ExperimentConfig::*field, const std::string& help) {
    CLI::Option* opt = sub->add_option(names, v.*field, help);
    apply.push_back([this, opt, field](ExperimentConfig& c) {
      if (opt->count() > 0) c.*field = v.*field;
    });
  }
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config_path, "JSON config, or an earlier csv/json output to replay");
  f.bind(sub, "--n", &ExperimentConfig::n, "dimension(s)");
  f.bind(sub, "--theta", &ExperimentConfig::theta, "odds ratio in (0, 1]");
  f.bind(sub, "--schedule", &ExperimentConfig::schedule, "constant | reciprocal | inverse-sqrt");
  f.bind(sub, "--q", &ExperimentConfig::q, "laziness");
  f.bind(sub, "--k,--start-k", &ExperimentConfig::k, "start weight(s)");
  f.bind(sub, "--eps", &ExperimentConfig::eps, "distance threshold(s)");
  f.bind(sub, "--t-max", &ExperimentConfig::t_max, "last step, or auto (3x predicted)");
  f.bind(sub, "--t-stride", &ExperimentConfig::t_stride, "grid stride");
  f.bind(sub, "--t", &ExperimentConfig::t_values, "explicit times (coupon)");
  f.bind(sub, "--alpha", &ExperimentConfig::alpha, "window offsets");
  f.bind(sub, "--replicates", &ExperimentConfig::replicates, "Monte Carlo replicates");
  f.bind(sub, "--seed", &ExperimentConfig::seed, "master seed");
  f.bind(sub, "--coupling", &ExperimentConfig::coupling, "independence | coordinatewise");
  f.bind(sub, "--level", &ExperimentConfig::level, "verify level: quick | full");
  f.bind(sub, "--output,-o", &ExperimentConfig::output, "output file (default stdout)");
  f.bind(sub, "--format", &ExperimentConfig::format, "csv | json");
  CLI::Option* mutate = sub->add_flag("--mutate-kernel", f.v.mutate_kernel, "perturb the 2D kernel (test hook)");
  mutate->group("");
  f.apply.push_back([&f, mutate](ExperimentConfig& c) {
    if (mutate->count() > 0) c.mutate_kernel = true;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixing of the lazy Metropolis chain on the biased hypercube"};
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"profile", "exact d(t) from a start of weight k"},
      {"worst", "worst-start envelope over the k grid"},
      {"mixing-time", "t_mix(eps) per n"},
      {"bounds", "distinguishing and Azuma lower bounds against exact d"},
      {"couple", "coupling-time tails"},
      {"coupon", "unrefreshed-coordinate counts"},
      {"equiv", "Metropolis vs Gibbs kernel identity"},
      {"theta-n", "varying-theta cutoff"},
      {"verify", "invariant suite"},
  };
  std::vector<std::unique_ptr<Flags>> flags;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    flags.push_back(std::make_unique<Flags>());
    add_common(sub, *flags.back());
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return hcmix::kExitConfig;
  }

  for (std::size_t i = 0; i < commands.size(); ++i) {
    CLI::App* sub = app.get_subcommand(commands[i].first);
    if (!sub->parsed()) continue;
    Flags& f = *flags[i];
    try {
      ExperimentConfig c = f.config_path.empty() ? ExperimentConfig{} : hcmix::load_config(f.config_path);
      for (auto& a : f.apply) a(c);
      c.command = commands[i].first;
      return hcmix::run_experiment(c, std::cout, std::cerr);
    } catch (const hcmix::ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return hcmix::kExitConfig;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return hcmix::kExitConfig;
}
