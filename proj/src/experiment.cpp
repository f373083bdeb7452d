#include "hcmix/experiment.hpp"

#include "hcmix/bounds.hpp"
#include "hcmix/coupling.hpp"
#include "hcmix/exact_mixing.hpp"
#include "hcmix/random.hpp"
#include "hcmix/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace hcmix {

using nlohmann::json;

namespace {

const std::set<std::string> kCommands = {"profile", "worst",   "mixing-time", "bounds", "couple",
                                         "coupon",  "equiv",   "theta-n",     "verify"};

bool is_count(const std::string& s) {
  return !s.empty() && s.size() < 19 && std::all_of(s.begin(), s.end(), [](char ch) { return ch >= '0' && ch <= '9'; });
}

Step round_step(double x) { return static_cast<Step>(std::llround(x)); }

std::string format_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_float()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  const std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char ch : s) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + "\"";
}

json maybe(bool present, double v) { return present ? json(v) : json(nullptr); }

std::vector<int> k_grid_for(const ExperimentConfig& c, int n) {
  if (c.k.empty()) return default_k_grid(n);
  std::vector<int> ks;
  for (int k : c.k)
    if (k <= n) ks.push_back(k);
  return ks;
}

std::uint64_t derived_seed(std::uint64_t master, int n, int k) {
  return splitmix64(master ^ splitmix64((static_cast<std::uint64_t>(n) << 32) | static_cast<std::uint32_t>(k)));
}

// ---------------------------------------------------------------------------

Table run_profile(const ExperimentConfig& c) {
  const int n = c.n.front();
  const ModelParams m(n, config_theta(c, n), c.q);
  const int k = c.k.empty() ? n : c.k.front();
  const auto prof = distance_profile(m, k, linear_grid(resolve_t_max(c, n), c.t_stride));
  Table t{{"t", "d"}, {}};
  for (std::size_t g = 0; g < prof.size(); ++g) t.rows.push_back({prof.t[g], prof.d[g]});
  return t;
}

Table run_worst(const ExperimentConfig& c) {
  const int n = c.n.front();
  const ModelParams m(n, config_theta(c, n), c.q);
  const auto env = worst_start_profile(m, linear_grid(resolve_t_max(c, n), c.t_stride), k_grid_for(c, n));
  Table t{{"t", "d"}, {}};
  for (std::size_t g = 0; g < env.size(); ++g) t.rows.push_back({env.t[g], env.d[g]});
  return t;
}

Table run_mixing_time(const ExperimentConfig& c, bool& unresolved) {
  Table t{{"n", "theta", "eps", "t_mix", "resolved", "last_t", "last_d", "t_mix_over_n_log_n"}, {}};
  for (int n : c.n) {
    const ModelParams m(n, config_theta(c, n), c.q);
    ProfileOptions opts;
    opts.stop_below = *std::min_element(c.eps.begin(), c.eps.end());
    const auto env = worst_start_profile(m, linear_grid(resolve_t_max(c, n), c.t_stride), k_grid_for(c, n), opts);
    for (double eps : c.eps) {
      const auto r = mixing_time(env, eps);
      unresolved = unresolved || !r.resolved;
      t.rows.push_back({n, m.theta, eps, r.resolved ? json(r.t) : json(nullptr), r.resolved, r.last_t, r.last_d,
                        maybe(r.resolved, static_cast<double>(r.t) / (n * std::log(static_cast<double>(n))))});
    }
  }
  return t;
}

Table run_bounds(const ExperimentConfig& c) {
  Table t{{"n", "theta", "alpha", "bound", "t", "value", "valid", "exact_d", "detail"}, {}};
  for (int n : c.n) {
    const ModelParams m(n, config_theta(c, n));
    for (double alpha : c.alpha) {
      const auto reports = {std::pair{std::string("distinguishing"), distinguishing_lower_bound(m, alpha)},
                            std::pair{std::string("azuma"), azuma_lower_bound(m, alpha)}};
      for (const auto& [name, rep] : reports) {
        json exact = nullptr;
        if (rep.valid) exact = distance_profile(m, n, {rep.t}).d[0];
        t.rows.push_back({n, m.theta, alpha, name, rep.t, rep.valid ? json(rep.value) : json(nullptr), rep.valid,
                          exact, rep.precondition_detail});
      }
    }
  }
  return t;
}

Table run_couple(const ExperimentConfig& c) {
  Table t{{"n", "theta", "coupling", "k", "alpha", "t", "p_hat", "se", "replicates", "seed"}, {}};
  for (int n : c.n) {
    const ModelParams m(n, config_theta(c, n));
    const double base = predicted_time(c, n);
    std::vector<Step> ts;
    for (double a : c.alpha) {
      const Step s = round_step(base + a * n);
      if (s < 0) throw ConfigError("alpha", "threshold t = predicted + alpha n is negative for n = " + std::to_string(n));
      ts.push_back(s);
    }
    auto emit = [&](int k, const std::vector<TailEstimate>& tails) {
      for (std::size_t i = 0; i < tails.size(); ++i)
        t.rows.push_back({n, m.theta, c.coupling, k, c.alpha[i], tails[i].t, tails[i].p_hat, tails[i].se,
                          tails[i].replicates, tails[i].seed});
    };
    if (c.coupling == "coordinatewise") {
      emit(n, estimate_coordinatewise_tail(m, HypercubeState::ones(n), HypercubeState::zeros(n), ts, c.replicates,
                                           derived_seed(c.seed, n, n)));
      continue;
    }
    for (int k : k_grid_for(c, n)) {
      const Lattice2D lat(n, k);
      // Adversarial pair: the base point against its antipode.
      emit(k, estimate_coupling_tail(m, k, {lat.origin(), lat.at(k, n - k)}, ts, c.replicates,
                                     derived_seed(c.seed, n, k)));
    }
  }
  return t;
}

Table run_coupon(const ExperimentConfig& c) {
  Table t{{"n", "theta", "t", "mean", "mean_se", "variance", "variance_se", "closed_mean", "variance_bound", "seed"},
          {}};
  for (int n : c.n) {
    const ModelParams m(n, config_theta(c, n));
    std::vector<Step> ts = c.t_values;
    if (ts.empty()) ts = {0, round_step(predicted_time(c, n))};
    for (Step s : ts) {
      const std::uint64_t seed = derived_seed(c.seed, n, static_cast<int>(s));
      const auto mom = simulate_coupon(m, s, c.replicates, seed);
      const auto exact = coupon_moments(m, s);
      t.rows.push_back({n, m.theta, s, mom.mean, mom.mean_se, mom.variance, mom.variance_se, exact.mean,
                        exact.variance_bound, seed});
    }
  }
  return t;
}

Table run_equiv(const ExperimentConfig& c) {
  Table t{{"n", "theta", "max_abs_diff"}, {}};
  for (int n : c.n) {
    const double theta = config_theta(c, n);
    const ModelParams mh(n, theta, 0.5), gb(n, theta, (1.0 - theta) / 2.0);
    double worst = 0.0;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
      const auto xs = HypercubeState::decode(n, x);
      const auto a = metropolis_row(mh, xs);
      const auto b = gibbs_row(gb, xs);
      for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i].prob - b[i].prob));
    }
    t.rows.push_back({n, theta, worst});
  }
  return t;
}

Table run_theta_n(const ExperimentConfig& c, bool& unresolved) {
  Table t{{"n", "theta_n", "predicted", "eps", "t_mix", "resolved", "t_mix_over_predicted", "n_gamma_t_at_predicted"},
          {}};
  for (int n : c.n) {
    const double th = config_theta(c, n);
    const ModelParams m(n, th);
    const double predicted = theta_n_cutoff_time(n, th);
    ProfileOptions opts;
    opts.stop_below = *std::min_element(c.eps.begin(), c.eps.end());
    const auto prof = distance_profile(m, n, linear_grid(resolve_t_max(c, n), c.t_stride), opts);
    const double bound = coupon_moments(m, round_step(predicted)).mean;
    for (double eps : c.eps) {
      const auto r = mixing_time(prof, eps);
      unresolved = unresolved || !r.resolved;
      t.rows.push_back({n, th, predicted, eps, r.resolved ? json(r.t) : json(nullptr), r.resolved,
                        maybe(r.resolved, static_cast<double>(r.t) / predicted), bound});
    }
  }
  return t;
}

Table run_verify(const ExperimentConfig& c, bool& failed, std::ostream& err) {
  Mutation mut;
  mut.perturb_kernel_2d = c.mutate_kernel;
  const auto rep = verify_suite(c.level == "full" ? VerifyLevel::full : VerifyLevel::quick, mut, &err);
  Table t{{"module", "name", "pass", "observed", "expected", "tolerance", "notes"}, {}};
  for (const auto& ch : rep.checks) {
    std::string notes;
    for (const auto& note : ch.notes) notes += (notes.empty() ? "" : "; ") + note;
    t.rows.push_back({ch.module, ch.name, ch.pass, ch.observed, ch.expected, ch.tolerance, notes});
    if (!ch.pass)
      err << "FAIL " << ch.module << "/" << ch.name << ": observed " << ch.observed << ", expected " << ch.expected
          << ", tolerance " << ch.tolerance << "\n";
  }
  failed = !rep.all_pass();
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------

ThetaSchedule parse_schedule(const std::string& tag) {
  if (tag == "constant") return ThetaSchedule::constant;
  if (tag == "reciprocal") return ThetaSchedule::reciprocal;
  if (tag == "inverse-sqrt") return ThetaSchedule::inverse_sqrt;
  throw ConfigError("schedule", "expected constant, reciprocal or inverse-sqrt, got '" + tag + "'");
}

double config_theta(const ExperimentConfig& c, int n) { return theta_for(parse_schedule(c.schedule), n, c.theta); }

double predicted_time(const ExperimentConfig& c, int n) {
  const double th = config_theta(c, n);
  if (parse_schedule(c.schedule) == ThetaSchedule::constant) return predicted_cutoff(ModelParams(n, th));
  return theta_n_cutoff_time(n, th);
}

Step resolve_t_max(const ExperimentConfig& c, int n) {
  if (c.t_max == "auto") return std::max<Step>(1, round_step(3.0 * predicted_time(c, n)));
  return std::stoll(c.t_max);
}

void ExperimentConfig::validate() const {
  if (!kCommands.count(command)) throw ConfigError("command", "unknown subcommand '" + command + "'");
  if (n.empty()) throw ConfigError("n", "at least one dimension is required");
  for (int v : n) {
    if (v < 1) throw ConfigError("n", "must be >= 1, got " + std::to_string(v));
    if (command == "equiv" && v > kMaxFullDimension)
      throw ConfigError("n", "equiv enumerates {0,1}^n and needs n <= 16, got " + std::to_string(v));
  }
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("theta", "must lie in (0, 1], got " + std::to_string(theta));
  parse_schedule(schedule);
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("q", "must lie in [0, 1], got " + std::to_string(q));
  const std::set<std::string> general_q = {"profile", "worst", "mixing-time"};
  if (q != 0.5 && !general_q.count(command))
    throw ConfigError("q", command + " is defined for the lazy(1/2) chain only");
  for (int v : k) {
    if (v < 0) throw ConfigError("k", "must be >= 0, got " + std::to_string(v));
    if ((command == "profile" || command == "worst") && v > n.front())
      throw ConfigError("k", "start weight " + std::to_string(v) + " exceeds n = " + std::to_string(n.front()));
  }
  if (eps.empty()) throw ConfigError("eps", "at least one value is required");
  for (double e : eps)
    if (!(e > 0.0 && e <= 1.0)) throw ConfigError("eps", "must lie in (0, 1], got " + std::to_string(e));
  if (t_max != "auto" && !is_count(t_max)) throw ConfigError("t_max", "expected 'auto' or a step count, got '" + t_max + "'");
  if (t_stride < 1) throw ConfigError("t_stride", "must be >= 1");
  for (Step s : t_values)
    if (s < 0) throw ConfigError("t", "times must be >= 0");
  if ((command == "bounds" || command == "couple") && alpha.empty())
    throw ConfigError("alpha", "at least one value is required");
  if (command == "bounds")
    for (double a : alpha)
      if (!(a > 0.0)) throw ConfigError("alpha", "must be > 0 for bounds, got " + std::to_string(a));
  if (replicates < 1) throw ConfigError("replicates", "must be >= 1");
  if (coupling != "independence" && coupling != "coordinatewise")
    throw ConfigError("coupling", "expected independence or coordinatewise, got '" + coupling + "'");
  if (level != "quick" && level != "full") throw ConfigError("level", "expected quick or full, got '" + level + "'");
  if (format != "csv" && format != "json") throw ConfigError("format", "expected csv or json, got '" + format + "'");
}

void to_json(json& j, const ExperimentConfig& c) {
  j = json{{"command", c.command},   {"n", c.n},
           {"theta", c.theta},       {"schedule", c.schedule},
           {"q", c.q},               {"k", c.k},
           {"eps", c.eps},           {"t_max", c.t_max},
           {"t_stride", c.t_stride}, {"t", c.t_values},
           {"alpha", c.alpha},       {"replicates", c.replicates},
           {"seed", c.seed},         {"coupling", c.coupling},
           {"level", c.level},       {"mutate_kernel", c.mutate_kernel},
           {"output", c.output},     {"format", c.format}};
}

void from_json(const json& j, ExperimentConfig& c) {
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  const ExperimentConfig defaults;
  json known;
  to_json(known, defaults);
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw ConfigError(key, "unknown field");
  auto get = [&](const char* key, auto& dst) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(dst);
    } catch (const json::exception& e) {
      throw ConfigError(key, std::string("wrong type: ") + e.what());
    }
  };
  get("command", c.command);
  get("n", c.n);
  get("theta", c.theta);
  get("schedule", c.schedule);
  get("q", c.q);
  get("k", c.k);
  get("eps", c.eps);
  get("t_max", c.t_max);
  get("t_stride", c.t_stride);
  get("t", c.t_values);
  get("alpha", c.alpha);
  get("replicates", c.replicates);
  get("seed", c.seed);
  get("coupling", c.coupling);
  get("level", c.level);
  get("mutate_kernel", c.mutate_kernel);
  get("output", c.output);
  get("format", c.format);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const std::string marker = "# config: ";
  json j;
  try {
    if (text.rfind(marker, 0) == 0) {
      const auto eol = text.find('\n');
      j = json::parse(text.substr(marker.size(), eol == std::string::npos ? std::string::npos : eol - marker.size()));
    } else {
      j = json::parse(text);
      if (j.is_object() && j.contains("config") && j.contains("columns")) j = j.at("config");
    }
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("not a JSON config or hcmix output: ") + e.what());
  }
  ExperimentConfig c;
  from_json(j, c);
  return c;
}

void write_table(const Table& table, const ExperimentConfig& config, std::ostream& os) {
  json cfg;
  to_json(cfg, config);
  if (config.format == "json") {
    json rows = json::array();
    for (const auto& r : table.rows) rows.push_back(r);
    os << json{{"config", cfg}, {"columns", table.columns}, {"rows", rows}}.dump(2) << '\n';
    return;
  }
  os << "# config: " << cfg.dump() << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) os << (i ? "," : "") << table.columns[i];
  os << '\n';
  for (const auto& r : table.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_cell(r[i]);
    os << '\n';
  }
}

int run_experiment(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  try {
    config.validate();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  bool unresolved = false, failed = false;
  Table table;
  try {
    const auto& cmd = config.command;
    if (cmd == "profile") table = run_profile(config);
    else if (cmd == "worst") table = run_worst(config);
    else if (cmd == "mixing-time") table = run_mixing_time(config, unresolved);
    else if (cmd == "bounds") table = run_bounds(config);
    else if (cmd == "couple") table = run_couple(config);
    else if (cmd == "coupon") table = run_coupon(config);
    else if (cmd == "equiv") table = run_equiv(config);
    else if (cmd == "theta-n") table = run_theta_n(config, unresolved);
    else table = run_verify(config, failed, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (config.output.empty()) {
    write_table(table, config, out);
  } else {
    std::ofstream file(config.output, std::ios::binary | std::ios::trunc);
    if (!file) {
      err << "config error: output: cannot write '" << config.output << "'\n";
      return kExitConfig;
    }
    write_table(table, config, file);
  }
  if (failed) return kExitVerify;
  if (unresolved) {
    err << "unresolved: a mixing time was not reached within t_max\n";
    return kExitUnresolved;
  }
  return kExitOk;
}

}  // namespace hcmix
