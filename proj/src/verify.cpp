#include "hcmix/verify.hpp"

#include "hcmix/bounds.hpp"
#include "hcmix/coupling.hpp"
#include "hcmix/exact_mixing.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace hcmix {

bool Report::all_pass() const { return failures() == 0; }

std::size_t Report::failures() const {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [](const Check& c) { return !c.pass; }));
}

void print_report(const Report& report, std::ostream& os) {
  for (const auto& c : report.checks) {
    os << (c.pass ? "[PASS] " : "[FAIL] ") << c.module << "/" << c.name << ": observed "
       << std::setprecision(6) << c.observed << ", expected " << c.expected << ", tolerance "
       << c.tolerance << "\n";
    for (const auto& note : c.notes) os << "         " << note << "\n";
  }
  os << report.checks.size() - report.failures() << "/" << report.checks.size() << " checks passed\n";
}

namespace {

Check at_most(std::string module, std::string name, double observed, double tolerance) {
  Check c{std::move(module), std::move(name)};
  c.observed = observed;
  c.tolerance = tolerance;
  c.pass = observed <= tolerance;
  return c;
}

Check row_properties() {
  double worst = 0.0;
  for (int n : {1, 3, 6})
    for (double theta : {0.1, 0.5, 1.0})
      for (double q : {0.0, 0.25, 0.5}) {
        const ModelParams m(n, theta, q);
        for (auto kind : {KernelKind::metropolis, KernelKind::gibbs}) {
          const auto r = flip_rates(m, kind);
          for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
            const auto row = kernel_row(m, HypercubeState::decode(n, x), kind);
            double sum = 0.0;
            for (const auto& e : row) {
              sum += e.prob;
              if (e.prob < 0.0) worst = 1.0;
            }
            worst = std::max(worst, std::abs(sum - 1.0));
          }
          // Detailed balance across one edge per weight.
          for (int s = 0; s < n; ++s) {
            const double lhs = std::pow(theta, s) * r.up;
            const double rhs = std::pow(theta, s + 1) * r.down;
            worst = std::max(worst, std::abs(lhs - rhs));
          }
        }
      }
  return at_most("model_core", "row stochasticity and detailed balance", worst, 1e-15);
}

Check kernel_identity_small() {
  double worst = 0.0;
  for (int n = 2; n <= 6; ++n)
    for (double theta : {0.25, 0.5, 1.0}) {
      const ModelParams mh(n, theta), gb(n, theta, (1 - theta) / 2);
      for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
        const auto xs = HypercubeState::decode(n, x);
        const auto a = metropolis_row(mh, xs);
        const auto b = gibbs_row(gb, xs);
        for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i].prob - b[i].prob));
      }
    }
  return at_most("model_core", "metropolis/gibbs kernel identity", worst, 1e-15);
}

Check full_invariance() {
  const ModelParams m(10, 0.3);
  const auto pi = full_stationary(m);
  double worst = std::abs(pi.sum() - 1.0);
  for (auto kind : {KernelKind::metropolis, KernelKind::gibbs})
    worst = std::max(worst, (full_evolve(m, pi, 20, kind) - pi).cwiseAbs().maxCoeff());
  return at_most("model_core", "full-space stationarity", worst, 1e-12);
}

Check lumping_consistency(const Mutation& mutation) {
  double worst = 0.0;
  for (double theta : {0.2, 1.0}) {
    const ModelParams m(8, theta);
    for (int k = 0; k <= 8; ++k) {
      auto kern = kernel_2d<double>(m, k);
      if (mutation.perturb_kernel_2d && k >= 1) {
        kern.r_up[0] += mutation.amount;
        kern.stay.row(0) -= mutation.amount;
      }
      const auto base = HypercubeState::with_weight(8, k);
      auto full = full_point_mass(8, base.encode());
      auto lumped = point_mass_2d<double>(8, k, Lattice2D(8, k).origin());
      for (int t = 0; t <= 20; ++t) {
        worst = std::max(worst, (lumped_pushforward(full, base) - lumped).abs().maxCoeff());
        full = full_evolve(m, full, 1, KernelKind::metropolis);
        lumped = apply_kernel(kern, lumped);
      }
    }
  }
  auto c = at_most("projection", "lumping consistency", worst, 1e-11);
  c.notes.push_back("max |pushforward(full_evolve) - evolve(kernel_2d)|, n = 8, t <= 20");
  return c;
}

Check stationary_residuals() {
  double worst = 0.0;
  for (int n : {10, 50})
    for (double theta : {0.1, 1.0}) {
      const ModelParams m(n, theta);
      const auto pi1 = stationary_1d<double>(m);
      worst = std::max(worst, (apply_kernel(kernel_1d<double>(m), pi1) - pi1).cwiseAbs().maxCoeff());
      for (int k : {0, n / 2, n}) {
        const auto pi2 = stationary_2d<double>(m, k);
        worst = std::max(worst, (apply_kernel(kernel_2d<double>(m, k), pi2) - pi2).abs().maxCoeff());
      }
    }
  return at_most("projection", "stationary fixed points", worst, 1e-12);
}

Check marginal_1d() {
  const ModelParams m(20, 0.4);
  double worst = 0.0;
  for (int k : {0, 7, 20}) {
    const auto d2 = evolve(kernel_2d<double>(m, k), point_mass_2d<double>(20, k, Lattice2D(20, k).origin()), 60);
    const auto d1 = evolve(kernel_1d<double>(m), point_mass_1d<double>(20, k), 60);
    worst = std::max(worst, (s_marginal(d2) - d1).cwiseAbs().maxCoeff());
  }
  return at_most("projection", "S-marginal equals the 1D chain", worst, 1e-11);
}

Check profile_vs_oracle() {
  const ModelParams m(8, 0.6);
  const auto pi = full_stationary(m);
  const auto grid = linear_grid(30);
  double worst = 0.0;
  for (int k = 0; k <= 8; ++k) {
    const auto prof = distance_profile(m, k, grid);
    auto d = full_point_mass(8, HypercubeState::with_weight(8, k).encode());
    for (int t = 0; t <= 30; ++t) {
      worst = std::max(worst, std::abs(prof.d[t] - static_cast<double>(tv_distance(d, pi))));
      d = full_evolve(m, d, 1, KernelKind::metropolis);
    }
  }
  return at_most("exact_mixing", "profiles match the full-space oracle", worst, 1e-11);
}

Check profile_monotone() {
  const ModelParams m(64, 0.5);
  const auto env = worst_start_profile(m, linear_grid(600), default_k_grid(64));
  double worst = 0.0;
  for (std::size_t g = 1; g < env.size(); ++g) worst = std::max(worst, env.d[g] - env.d[g - 1]);
  return at_most("exact_mixing", "d(t) nonincreasing", worst, 1e-12);
}

Check closed_form_means() {
  double worst = 0.0;
  for (double theta : {0.3, 1.0}) {
    const ModelParams m(50, theta);
    for (int k : {0, 25, 50})
      for (Step t : {Step{0}, Step{1}, Step{10}, Step{196}}) {
        const auto d1 = evolve(kernel_1d<double>(m), point_mass_1d<double>(50, k), t);
        worst = std::max(worst, std::abs(mean_1d(d1) - expected_location_1d(m, k, t)));
        const Lattice2D lat(50, k);
        const auto [er, erp] = mean_2d(evolve(kernel_2d<double>(m, k), point_mass_2d<double>(50, k, lat.origin()), t));
        const auto [cr, crp] = expected_location_2d(m, k, lat.origin(), t);
        worst = std::max({worst, std::abs(er - cr), std::abs(erp - crp)});
      }
  }
  return at_most("exact_mixing", "closed-form means", worst, 1e-9);
}

Check gamma_power_ratios() {
  const double a = gamma_power_check(ModelParams(10000, 1.0));
  const double b = gamma_power_check(ModelParams(1000000, 1.0));
  auto c = at_most("exact_mixing", "gamma^u sqrt(n) ratio at n = 1e6", std::abs(b - 1), 0.01);
  c.pass = c.pass && std::abs(a - 1) <= 0.05;
  c.notes.push_back("n = 1e4: " + std::to_string(a));
  return c;
}

Check bound_arithmetic() {
  double worst = 0.0;
  auto gap = [&](double a, double b) { worst = std::max(worst, std::abs(a - b)); };
  gap(distinguishing_bound_from_ratio(2.0), 0.5);
  gap(azuma_tail(ModelParams(10, 1.0), 3.0), std::exp(-0.38));
  gap(coupon_moments(ModelParams(10, 1.0), 1).mean, 9.0);
  gap(coupon_moments(ModelParams(10, 1.0), 1).variance_bound, 0.9);
  gap(supermartingale_tail(4, 2, 1, 400).value, 0.8);
  gap(supermartingale_tail_modified(2, 2, 1, 400, 8).value, 0.37);
  gap(theta_n_cutoff_time(100, 1.0), 50 * std::log(100.0));
  gap(sigma_floor(ModelParams(100, 1.0), 50, 0.05, FloorCoordinate::r).value, 0.81);
  auto c = at_most("bounds", "closed-form bound values", worst, 1e-12);
  const bool flags = !supermartingale_tail(4, 2, 1, 40).valid && !supermartingale_tail_modified(2, 2, 1, 400, 3).valid &&
                     !sigma_floor(ModelParams(100, 1.0), 90, 0.05, FloorCoordinate::r).valid;
  c.pass = c.pass && flags;
  return c;
}

Check lower_bounds_below_exact() {
  const ModelParams m(128, 1.0);
  const auto grid = linear_grid(static_cast<Step>(2 * predicted_cutoff(m)), 3);
  const auto prof = distance_profile(m, 128, grid);
  double worst = -1.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    worst = std::max(worst, distinguishing_lower_bound_at(m, grid[g]).value - prof.d[g]);
    for (double alpha : {1.0, 2.0})
      worst = std::max(worst, azuma_lower_bound_at(m, grid[g], alpha).value - prof.d[g]);
  }
  return at_most("bounds", "lower bounds below exact d(t)", worst, 1e-9);
}

Check coupling_trajectories() {
  const ModelParams m(24, 1.0);
  const Lattice2D lat(24, 12);
  bool ok = true;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto out = run_independence_2d(m, 12, lat.origin(), lat.at(12, 12), 50000, s, StopRule::run_to_cap);
    ok = ok && out.sign_preserved && out.permanent && out.tau && *out.tau == std::max(*out.tau_r, *out.tau_rp);
  }
  Check c{"coupling_sim", "coalescence permanence and sign preservation"};
  c.pass = ok;
  c.observed = ok ? 0.0 : 1.0;
  return c;
}

Check coupling_marginal() {
  const ModelParams m(8, 1.0);
  const int k = 3;
  const Lattice2D lat(8, k);
  const long reps = 20000;
  Grid2 counts = Grid2::Zero(lat.rows(), lat.cols());
  for (long r = 0; r < reps; ++r) {
    State2D zf;
    run_independence_2d(m, k, lat.origin(), lat.at(3, 5), 20, splitmix64(static_cast<std::uint64_t>(r)),
                        StopRule::run_to_cap, &zf);
    counts(lat.row_of(zf), lat.col_of(zf)) += 1;
  }
  const auto exact = evolve(kernel_2d<double>(m, k), point_mass_2d<double>(8, k, lat.origin()), 20);
  // Largest standardized cell deviation.
  double worst = 0.0;
  for (Eigen::Index i = 0; i < exact.size(); ++i) {
    const double p = exact.data()[i];
    if (p * reps < 5) continue;
    const double z = std::abs(counts.data()[i] / reps - p) / std::sqrt(p * (1 - p) / reps);
    worst = std::max(worst, z);
  }
  auto c = at_most("coupling_sim", "Z-marginal matches exact evolution (max |z| over cells)", worst, 4.5);
  return c;
}

}  // namespace

Report verify_suite(VerifyLevel level, const Mutation& mutation, std::ostream* progress) {
  Report rep;
  for (auto fn : {+[] { return row_properties(); }, +[] { return kernel_identity_small(); },
                  +[] { return full_invariance(); }})
    rep.checks.push_back(fn());
  rep.checks.push_back(lumping_consistency(mutation));
  for (auto fn : {+[] { return stationary_residuals(); }, +[] { return marginal_1d(); },
                  +[] { return profile_vs_oracle(); }, +[] { return profile_monotone(); },
                  +[] { return closed_form_means(); }, +[] { return gamma_power_ratios(); },
                  +[] { return bound_arithmetic(); }, +[] { return lower_bounds_below_exact(); },
                  +[] { return coupling_trajectories(); }, +[] { return coupling_marginal(); }})
    rep.checks.push_back(fn());
  if (level == VerifyLevel::full) {
    AcceptanceOptions opts;
    opts.progress = progress;
    auto acc = acceptance_suite(opts);
    for (auto& c : acc.checks) {
      c.module = "acceptance/" + c.module;
      rep.checks.push_back(std::move(c));
    }
  }
  return rep;
}

}  // namespace hcmix
