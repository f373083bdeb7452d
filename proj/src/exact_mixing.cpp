#include "hcmix/exact_mixing.hpp"

#include "hcmix/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <type_traits>

namespace hcmix {

namespace {

void require_half_lazy(const ModelParams& m, const char* who) {
  require(m.is_half_lazy(), std::string(who) + ": closed forms hold for the lazy(1/2) chain only");
}

void check_grid(const std::vector<Step>& grid) {
  for (std::size_t g = 0; g < grid.size(); ++g) {
    require(grid[g] >= 0, "time grid: negative time");
    require(g == 0 || grid[g] > grid[g - 1], "time grid: times must be strictly increasing");
  }
}

template <class Dist, class Kernel, class Stationary>
MixingProfile run_profile(const Kernel& kern, Dist d, const Stationary& pi,
                          const std::vector<Step>& grid, const ProfileOptions& opts) {
  MixingProfile prof;
  DriftMonitor mon;
  Dist next;
  Step now = 0;
  for (Step target : grid) {
    while (now < target) {
      if constexpr (std::is_same_v<Dist, Dist2D<double>>) {
        apply_kernel(kern, d, next);
        d.swap(next);
      } else {
        d = apply_kernel(kern, d);
      }
      ++now;
      mon.maybe_renormalize(now, d);
    }
    const double tv = std::clamp(static_cast<double>(tv_distance(d, pi)), 0.0, 1.0);
    prof.t.push_back(target);
    prof.d.push_back(tv);
    if (opts.stop_below >= 0.0 && tv <= opts.stop_below) break;
  }
  return prof;
}

}  // namespace

ClosedFormParams closed_form_params(const ModelParams& m, int k) {
  require(k >= 0 && k <= m.n, "closed_form_params: k outside [0, n]");
  return {m.gamma(), k * (1.0 - m.theta) / (2.0 * m.n), m.p()};
}

double expected_location_1d(const ModelParams& m, double k, Step t) {
  require_half_lazy(m, "expected_location_1d");
  require(t >= 0, "expected_location_1d: t must be >= 0");
  const double g = std::pow(m.gamma(), static_cast<double>(t));
  return m.n * m.p() * (1.0 - g) + k * g;
}

std::pair<double, double> stationary_location_2d(const ModelParams& m, int k) {
  require_half_lazy(m, "stationary_location_2d");
  const auto cf = closed_form_params(m, k);
  const double scale = 2.0 * m.n / (1.0 + m.theta);
  return {scale * cf.beta, scale * (m.theta + cf.beta)};
}

std::pair<double, double> expected_location_2d(const ModelParams& m, int k, State2D start, Step t) {
  require_half_lazy(m, "expected_location_2d");
  require(t >= 0, "expected_location_2d: t must be >= 0");
  Lattice2D(m.n, k).check(start, "expected_location_2d");
  const auto [r_inf, rp_inf] = stationary_location_2d(m, k);
  const double g = std::pow(m.gamma(), static_cast<double>(t));
  return {r_inf * (1.0 - g) + start.r * g, rp_inf * (1.0 - g) + start.rp * g};
}

double gamma_power_check(const ModelParams& m) {
  const double n = m.n;
  const double u = std::round(n * std::log(n) / (1.0 + m.theta));
  return std::exp(u * std::log1p(-(1.0 + m.theta) / (2.0 * n)) + 0.5 * std::log(n));
}

double predicted_cutoff(const ModelParams& m) {
  return m.n * std::log(static_cast<double>(m.n)) / (1.0 + m.theta);
}

std::vector<Step> linear_grid(Step t_max, Step stride) {
  require(t_max >= 0 && stride >= 1, "linear_grid: need t_max >= 0 and stride >= 1");
  std::vector<Step> g;
  for (Step t = 0; t <= t_max; t += stride) g.push_back(t);
  if (g.back() != t_max) g.push_back(t_max);
  return g;
}

std::vector<Step> cutoff_grid(Step dense_from, Step t_max, double ratio) {
  require(dense_from >= 0 && t_max >= 0 && ratio > 1.0, "cutoff_grid: invalid arguments");
  std::vector<Step> g{0};
  double next = 1.0;
  while (static_cast<Step>(next) < std::min(dense_from, t_max)) {
    const auto t = static_cast<Step>(next);
    if (t > g.back()) g.push_back(t);
    next *= ratio;
  }
  for (Step t = std::max<Step>(g.back() + 1, std::min(dense_from, t_max)); t <= t_max; ++t)
    g.push_back(t);
  return g;
}

MixingProfile distance_profile(const ModelParams& m, int start_k, const std::vector<Step>& t_grid,
                               const ProfileOptions& opts) {
  require(start_k >= 0 && start_k <= m.n, "distance_profile: start_k outside [0, n]");
  check_grid(t_grid);
  MixingProfile prof;
  if (start_k == 0 || start_k == m.n) {
    // d(x, X_t) is a function of S(X_t) here, so the 1D chain carries the
    // same total variation.
    prof = run_profile(kernel_1d<double>(m), point_mass_1d<double>(m.n, start_k),
                       stationary_1d<double>(m), t_grid, opts);
  } else {
    const Lattice2D lat(m.n, start_k);
    prof = run_profile(kernel_2d<double>(m, start_k), point_mass_2d<double>(m.n, start_k, lat.origin()),
                       stationary_2d<double>(m, start_k), t_grid, opts);
  }
  prof.n = m.n;
  prof.theta = m.theta;
  prof.start_k = start_k;
  return prof;
}

std::vector<int> default_k_grid(int n) {
  std::vector<int> ks;
  if (n <= 64) {
    for (int k = 0; k <= n; ++k) ks.push_back(k);
    return ks;
  }
  auto ceil_frac = [n](int num) { return (num * n + 3) / 4; };
  ks = {0, ceil_frac(1), ceil_frac(2), ceil_frac(3), n};
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return ks;
}

MixingProfile worst_start_profile(const ModelParams& m, const std::vector<Step>& t_grid,
                                  const std::vector<int>& k_grid, const ProfileOptions& opts) {
  require(!k_grid.empty(), "worst_start_profile: empty k grid");
  for (int k : k_grid) require(k >= 0 && k <= m.n, "worst_start_profile: k outside [0, n]");
  const auto profiles = parallel_map(k_grid.size(), [&](std::size_t idx) {
    return distance_profile(m, k_grid[idx], t_grid, opts);
  });
  MixingProfile env;
  env.n = m.n;
  env.theta = m.theta;
  env.start_k = -1;
  for (std::size_t g = 0; g < t_grid.size(); ++g) {
    bool any = false;
    double worst = 0.0;
    for (const auto& p : profiles) {
      if (g < p.size()) {
        any = true;
        worst = std::max(worst, p.d[g]);
      }
    }
    if (!any) break;
    env.t.push_back(t_grid[g]);
    env.d.push_back(worst);
  }
  return env;
}

MixingTimeResult mixing_time(const MixingProfile& profile, double eps) {
  MixingTimeResult res;
  if (profile.size() == 0) return res;
  for (std::size_t g = 0; g < profile.size(); ++g) {
    if (profile.d[g] <= eps) {
      res.resolved = true;
      res.t = profile.t[g];
      break;
    }
  }
  res.last_t = profile.t.back();
  res.last_d = profile.d.back();
  return res;
}

std::vector<WindowRow> cutoff_window_stats(const std::vector<MixingProfile>& profiles) {
  std::vector<WindowRow> rows;
  for (const auto& p : profiles) {
    WindowRow row;
    row.n = p.n;
    row.theta = p.theta;
    row.t_quarter = mixing_time(p, 0.25);
    row.t_tenth = mixing_time(p, 0.1);
    row.t_ninetenths = mixing_time(p, 0.9);
    if (row.t_tenth.resolved && row.t_ninetenths.resolved)
      row.width = row.t_tenth.t - row.t_ninetenths.t;
    if (row.t_quarter.resolved)
      row.ratio = static_cast<double>(row.t_quarter.t) / (p.n * std::log(static_cast<double>(p.n)));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace hcmix
