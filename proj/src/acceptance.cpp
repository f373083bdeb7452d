#include "hcmix/bounds.hpp"
#include "hcmix/coupling.hpp"
#include "hcmix/exact_mixing.hpp"
#include "hcmix/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

namespace hcmix {

namespace {

std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

void say(const AcceptanceOptions& o, const std::string& msg) {
  if (o.progress) *o.progress << "  .. " << msg << std::endl;
}

Step round_step(double x) { return static_cast<Step>(std::llround(x)); }

// 1 -------------------------------------------------------------------------

Check kernel_identity() {
  Check c{"model_core", "1 Metropolis(1/2) = Gibbs((1-theta)/2)"};
  double worst = 0.0;
  for (int n = 2; n <= 10; ++n)
    for (double theta : {0.25, 0.5, 1.0}) {
      const ModelParams mh(n, theta, 0.5), gb(n, theta, (1.0 - theta) / 2.0);
      for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
        const auto xs = HypercubeState::decode(n, x);
        const auto a = metropolis_row(mh, xs);
        const auto b = gibbs_row(gb, xs);
        for (std::size_t i = 0; i < a.size(); ++i) {
          if (!(a[i].to == b[i].to)) worst = 1.0;
          worst = std::max(worst, std::abs(a[i].prob - b[i].prob));
        }
      }
    }
  c.observed = worst;
  c.tolerance = 1e-15;
  c.pass = worst <= c.tolerance;
  c.notes.push_back("n = 2..10, theta in {0.25, 0.5, 1}, every state");
  return c;
}

// 2 -------------------------------------------------------------------------

Check lumping() {
  Check c{"projection", "2 lumping and TV preservation"};
  double worst_mass = 0.0, worst_tv = 0.0;
  for (int n : {6, 8, 10, 12})
    for (double theta : {0.2, 1.0}) {
      const ModelParams m(n, theta);
      const auto pi_full = full_stationary(m);
      for (int k : {0, 1, n / 2, n - 1, n}) {
        const auto base = HypercubeState::with_weight(n, k);
        const auto kern = kernel_2d<double>(m, k);
        const auto pi2 = stationary_2d<double>(m, k);
        auto full = full_point_mass(n, base.encode());
        auto lumped = point_mass_2d<double>(n, k, Lattice2D(n, k).origin());
        for (int t = 0; t <= 40; ++t) {
          worst_mass = std::max(worst_mass, (lumped_pushforward(full, base) - lumped).abs().maxCoeff());
          worst_tv = std::max(worst_tv, std::abs(static_cast<double>(tv_distance(full, pi_full)) -
                                                 static_cast<double>(tv_distance(lumped, pi2))));
          full = full_evolve(m, full, 1, KernelKind::metropolis);
          lumped = apply_kernel(kern, lumped);
        }
      }
    }
  c.observed = std::max(worst_mass, worst_tv);
  c.tolerance = 1e-11;
  c.pass = worst_mass <= 1e-11 && worst_tv <= 1e-11;
  c.notes.push_back("max |pushforward - 2D| = " + num(worst_mass));
  c.notes.push_back("max |TV full - TV projected| = " + num(worst_tv));
  return c;
}

// 3 -------------------------------------------------------------------------

Check closed_forms() {
  Check c{"exact_mixing", "3 closed-form moments and stationary residuals"};
  double worst_mean = 0.0;
  for (double theta : {0.3, 1.0}) {
    const ModelParams m(50, theta);
    const auto t_big = round_step(50 * std::log(50.0));
    const auto k1 = kernel_1d<double>(m);
    for (int k : {0, 25, 50}) {
      const auto k2 = kernel_2d<double>(m, k);
      const Lattice2D lat(50, k);
      for (Step t : {Step{0}, Step{1}, Step{10}, t_big}) {
        const auto d1 = evolve(k1, point_mass_1d<double>(50, k), t);
        worst_mean = std::max(worst_mean, std::abs(mean_1d(d1) - expected_location_1d(m, k, t)));
        for (State2D z0 : {lat.origin(), lat.at(k, 50 - k), lat.at(k / 2, (50 - k) / 2)}) {
          const auto [er, erp] = mean_2d(evolve(k2, point_mass_2d<double>(50, k, z0), t));
          const auto [cr, crp] = expected_location_2d(m, k, z0, t);
          worst_mean = std::max({worst_mean, std::abs(er - cr), std::abs(erp - crp)});
        }
      }
      const auto [sr, srp] = stationary_location_2d(m, k);
      const auto [mr, mrp] = mean_2d(stationary_2d<double>(m, k));
      worst_mean = std::max({worst_mean, std::abs(sr - mr), std::abs(srp - mrp)});
    }
  }
  double worst_res = 0.0;
  for (int n : {10, 50, 200})
    for (double theta : {0.1, 0.5, 1.0}) {
      const ModelParams m(n, theta);
      const auto pi1 = stationary_1d<double>(m);
      worst_res = std::max(worst_res, (apply_kernel(kernel_1d<double>(m), pi1) - pi1).cwiseAbs().maxCoeff());
      for (int k : {0, n / 2, n}) {
        const auto pi2 = stationary_2d<double>(m, k);
        worst_res = std::max(worst_res, (apply_kernel(kernel_2d<double>(m, k), pi2) - pi2).abs().maxCoeff());
      }
    }
  c.observed = worst_mean;
  c.tolerance = 1e-9;
  c.pass = worst_mean <= 1e-9 && worst_res <= 1e-12;
  c.notes.push_back("max |closed form - evolved mean| = " + num(worst_mean) + " (tol 1e-9)");
  c.notes.push_back("max stationary residual = " + num(worst_res) + " (tol 1e-12)");
  return c;
}

// 4, 5 ----------------------------------------------------------------------

struct CutoffData {
  std::map<double, std::vector<MixingProfile>> by_theta;
};

const std::vector<int> kCutoffNs = {128, 256, 512, 1024};
constexpr double kProfileFloor = 0.01;

CutoffData cutoff_profiles(const AcceptanceOptions& o) {
  CutoffData data;
  for (double theta : {1.0, 0.5})
    for (int n : kCutoffNs) {
      const ModelParams m(n, theta);
      ProfileOptions opts;
      opts.stop_below = kProfileFloor;
      say(o, "worst-grid profile n = " + std::to_string(n) + ", theta = " + num(theta));
      data.by_theta[theta].push_back(worst_start_profile(
          m, linear_grid(round_step(3 * predicted_cutoff(m))), default_k_grid(n), opts));
    }
  return data;
}

Check cutoff_location(const CutoffData& data) {
  Check c{"exact_mixing", "4 cutoff location t_mix(0.25)/(n log n) -> 1/(1+theta)"};
  bool ok = true;
  double worst_final = 0.0;
  for (const auto& [theta, profiles] : data.by_theta) {
    const auto rows = cutoff_window_stats(profiles);
    double prev = 1e9;
    std::string line = "theta = " + num(theta) + ": deviation";
    for (const auto& r : rows) {
      if (!r.t_quarter.resolved) {
        ok = false;
        line += " n=" + std::to_string(r.n) + ":unresolved";
        continue;
      }
      const double dev = std::abs(r.ratio * (1 + theta) - 1.0);
      line += " n=" + std::to_string(r.n) + ":" + num(dev);
      if (dev >= prev) ok = false;
      prev = dev;
    }
    if (prev > 0.15) ok = false;
    worst_final = std::max(worst_final, prev);
    c.notes.push_back(line);
  }
  c.observed = worst_final;
  c.expected = 0.0;
  c.tolerance = 0.15;
  c.pass = ok;
  c.notes.push_back("deviation = |t_mix(0.25)(1+theta)/(n log n) - 1|, required <= 0.15 at n = 1024 and "
                    "strictly shrinking in n; k grid {0, n/4, n/2, 3n/4, n}");
  return c;
}

double profile_at(const MixingProfile& p, Step t, bool* clipped) {
  // Linear grid from 0: index == time. Past the end the envelope is below
  // the profile floor.
  if (t < static_cast<Step>(p.size())) return p.d[static_cast<std::size_t>(t)];
  *clipped = true;
  return p.d.back();
}

Check window_size(const CutoffData& data) {
  Check c{"exact_mixing", "5 window size"};
  bool ok = true;
  double worst_width = 0.0;
  for (const auto& [theta, profiles] : data.by_theta) {
    const auto rows = cutoff_window_stats(profiles);
    double prev_scaled = -1.0;
    std::string line = "theta = " + num(theta) + ":";
    for (const auto& r : rows) {
      if (!r.resolved()) {
        ok = false;
        line += " n=" + std::to_string(r.n) + ":unresolved";
        continue;
      }
      const double wn = static_cast<double>(r.width) / r.n;
      const double scaled = static_cast<double>(r.t_quarter.t) / r.n;
      line += " n=" + std::to_string(r.n) + " width/n=" + num(wn) + " t_mix/n=" + num(scaled);
      worst_width = std::max(worst_width, wn);
      if (wn > 10.0 || scaled <= prev_scaled) ok = false;
      prev_scaled = scaled;
    }
    c.notes.push_back(line);
  }
  const auto& prof = data.by_theta.at(1.0).back();
  const int n = prof.n;
  const Step tstar = round_step(predicted_cutoff(ModelParams(n, 1.0)));
  bool clipped = false;
  const double before = profile_at(prof, tstar - 3 * n, &clipped);
  const double after = profile_at(prof, tstar + 3 * n, &clipped);
  const double drop = before - after;
  c.notes.push_back("n = 1024, theta = 1: d(t*-3n) = " + num(before) + ", d(t*+3n) = " + num(after) +
                    (clipped ? " (upper bound: envelope below " + num(kProfileFloor) + ")" : "") +
                    ", drop = " + num(drop));
  ok = ok && drop >= 0.5;
  c.observed = worst_width;
  c.expected = 10.0;
  c.pass = ok;
  return c;
}

// 6 -------------------------------------------------------------------------

Check lower_bounds(const AcceptanceOptions& o) {
  Check c{"bounds", "6 lower-bound certificates at t* - alpha n"};
  const ModelParams m(512, 1.0);
  bool ok = true;
  double min_at4 = 1.0;
  for (double alpha : {2.0, 4.0}) {
    const auto dist = distinguishing_lower_bound(m, alpha);
    const auto az = azuma_lower_bound(m, alpha);
    const Step t = dist.t;
    if (!dist.valid || !az.valid) {
      c.notes.push_back("alpha = " + num(alpha) + ": t = " + std::to_string(t) +
                        " < 0, both bounds are undefined (" + dist.precondition_detail + ")");
      if (alpha == 4.0) {
        ok = false;
        min_at4 = 0.0;
      }
      continue;
    }
    say(o, "exact d(t) at alpha = " + num(alpha));
    const double exact = distance_profile(m, 512, {t}).d[0];
    const bool below = dist.value <= exact + 1e-9 && az.value <= exact + 1e-9;
    ok = ok && below;
    if (alpha == 4.0) {
      min_at4 = std::min(dist.value, az.value);
      ok = ok && min_at4 > 0.5;
    }
    c.notes.push_back("alpha = " + num(alpha) + ", t = " + std::to_string(t) + ": distinguishing " +
                      num(dist.value) + ", azuma " + num(az.value) + ", exact d(t) " + num(exact) +
                      (below ? "" : "  <-- bound above exact"));
  }
  // The same certificate where alpha = 4 has a non-negative time.
  const ModelParams big(4096, 1.0);
  const auto d4 = distinguishing_lower_bound(big, 4.0);
  const auto a4 = azuma_lower_bound(big, 4.0);
  if (d4.valid && a4.valid) {
    const double exact = distance_profile(big, 4096, {d4.t}).d[0];
    c.notes.push_back("info: n = 4096, alpha = 4, t = " + std::to_string(d4.t) + ": distinguishing " +
                      num(d4.value) + ", azuma " + num(a4.value) + ", exact d(t) " + num(exact));
  }
  c.observed = min_at4;
  c.expected = 0.5;
  c.pass = ok;
  return c;
}

// 7 -------------------------------------------------------------------------

Check concentration(const AcceptanceOptions& o) {
  Check c{"coupling_sim", "7 concentration and coupon collector (n = 100, 1e4 replicates)"};
  const int n = 100;
  const long reps = 10000;
  bool ok = true;
  double worst_z = 0.0;
  auto track = [&](double excess_in_se) { worst_z = std::max(worst_z, excess_in_se); };
  for (double theta : {0.5, 1.0}) {
    const ModelParams m(n, theta);
    for (Step t : {Step{100}, Step{300}, Step{500}}) {
      const auto mom = simulate_coupon(m, t, reps, o.seed + t);
      const auto exact = coupon_moments(m, t);
      const bool mean_ok = std::abs(mom.mean - exact.mean) <= 3 * mom.mean_se;
      const bool var_ok = mom.variance <= exact.variance_bound + 3 * mom.variance_se;
      track(std::abs(mom.mean - exact.mean) / mom.mean_se);
      ok = ok && mean_ok && var_ok;
      c.notes.push_back("coupon theta=" + num(theta) + " t=" + std::to_string(t) + ": mean " + num(mom.mean) +
                        " vs " + num(exact.mean) + " (se " + num(mom.mean_se) + "), var " + num(mom.variance) +
                        " <= " + num(exact.variance_bound) + " + 3*" + num(mom.variance_se) +
                        (mean_ok && var_ok ? "" : "  <-- fail"));
    }
    for (Step t : {Step{50}, Step{200}}) {
      const auto w = simulate_weights(m, HypercubeState::ones(n), t, reps, o.seed ^ (t * 7919));
      const std::vector<double> wd(w.begin(), w.end());
      const auto mom = sample_moments(wd);
      const double mean = expected_location_1d(m, n, t);
      const double ceiling = n / ((1 + theta) * (1 + theta));
      bool part = std::abs(mom.mean - mean) <= 3 * mom.mean_se && mom.variance <= ceiling + 3 * mom.variance_se;
      track(std::abs(mom.mean - mean) / mom.mean_se);
      std::string tails;
      for (double s : {5.0, 10.0, 15.0}) {
        long up = 0, down = 0;
        for (int x : w) {
          up += x >= mean + s;
          down += x <= mean - s;
        }
        for (long cnt : {up, down}) {
          const double p = static_cast<double>(cnt) / reps;
          const double se = std::sqrt(p * (1 - p) / reps);
          part = part && p <= azuma_tail(m, s) + 3 * se;
        }
        tails += " P(|S-E|>=" + num(s) + ")=" + num(static_cast<double>(up + down) / reps) + "/azuma " +
                 num(azuma_tail(m, s));
      }
      ok = ok && part;
      c.notes.push_back("S_t theta=" + num(theta) + " t=" + std::to_string(t) + ": mean " + num(mom.mean) +
                        " vs " + num(mean) + ", var " + num(mom.variance) + " <= " + num(ceiling) + ";" + tails +
                        (part ? "" : "  <-- fail"));
    }
    const auto burn = burn_in_check(m, HypercubeState::ones(n), 4.0, kDefaultDelta, reps, o.seed + 99);
    const bool burn_ok = burn.outside <= burn.bound + 3 * burn.se;
    ok = ok && burn_ok;
    c.notes.push_back("burn-in theta=" + num(theta) + ": P(outside n(p+-delta)) " + num(burn.outside) +
                      " <= bound " + num(burn.bound));
  }
  c.observed = worst_z;
  c.expected = 0.0;
  c.tolerance = 3.0;
  c.pass = ok;
  return c;
}

// 8 -------------------------------------------------------------------------

Check coupling_upper(const AcceptanceOptions& o) {
  Check c{"coupling_sim", "8 independence coupling upper bound"};
  bool ok = true;
  {
    const int n = 128;
    const ModelParams m(n, 1.0);
    const Step tstar = round_step(predicted_cutoff(m));
    const std::vector<double> alphas = {4, 9, 25};
    std::vector<Step> ts;
    for (double a : alphas) ts.push_back(tstar + round_step(a * n));
    std::vector<double> worst(alphas.size(), 0.0), worst_se(alphas.size(), 0.0);
    for (int k : default_k_grid(n)) {
      say(o, "coupling n = 128, k = " + std::to_string(k));
      const Lattice2D lat(n, k);
      const auto tails = estimate_coupling_tail(m, k, {lat.origin(), lat.at(k, n - k)}, ts, 4000, o.seed + k);
      for (std::size_t a = 0; a < alphas.size(); ++a)
        if (tails[a].p_hat >= worst[a]) {
          worst[a] = tails[a].p_hat;
          worst_se[a] = tails[a].se;
        }
    }
    std::string line = "n = 128, max over k grid of P(tau > t* + alpha n):";
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      line += " alpha=" + num(alphas[a]) + ":" + num(worst[a]) + "(se " + num(worst_se[a]) + ")";
      if (a > 0 && worst[a] > worst[a - 1]) ok = false;
    }
    ok = ok && worst.back() <= 0.2;
    c.observed = worst.back();
    c.expected = 0.2;
    c.notes.push_back(line);
  }
  {
    const int n = 64;
    const ModelParams m(n, 1.0);
    const Step tstar = round_step(predicted_cutoff(m));
    std::vector<Step> ts;
    for (double a : {-1.0, 0.0, 1.0, 4.0}) ts.push_back(tstar + round_step(a * n));
    double worst_gap = -1.0;
    bool dominated = true;
    for (int k = 0; k <= n; ++k) {
      const Lattice2D lat(n, k);
      const auto tails = estimate_coupling_tail(m, k, {lat.origin(), std::nullopt}, ts, 2000, o.seed + 1000 + k);
      const auto exact = distance_profile(m, k, ts);
      for (std::size_t i = 0; i < ts.size(); ++i) {
        worst_gap = std::max(worst_gap, exact.d[i] - (tails[i].p_hat + 3 * tails[i].se));
        if (tails[i].p_hat + 3 * tails[i].se < exact.d[i]) dominated = false;
      }
    }
    ok = ok && dominated;
    c.notes.push_back("n = 64, every k, Y_0 ~ stationary, t in t* + {-1, 0, 1, 4} n: max(d(t) - p_hat - 3se) = " +
                      num(worst_gap));
  }
  c.pass = ok;
  return c;
}

// 9 -------------------------------------------------------------------------

Check varying_theta(const AcceptanceOptions& o) {
  Check c{"coupling_sim", "9 varying theta_n"};
  bool ok = true;
  double worst_ratio = 0.0;
  for (int n : {256, 1024}) {
    const double th = 1.0 / n;
    const ModelParams m(n, th);
    const double predicted = theta_n_cutoff_time(n, th);
    const std::vector<double> alphas = {1, 2, 4};
    std::vector<Step> ts;
    for (double a : alphas) ts.push_back(round_step(predicted + a * n));
    say(o, "coordinate-wise coupling n = " + std::to_string(n));
    const auto tails = estimate_coordinatewise_tail(m, HypercubeState::ones(n), HypercubeState::zeros(n), ts,
                                                    10000, o.seed + n);
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      const double bound = coupon_moments(m, ts[a]).mean;
      const double target = std::exp(-alphas[a] * (1 + th) / 2) * 1.1;
      worst_ratio = std::max(worst_ratio, bound / target);
      const bool part = bound <= target && tails[a].p_hat <= bound + 3 * tails[a].se;
      ok = ok && part;
      c.notes.push_back("theta_n = 1/n, n = " + std::to_string(n) + ", alpha = " + num(alphas[a]) +
                        ": n gamma^t = " + num(bound) + " <= " + num(target) + ", p_hat = " + num(tails[a].p_hat) +
                        (part ? "" : "  <-- fail"));
    }
  }
  {
    double prev = -1.0;
    std::string line = "theta_n = n^-1/2, n gamma^t at the predicted time:";
    for (int n : {256, 1024, 4096}) {
      const double th = 1.0 / std::sqrt(static_cast<double>(n));
      const ModelParams m(n, th);
      const double q = coupon_moments(m, round_step(theta_n_cutoff_time(n, th))).mean;
      line += " n=" + std::to_string(n) + ":" + num(q);
      if (q <= prev) ok = false;
      prev = q;
    }
    c.notes.push_back(line);
  }
  {
    std::string line = "info: theta_n = n^-1/2, empirical P(tau > predicted):";
    for (int n : {256, 1024}) {
      const double th = 1.0 / std::sqrt(static_cast<double>(n));
      const ModelParams m(n, th);
      const auto tail = estimate_coordinatewise_tail(m, HypercubeState::ones(n), HypercubeState::zeros(n),
                                                     {round_step(theta_n_cutoff_time(n, th))}, 2000, o.seed + 7 * n);
      line += " n=" + std::to_string(n) + ":" + num(tail[0].p_hat);
    }
    c.notes.push_back(line);
  }
  {
    const int n = 1024;
    const double th = 1.0 / 32.0;
    const ModelParams m(n, th);
    const double predicted = theta_n_cutoff_time(n, th);
    const auto prof = distance_profile(m, n, linear_grid(round_step(3 * predicted)));
    const auto tm = mixing_time(prof, 0.25);
    const double rel = tm.resolved ? std::abs(static_cast<double>(tm.t) / predicted - 1.0) : 1.0;
    ok = ok && tm.resolved && rel <= 0.2;
    c.notes.push_back("theta_n = n^-1/2, n = 1024, all-ones start: t_mix(0.25) = " + std::to_string(tm.t) +
                      ", predicted " + num(predicted) + ", relative gap " + num(rel));
  }
  c.observed = worst_ratio;
  c.expected = 1.0;
  c.pass = ok;
  return c;
}

// 10 ------------------------------------------------------------------------

Check gamma_power() {
  Check c{"exact_mixing", "10 gamma^u sqrt(n) -> 1 as finite-n ratios"};
  const double a = gamma_power_check(ModelParams(10000, 1.0));
  const double b = gamma_power_check(ModelParams(1000000, 1.0));
  c.observed = std::abs(b - 1);
  c.tolerance = 0.01;
  c.pass = std::abs(a - 1) <= 0.05 && std::abs(b - 1) <= 0.01;
  c.notes.push_back("n = 1e4: " + num(a) + " (tol 5%), n = 1e6: " + num(b) + " (tol 1%)");
  return c;
}

}  // namespace

Report acceptance_suite(const AcceptanceOptions& opts) {
  Report rep;
  auto run = [&](auto&& fn) {
    rep.checks.push_back(fn());
    say(opts, rep.checks.back().name + (rep.checks.back().pass ? " pass" : " FAIL"));
  };
  run([] { return kernel_identity(); });
  run([] { return lumping(); });
  run([] { return closed_forms(); });
  const auto cutoff = cutoff_profiles(opts);
  run([&] { return cutoff_location(cutoff); });
  run([&] { return window_size(cutoff); });
  run([&] { return lower_bounds(opts); });
  run([&] { return concentration(opts); });
  run([&] { return coupling_upper(opts); });
  run([&] { return varying_theta(opts); });
  run([] { return gamma_power(); });
  return rep;
}

}  // namespace hcmix
