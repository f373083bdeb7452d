#include "doctest.h"
#include "oracles.hpp"

#include "hcmix/bounds.hpp"
#include "hcmix/coupling.hpp"
#include "hcmix/exact_mixing.hpp"

#include <map>

using namespace hcmix;

TEST_CASE("identical starts coalesce at time zero") {
  const ModelParams m(16, 0.5);
  const auto x = HypercubeState::with_weight(16, 5);
  CHECK(*run_coordinatewise(m, x, x, 100, 1).tau == 0);
  const Lattice2D lat(16, 5);
  const auto out = run_independence_2d(m, 5, lat.at(2, 3), lat.at(2, 3), 100, 1);
  CHECK(*out.tau == 0);
  CHECK(*out.tau_r == 0);
  CHECK(*out.tau_rp == 0);
}

TEST_CASE("coordinate-wise coupling is dominated by the refresh time") {
  const ModelParams m(64, 0.7);
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto out = run_coordinatewise(m, HypercubeState::ones(64), HypercubeState::zeros(64), 20000, s);
    REQUIRE(out.tau);
    REQUIRE(out.all_refreshed);
    CHECK(*out.tau <= *out.all_refreshed);
    CHECK(out.permanent);
  }
}

TEST_CASE("coordinate-wise non-coalescence sits below n gamma^t") {
  const ModelParams m(64, 1.0);
  std::vector<Step> ts;
  for (double alpha : {0.0, 1.0, 2.0}) ts.push_back(static_cast<Step>(predicted_cutoff(m) + alpha * 64));
  const auto tails = estimate_coordinatewise_tail(m, HypercubeState::ones(64), HypercubeState::zeros(64),
                                                  ts, 10000, 3);
  for (const auto& e : tails) CHECK(e.p_hat <= coupon_moments(m, e.t).mean + 3 * e.se);
}

TEST_CASE("coordinate-wise marginals follow the metropolis row") {
  const int n = 4;
  const long steps = 100000;
  const ModelParams m(n, 0.5);
  // Pair each x with its complement so the coupled partner differs.
  for (std::uint64_t x = 0; x < (1u << n); ++x) {
    const auto xs = HypercubeState::decode(n, x);
    const auto ys = HypercubeState::decode(n, x ^ 0xF);
    std::map<std::uint64_t, long> cx, cy;
    Engine eng(1000 + x);
    for (long s = 0; s < steps; ++s) {
      CoordinatewiseCoupling c(m, xs, ys);
      c.step(eng);
      ++cx[c.x().encode()];
      ++cy[c.y().encode()];
    }
    for (const auto& [state, counts] : {std::pair{xs, cx}, std::pair{ys, cy}}) {
      std::vector<double> obs, probs;
      for (const auto& e : metropolis_row(m, state)) {
        const double f = static_cast<double>(counts.count(e.to.encode()) ? counts.at(e.to.encode()) : 0);
        CHECK(std::abs(f / steps - e.prob) <= 4 * std::sqrt(e.prob * (1 - e.prob) / steps));
        obs.push_back(f);
        probs.push_back(e.prob);
      }
      CHECK(oracle::chi_square(obs, probs, steps).accept());
    }
  }
}

TEST_CASE("independence coupling marginal matches exact evolution") {
  const ModelParams m(8, 1.0);
  const int k = 3;
  const Lattice2D lat(8, k);
  const State2D z0 = lat.origin();
  const State2D y0 = lat.at(3, 4);
  const long reps = 100000;
  const Step t = 20;
  Grid2 counts_z = Grid2::Zero(lat.rows(), lat.cols());
  Grid2 counts_y = Grid2::Zero(lat.rows(), lat.cols());
  for (long r = 0; r < reps; ++r) {
    State2D zf, yf;
    run_independence_2d(m, k, z0, y0, t, splitmix64(static_cast<std::uint64_t>(r) + 17),
                        StopRule::run_to_cap, &zf, &yf);
    counts_z(lat.row_of(zf), lat.col_of(zf)) += 1;
    counts_y(lat.row_of(yf), lat.col_of(yf)) += 1;
  }
  const auto kern = kernel_2d<double>(m, k);
  for (const auto& [counts, start] : {std::pair{counts_z, z0}, std::pair{counts_y, y0}}) {
    const auto exact = evolve(kern, point_mass_2d<double>(8, k, start), t);
    std::vector<double> obs(counts.data(), counts.data() + counts.size());
    std::vector<double> probs(exact.data(), exact.data() + exact.size());
    CHECK(oracle::chi_square(obs, probs, static_cast<double>(reps)).accept());
  }
}

TEST_CASE("locked coordinates keep each marginal's one-step law") {
  const ModelParams m(10, 0.6);
  const int k = 4;
  const Lattice2D lat(10, k);
  const auto kern = kernel_2d<double>(m, k);
  // r agrees, rp differs: the r-moves go through the second coin.
  const State2D z = lat.at(2, 1), y = lat.at(2, 5);
  const long reps = 200000;
  std::map<std::pair<int, int>, long> seen;
  Engine eng(31337);
  for (long r = 0; r < reps; ++r) {
    IndependenceCoupling2D c(m, k, z, y);
    c.step(eng);
    ++seen[{c.z().r, c.z().rp}];
    CHECK(c.r_agree());
  }
  const auto s = kern.row(z);
  const std::vector<std::pair<State2D, double>> cells = {
      {{z.r, z.rp + 2}, s.rp_up}, {{z.r, z.rp - 2}, s.rp_down}, {{z.r - 2, z.rp}, s.r_down},
      {{z.r + 2, z.rp}, s.r_up},  {z, s.stay}};
  std::vector<double> obs, probs;
  for (const auto& [to, p] : cells) {
    obs.push_back(static_cast<double>(seen[{to.r, to.rp}]));
    probs.push_back(p);
  }
  CHECK(oracle::chi_square(obs, probs, static_cast<double>(reps)).accept());
}

TEST_CASE("independence coupling trajectories") {
  const ModelParams m(40, 1.0);
  const int k = 20;
  const Lattice2D lat(40, k);
  for (std::uint64_t s = 0; s < 300; ++s) {
    const State2D z0 = lat.at(static_cast<int>(s % 21), 0);
    const State2D y0 = lat.at(static_cast<int>((s * 7) % 21), 20);
    const auto out = run_independence_2d(m, k, z0, y0, 200000, s, StopRule::run_to_cap);
    CHECK(out.sign_preserved);
    CHECK(out.permanent);
    REQUIRE(out.tau);
    CHECK(*out.tau == std::max(*out.tau_r, *out.tau_rp));
  }
  CHECK_THROWS_AS(run_independence_2d(m, k, {1, 20}, lat.origin(), 10, 1), DomainError);
}

TEST_CASE("coupling tail estimates") {
  const ModelParams m(64, 1.0);
  const int k = 32;
  const Lattice2D lat(64, k);
  const auto tstar = static_cast<Step>(std::llround(predicted_cutoff(m)));
  const auto tails = estimate_coupling_tail(m, k, {lat.origin(), lat.at(k, 32)},
                                            {tstar + 64, tstar + 4 * 64, tstar + 16 * 64}, 4000, 8);
  for (std::size_t i = 1; i < tails.size(); ++i) CHECK(tails[i].p_hat <= tails[i - 1].p_hat);
  for (const auto& e : tails) {
    CHECK(e.p_hat >= 0.0);
    CHECK(e.p_hat <= 1.0);
    CHECK(e.se == doctest::Approx(std::sqrt(e.p_hat * (1 - e.p_hat) / e.replicates)));
  }
  const auto single = estimate_coupling_tail(m, k, {lat.origin(), lat.at(k, 32)}, {tstar}, 1, 8);
  CHECK((single[0].p_hat == 0.0 || single[0].p_hat == 1.0));
  CHECK_THROWS_AS(estimate_coupling_tail(m, k, {lat.origin(), lat.origin()}, {tstar}, 0, 8), DomainError);
}

TEST_CASE("coupling inequality against exact distances") {
  const ModelParams m(64, 1.0);
  const Step t = static_cast<Step>(std::llround(predicted_cutoff(m)));
  for (int k : {0, 16, 32, 64}) {
    const Lattice2D lat(64, k);
    const auto tail = estimate_coupling_tail(m, k, {lat.origin(), std::nullopt}, {t}, 4000, 11);
    const double exact = distance_profile(m, k, {t}).d[0];
    CHECK(tail[0].p_hat + 3 * tail[0].se >= exact);
  }
}

TEST_CASE("runs are reproducible") {
  const ModelParams m(32, 0.5);
  const Lattice2D lat(32, 10);
  const auto a = estimate_coupling_tail(m, 10, {lat.origin(), lat.at(10, 22)}, {100, 400}, 500, 5);
  const auto b = estimate_coupling_tail(m, 10, {lat.origin(), lat.at(10, 22)}, {100, 400}, 500, 5);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].p_hat == b[i].p_hat);
  const auto x = run_coordinatewise(m, HypercubeState::ones(32), HypercubeState::zeros(32), 5000, 9);
  const auto y = run_coordinatewise(m, HypercubeState::ones(32), HypercubeState::zeros(32), 5000, 9);
  CHECK(x.tau == y.tau);
  CHECK(x.all_refreshed == y.all_refreshed);
}

TEST_CASE("coupon process") {
  const ModelParams m(100, 0.5);
  const auto zero = simulate_coupon_counts(m, 0, 50, 1);
  for (int c : zero) CHECK(c == 100);
  const auto mom = simulate_coupon(m, 500, 10000, 2024);
  const auto exact = coupon_moments(m, 500);
  CHECK(std::abs(mom.mean - exact.mean) <= 3 * mom.mean_se);
  CHECK(mom.variance <= exact.variance_bound + 3 * mom.variance_se);
}

TEST_CASE("burn-in window") {
  const ModelParams m(200, 1.0);
  const auto chk = burn_in_check(m, HypercubeState::ones(200), 4.0, 0.05, 2000, 6);
  CHECK(chk.steps == 800);
  CHECK(chk.outside <= chk.bound + 3 * chk.se);
}
