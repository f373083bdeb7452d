#include "doctest.h"

#include "hcmix/bounds.hpp"
#include "hcmix/coupling.hpp"
#include "hcmix/exact_mixing.hpp"

using namespace hcmix;

TEST_CASE("distinguishing bound") {
  CHECK(distinguishing_bound_from_ratio(2.0) == doctest::Approx(0.5));
  double prev = 0.0;
  for (double alpha : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    const auto rep = distinguishing_lower_bound(ModelParams(4096, 1.0), alpha);
    CHECK(rep.term("asymptotic_bound") > prev);
    prev = rep.term("asymptotic_bound");
  }
  CHECK(prev > 0.999);

  const ModelParams m(512, 1.0);
  const auto rep = distinguishing_lower_bound(m, 3.0);
  REQUIRE(rep.valid);
  CHECK(rep.t == lower_bound_time(m, 3.0));
  const auto prof = distance_profile(m, 512, {rep.t});
  CHECK(rep.value <= prof.d[0] + 1e-9);
  // r is the mean gap over the standard-deviation ceiling.
  const double gap = expected_location_1d(m, 512, rep.t) - 512 * m.p();
  CHECK(rep.term("mean_gap") == doctest::Approx(gap));
  CHECK(rep.term("r") == doctest::Approx(gap * 2 / std::sqrt(512.0)));

  const auto neg = distinguishing_lower_bound(m, 4.0);
  CHECK_FALSE(neg.valid);
  CHECK(neg.t < 0);
}

TEST_CASE("azuma tail") {
  CHECK(azuma_tail(ModelParams(10, 1.0), 3.0) == doctest::Approx(std::exp(-0.38)));
  CHECK(azuma_tail(ModelParams(10, 1.0), 3.0) == doctest::Approx(0.6839).epsilon(1e-4));
  CHECK(azuma_tail(ModelParams(10, 1.0), 1e-9) == doctest::Approx(1.0));
  CHECK_THROWS_AS(azuma_tail(ModelParams(10, 1.0), 0.0), DomainError);
  for (double s : {1.0, 2.0, 5.0}) {
    CHECK(azuma_tail(ModelParams(50, 0.5), s) > azuma_tail(ModelParams(50, 0.5), s + 1));
    CHECK(azuma_tail(ModelParams(50, 0.5), s) < azuma_tail(ModelParams(100, 0.5), s));
  }
}

TEST_CASE("azuma tail dominates simulated tails") {
  const ModelParams m(50, 0.5);
  const auto w = simulate_weights(m, HypercubeState::ones(50), 200, 10000, 77);
  const double mean = expected_location_1d(m, 50, 200);
  for (double s : {5.0, 10.0, 15.0}) {
    long above = 0;
    for (int x : w) above += x >= mean + s;
    const double p = static_cast<double>(above) / w.size();
    CHECK(p <= azuma_tail(m, s) + 3 * std::sqrt(p * (1 - p) / w.size()));
  }
}

TEST_CASE("azuma lower bound") {
  const ModelParams m(1024, 1.0);
  for (double alpha : {4.0, 9.0, 16.0}) {
    CHECK_FALSE(azuma_lower_bound(m, alpha).valid);
    const auto rep = azuma_lower_bound_at(m, 500, alpha);
    CHECK(rep.term("chebyshev_term") == doctest::Approx(std::min(1.0, m.p() * (1 - m.p()) / alpha)));
  }
  // Growing alpha then n drives the bound up.
  for (int n : {1024, 4096}) {
    double prev = -1.0;
    for (double alpha : {4.0, 9.0, 16.0}) {
      const auto rep = azuma_lower_bound(ModelParams(n, 1.0), alpha);
      if (!rep.valid) continue;
      CHECK(rep.value >= prev);
      prev = rep.value;
    }
  }
  CHECK(azuma_lower_bound(ModelParams(4096, 1.0), 4.0).value <=
        azuma_lower_bound(ModelParams(1 << 16, 1.0), 4.0).value);
  CHECK(azuma_lower_bound(ModelParams(1 << 16, 1.0), 4.0).value == doctest::Approx(1 - 0.25 / 4));

  const ModelParams h(512, 1.0);
  const auto two = azuma_lower_bound(h, 2.0);
  REQUIRE(two.valid);
  CHECK(two.value <= distance_profile(h, 512, {two.t}).d[0] + 1e-9);
  CHECK_FALSE(azuma_lower_bound(h, 4.0).valid);
}

TEST_CASE("lower bounds never exceed exact distances") {
  for (double theta : {0.5, 1.0}) {
    const ModelParams m(256, theta);
    const auto grid = linear_grid(static_cast<Step>(2 * predicted_cutoff(m)), 7);
    const auto prof = distance_profile(m, 256, grid);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const auto dist = distinguishing_lower_bound_at(m, grid[g]);
      CHECK(dist.value <= prof.d[g] + 1e-9);
      for (double alpha : {1.0, 4.0}) {
        const auto az = azuma_lower_bound_at(m, grid[g], alpha);
        CHECK(az.value <= prof.d[g] + 1e-9);
      }
    }
  }
}

TEST_CASE("coupon moments") {
  const auto c = coupon_moments(ModelParams(10, 1.0), 1);
  CHECK(c.mean == doctest::Approx(9.0));
  CHECK(c.variance_bound == doctest::Approx(0.9));
  const auto z = coupon_moments(ModelParams(10, 0.2), 0);
  CHECK(z.mean == 10.0);
  CHECK(z.variance_bound == 0.0);
  CHECK(coupon_moments(ModelParams(100, 0.5), 500).mean == 100 * std::pow(1 - 1.5 / 200, 500));
}

TEST_CASE("refresh indicators are negatively correlated") {
  const auto est = coupon_indicator_covariance(ModelParams(4, 1.0), 3, 100000, 4242);
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) CHECK(est.cov(a, b) <= 3 * est.se(a, b));
}

TEST_CASE("supermartingale tails") {
  const auto ok = supermartingale_tail(4, 2, 1, 400);
  CHECK(ok.valid);
  CHECK(ok.value == doctest::Approx(0.8));
  CHECK_FALSE(supermartingale_tail(4, 2, 1, 40).valid);

  const auto mod = supermartingale_tail_modified(2, 2, 1, 400, 8);
  CHECK(mod.valid);
  CHECK(mod.value == doctest::Approx(0.37));
  CHECK_FALSE(supermartingale_tail_modified(2, 2, 1, 400, 3).valid);

  // Optimal h recovers 2 sqrt 3 k/(sigma sqrt u), which sits below the
  // standard constant 4.
  for (double u : {100.0, 400.0, 1e4}) {
    const double sigma_sq = 0.81, k0 = 3;
    const double h = std::sqrt(u * sigma_sq / 3);
    const auto best = supermartingale_tail_modified(k0, 0.5, sigma_sq, u, h);
    CHECK(best.value == doctest::Approx(2 * std::sqrt(3.0) * k0 / std::sqrt(sigma_sq * u)));
    CHECK(best.value <= supermartingale_tail(k0, 0.5, sigma_sq, u).value);
  }
}

TEST_CASE("supermartingale bound dominates a lazy absorbed walk") {
  // Lazy +-2 walk from 6, absorbed at 0: steps +-2 w.p. 1/4 each, so
  // B = 2 and sigma^2 = 2.
  const double k0 = 6, bound_b = 2, sigma_sq = 2;
  const long reps = 10000;
  for (Step u : {Step{100}, Step{400}}) {
    long alive = 0;
    for (long r = 0; r < reps; ++r) {
      Engine eng = replicate_engine(99, r);
      long x = 6;
      for (Step s = 0; s < u && x > 0; ++s) {
        const auto c = uniform_index(eng, 4);
        if (c == 0) x += 2;
        if (c == 1) x -= 2;
      }
      alive += x > 0;
    }
    const auto rep = supermartingale_tail(k0, bound_b, sigma_sq, static_cast<double>(u));
    REQUIRE(rep.valid);
    CHECK(static_cast<double>(alive) / reps <= rep.value);
  }
}

TEST_CASE("theta_n cutoff time") {
  CHECK(theta_n_cutoff_time(100, 1.0) == doctest::Approx(230.2585).epsilon(1e-6));
  CHECK(theta_n_cutoff_time(100, 1.0) == doctest::Approx(predicted_cutoff(ModelParams(100, 1.0))));
  for (int n : {64, 1000}) {
    const double th = 1.0 / n;
    CHECK(theta_n_cutoff_time(n, th) == doctest::Approx(2.0 * n * std::log(n) / (1 + th)));
    // Continuity across the regime boundary.
    CHECK(theta_n_cutoff_time(n, th * (1 + 1e-9)) == doctest::Approx(theta_n_cutoff_time(n, th)));
    CHECK(theta_n_cutoff_time(n, th * (1 - 1e-9)) == doctest::Approx(theta_n_cutoff_time(n, th)));
  }
  CHECK_THROWS_AS(theta_n_cutoff_time(10, 0.0), DomainError);
}

TEST_CASE("variance floors") {
  const auto f = sigma_floor(ModelParams(100, 1.0), 50, 0.05, FloorCoordinate::r);
  CHECK(f.valid);
  CHECK(f.value == doctest::Approx(0.81));
  CHECK(sigma_floor(ModelParams(100, 1.0), 50, 1e-9, FloorCoordinate::rp).value ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK_FALSE(sigma_floor(ModelParams(100, 1.0), 90, 0.05, FloorCoordinate::r).valid);

  CHECK(delta_prime(0.01, 0.05) == doctest::Approx((1 - 0.1 / 0.95) / 2));
  CHECK(delta_prime(0.5, 0.05) == doctest::Approx((0.1 / 0.95) / (1 + 0.1 / 0.95) - 0.05));
  const auto v = sigma_floor(ModelParams(400, 1.0 / 20), 19, 0.05, FloorCoordinate::r, ThetaRegime::varying);
  CHECK(v.valid);
  CHECK(v.value == doctest::Approx(4 * (1 - 1.0 / 21 - 0.05) * (19.0 / 400) / 20));
}

TEST_CASE("one-step difference variance respects the floor") {
  const ModelParams m(100, 1.0);
  const auto floor = sigma_floor(m, 50, 0.05, FloorCoordinate::r);
  const Lattice2D lat(100, 50);
  for (bool rp : {false, true}) {
    const auto mom = one_step_difference_variance(m, 50, lat.at(10, 20), lat.at(30, 35), rp, 100000, 5);
    CHECK(mom.variance >= floor.value - 3 * mom.variance_se);
  }
}
