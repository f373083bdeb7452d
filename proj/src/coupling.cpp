#include "hcmix/coupling.hpp"

#include "hcmix/bounds.hpp"
#include "hcmix/exact_mixing.hpp"
#include "hcmix/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace hcmix {

namespace {

void require_half(const ModelParams& m, const char* who) {
  require(m.is_half_lazy(), std::string(who) + ": couplings are defined for the lazy(1/2) chain");
}

std::vector<TailEstimate> tails_from(const std::vector<std::optional<Step>>& taus,
                                     const std::vector<Step>& thresholds, std::uint64_t seed) {
  std::vector<TailEstimate> out;
  const auto reps = static_cast<long>(taus.size());
  for (Step t : thresholds) {
    long above = 0;
    for (const auto& tau : taus) above += (!tau || *tau > t);
    TailEstimate est;
    est.t = t;
    est.replicates = reps;
    est.seed = seed;
    est.p_hat = static_cast<double>(above) / reps;
    est.se = std::sqrt(est.p_hat * (1.0 - est.p_hat) / reps);
    out.push_back(est);
  }
  return out;
}

void check_thresholds(const std::vector<Step>& thresholds, long replicates) {
  require(replicates >= 1, "coupling tail: replicates must be >= 1");
  require(!thresholds.empty(), "coupling tail: no thresholds");
  for (Step t : thresholds) require(t >= 0, "coupling tail: negative threshold");
}

int binomial_draw(int trials, double p, Engine& eng) {
  int s = 0;
  for (int i = 0; i < trials; ++i) s += uniform01(eng) < p;
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------

CoordinatewiseCoupling::CoordinatewiseCoupling(const ModelParams& m, HypercubeState x,
                                               HypercubeState y)
    : model_(m), x_(std::move(x)), y_(std::move(y)) {
  require_half(m, "CoordinatewiseCoupling");
  require(x_.size() == m.n && y_.size() == m.n,
          "CoordinatewiseCoupling: state dimension differs from model n");
  refreshed_.assign(m.n, 0);
  unrefreshed_ = m.n;
  disagree_ = hamming(x_, y_);
}

void CoordinatewiseCoupling::step(Engine& eng) {
  const auto i = static_cast<int>(uniform_index(eng, static_cast<std::uint64_t>(model_.n)));
  const double u = uniform01(eng);
  const bool before = x_[i] != y_[i];
  x_[i] = band_update(x_[i], model_.theta, u);
  y_[i] = band_update(y_[i], model_.theta, u);
  disagree_ += static_cast<int>(x_[i] != y_[i]) - static_cast<int>(before);
  if (!refreshed_[i] && refreshes(model_.theta, u)) {
    refreshed_[i] = 1;
    --unrefreshed_;
  }
  ++time_;
}

CouplingOutcome run_coordinatewise(const ModelParams& m, const HypercubeState& x,
                                   const HypercubeState& y, Step t_cap, std::uint64_t seed,
                                   StopRule stop) {
  require(t_cap >= 0, "run_coordinatewise: t_cap must be >= 0");
  CoordinatewiseCoupling c(m, x, y);
  Engine eng(seed);
  CouplingOutcome out;
  out.capped_at = t_cap;
  auto observe = [&] {
    if (c.disagreements() == 0) {
      if (!out.tau) out.tau = c.time();
    } else if (out.tau) {
      out.permanent = false;
    }
    if (!out.all_refreshed && c.unrefreshed() == 0) out.all_refreshed = c.time();
  };
  observe();
  while (c.time() < t_cap) {
    if (stop == StopRule::at_coalescence && out.tau && out.all_refreshed) break;
    c.step(eng);
    observe();
  }
  return out;
}

// ---------------------------------------------------------------------------

IndependenceCoupling2D::IndependenceCoupling2D(const ModelParams& m, int k, State2D z0, State2D y0)
    : kernel_(kernel_2d<double>(m, k)), lattice_(m.n, k) {
  require_half(m, "IndependenceCoupling2D");
  lattice_.check(z0, "IndependenceCoupling2D (z0)");
  lattice_.check(y0, "IndependenceCoupling2D (y0)");
  zi_ = lattice_.row_of(z0);
  zj_ = lattice_.col_of(z0);
  yi_ = lattice_.row_of(y0);
  yj_ = lattice_.col_of(y0);
}

IndependenceCoupling2D::Move IndependenceCoupling2D::propose(int i, int j, double u,
                                                             double scale) const {
  double acc = scale * kernel_.r_up[i];
  if (u < acc) return Move::r_up;
  acc += scale * kernel_.r_down[i];
  if (u < acc) return Move::r_down;
  acc += scale * kernel_.rp_up[j];
  if (u < acc) return Move::rp_up;
  acc += scale * kernel_.rp_down[j];
  if (u < acc) return Move::rp_down;
  return Move::stay;
}

void IndependenceCoupling2D::step(Engine& eng) {
  ++time_;
  const bool z_moves = fair_coin(eng);
  const double u = uniform01(eng);
  // Non-lazy kernel 2P - I: off-diagonal mass doubled.
  const Move mv = z_moves ? propose(zi_, zj_, u, 2.0) : propose(yi_, yj_, u, 2.0);
  if (mv == Move::stay) return;
  const bool in_r = mv == Move::r_up || mv == Move::r_down;
  const int di = mv == Move::r_up ? 1 : mv == Move::r_down ? -1 : 0;
  const int dj = mv == Move::rp_up ? 1 : mv == Move::rp_down ? -1 : 0;
  const bool locked = in_r ? zi_ == yi_ : zj_ == yj_;
  if (locked) {
    if (!fair_coin(eng)) return;
    zi_ += di;
    yi_ += di;
    zj_ += dj;
    yj_ += dj;
  } else if (z_moves) {
    zi_ += di;
    zj_ += dj;
  } else {
    yi_ += di;
    yj_ += dj;
  }
}

CouplingOutcome run_independence_2d(const ModelParams& m, int k, State2D z0, State2D y0,
                                    Step t_cap, std::uint64_t seed, StopRule stop,
                                    State2D* z_final, State2D* y_final) {
  require(t_cap >= 0, "run_independence_2d: t_cap must be >= 0");
  IndependenceCoupling2D c(m, k, z0, y0);
  Engine eng(seed);
  CouplingOutcome out;
  out.capped_at = t_cap;
  const int sign0 = (z0.r > y0.r) - (z0.r < y0.r);
  auto observe = [&] {
    const Step now = c.time();
    if (c.r_agree()) {
      if (!out.tau_r) out.tau_r = now;
    } else {
      if (out.tau_r) out.permanent = false;
      const int s = (c.z().r > c.y().r) - (c.z().r < c.y().r);
      if (s != sign0) out.sign_preserved = false;
    }
    if (c.rp_agree()) {
      if (!out.tau_rp) out.tau_rp = now;
    } else if (out.tau_rp) {
      out.permanent = false;
    }
    if (c.coalesced()) {
      if (!out.tau) out.tau = now;
    } else if (out.tau) {
      out.permanent = false;
    }
  };
  observe();
  while (c.time() < t_cap) {
    if (stop == StopRule::at_coalescence && out.tau) break;
    c.step(eng);
    observe();
  }
  if (z_final) *z_final = c.z();
  if (y_final) *y_final = c.y();
  return out;
}

State2D sample_stationary_2d(const ModelParams& m, int k, Engine& eng) {
  const Lattice2D lat(m.n, k);
  const double p = m.p();
  return lat.at(binomial_draw(k, 1.0 - p, eng), binomial_draw(m.n - k, p, eng));
}

// ---------------------------------------------------------------------------

std::vector<TailEstimate> estimate_coupling_tail(const ModelParams& m, int k, const StartPair& start,
                                                 const std::vector<Step>& thresholds,
                                                 long replicates, std::uint64_t seed) {
  check_thresholds(thresholds, replicates);
  const Lattice2D lat(m.n, k);
  lat.check(start.z0, "estimate_coupling_tail (z0)");
  if (start.y0) lat.check(*start.y0, "estimate_coupling_tail (y0)");
  const Step cap = *std::max_element(thresholds.begin(), thresholds.end());
  const auto taus = parallel_map(static_cast<std::size_t>(replicates), [&](std::size_t r) {
    Engine eng = replicate_engine(seed, r);
    const State2D y0 = start.y0 ? *start.y0 : sample_stationary_2d(m, k, eng);
    return run_independence_2d(m, k, start.z0, y0, cap, eng()).tau;
  });
  return tails_from(taus, thresholds, seed);
}

std::vector<TailEstimate> estimate_coordinatewise_tail(const ModelParams& m,
                                                       const HypercubeState& x,
                                                       const HypercubeState& y,
                                                       const std::vector<Step>& thresholds,
                                                       long replicates, std::uint64_t seed) {
  check_thresholds(thresholds, replicates);
  const Step cap = *std::max_element(thresholds.begin(), thresholds.end());
  const auto taus = parallel_map(static_cast<std::size_t>(replicates), [&](std::size_t r) {
    Engine eng = replicate_engine(seed, r);
    CoordinatewiseCoupling c(m, x, y);
    std::optional<Step> tau;
    while (c.disagreements() != 0 && c.time() < cap) c.step(eng);
    if (c.disagreements() == 0) tau = c.time();
    return tau;
  });
  return tails_from(taus, thresholds, seed);
}

// ---------------------------------------------------------------------------

SampleMoments sample_moments(const std::vector<double>& xs) {
  SampleMoments s;
  s.replicates = static_cast<long>(xs.size());
  if (xs.empty()) return s;
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = (x - mean) * (x - mean);
    m2 += d;
    m4 += d * d;
  }
  s.mean = mean;
  if (xs.size() < 2) return s;
  s.variance = m2 / (n - 1.0);
  s.mean_se = std::sqrt(s.variance / n);
  const double mu2 = m2 / n;
  s.variance_se = std::sqrt(std::max(0.0, (m4 / n - mu2 * mu2) / n));
  return s;
}

namespace {

/// Runs the refresh process for t steps and returns the unrefreshed flags.
std::vector<std::uint8_t> refresh_flags(const ModelParams& m, Step t, Engine& eng) {
  std::vector<std::uint8_t> pending(m.n, 1);
  for (Step s = 0; s < t; ++s) {
    const auto i = uniform_index(eng, static_cast<std::uint64_t>(m.n));
    if (refreshes(m.theta, uniform01(eng))) pending[i] = 0;
  }
  return pending;
}

}  // namespace

std::vector<int> simulate_coupon_counts(const ModelParams& m, Step t, long replicates,
                                        std::uint64_t seed) {
  require_half(m, "simulate_coupon");
  require(t >= 0, "simulate_coupon: t must be >= 0");
  require(replicates >= 1, "simulate_coupon: replicates must be >= 1");
  return parallel_map(static_cast<std::size_t>(replicates), [&](std::size_t r) {
    Engine eng = replicate_engine(seed, r);
    const auto pending = refresh_flags(m, t, eng);
    return static_cast<int>(std::count(pending.begin(), pending.end(), 1));
  });
}

SampleMoments simulate_coupon(const ModelParams& m, Step t, long replicates, std::uint64_t seed) {
  const auto counts = simulate_coupon_counts(m, t, replicates, seed);
  return sample_moments(std::vector<double>(counts.begin(), counts.end()));
}

CovarianceEstimate coupon_indicator_covariance(const ModelParams& m, Step t, long replicates,
                                               std::uint64_t seed) {
  require_half(m, "coupon_indicator_covariance");
  require(t >= 0 && replicates >= 2, "coupon_indicator_covariance: need t >= 0, replicates >= 2");
  const auto flags = parallel_map(static_cast<std::size_t>(replicates), [&](std::size_t r) {
    Engine eng = replicate_engine(seed, r);
    return refresh_flags(m, t, eng);
  });
  const Eigen::Index n = m.n;
  Eigen::MatrixXd x(replicates, n);
  for (long r = 0; r < replicates; ++r)
    for (Eigen::Index j = 0; j < n; ++j) x(r, j) = flags[r][j];
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd c = x.rowwise() - mean;
  CovarianceEstimate est;
  est.cov = c.transpose() * c / static_cast<double>(replicates - 1);
  const Eigen::MatrixXd c2 = c.array().square().matrix();
  // Var of the centred products, for the standard error of each entry.
  const Eigen::MatrixXd second = c2.transpose() * c2 / static_cast<double>(replicates);
  const Eigen::MatrixXd mean_prod = c.transpose() * c / static_cast<double>(replicates);
  est.se = ((second.array() - mean_prod.array().square()).max(0.0) / static_cast<double>(replicates))
               .sqrt()
               .matrix();
  return est;
}

std::vector<int> simulate_weights(const ModelParams& m, const HypercubeState& x0, Step t,
                                  long replicates, std::uint64_t seed) {
  require_half(m, "simulate_weights");
  require(x0.size() == m.n, "simulate_weights: state dimension differs from model n");
  require(t >= 0 && replicates >= 1, "simulate_weights: need t >= 0 and replicates >= 1");
  return parallel_map(static_cast<std::size_t>(replicates), [&](std::size_t r) {
    Engine eng = replicate_engine(seed, r);
    std::vector<std::uint8_t> x = x0.bits();
    int s = x0.weight();
    for (Step step = 0; step < t; ++step) {
      const auto i = uniform_index(eng, static_cast<std::uint64_t>(m.n));
      const std::uint8_t b = band_update(x[i], m.theta, uniform01(eng));
      s += static_cast<int>(b) - static_cast<int>(x[i]);
      x[i] = b;
    }
    return s;
  });
}

BurnInCheck burn_in_check(const ModelParams& m, const HypercubeState& x0, double alpha, double delta,
                          long replicates, std::uint64_t seed) {
  require(alpha >= 0.0 && delta > 0.0, "burn_in_check: need alpha >= 0 and delta > 0");
  BurnInCheck chk;
  chk.steps = static_cast<Step>(std::llround(alpha * m.n));
  const auto weights = simulate_weights(m, x0, chk.steps, replicates, seed);
  const double np = m.n * m.p();
  const double half_width = delta * m.n;
  long outside = 0;
  for (int s : weights) outside += std::abs(s - np) > half_width;
  chk.outside = static_cast<double>(outside) / replicates;
  chk.se = std::sqrt(chk.outside * (1.0 - chk.outside) / replicates);
  const double s = half_width - std::abs(expected_location_1d(m, x0.weight(), chk.steps) - np);
  chk.bound = s > 0.0 ? std::min(1.0, 2.0 * azuma_tail(m, s)) : 1.0;
  return chk;
}

SampleMoments one_step_difference_variance(const ModelParams& m, int k, State2D z, State2D y,
                                           bool rp_coordinate, long samples, std::uint64_t seed) {
  require(samples >= 2, "one_step_difference_variance: samples must be >= 2");
  std::vector<double> diffs(static_cast<std::size_t>(samples));
  for (long s = 0; s < samples; ++s) {
    Engine eng = replicate_engine(seed, static_cast<std::uint64_t>(s));
    IndependenceCoupling2D c(m, k, z, y);
    c.step(eng);
    diffs[s] = rp_coordinate ? c.z().rp - c.y().rp : c.z().r - c.y().r;
  }
  return sample_moments(diffs);
}

}  // namespace hcmix
