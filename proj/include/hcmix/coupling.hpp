#pragma once

// Monte Carlo couplings: the coordinate-wise coupling of two full chains
// (shared coordinate and uniform), the alternating independence coupling of
// two copies of the two-dimensional chain with sticky coordinates, and the
// coupon-collector refresh process.

#include "hcmix/model.hpp"
#include "hcmix/projection.hpp"
#include "hcmix/random.hpp"
#include "hcmix/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace hcmix {

struct CouplingOutcome {
  /// First time the two chains agree; empty when the run hit the cap.
  std::optional<Step> tau;
  Step capped_at = 0;
  /// Two-dimensional coupling only: first agreement of each coordinate.
  std::optional<Step> tau_r;
  std::optional<Step> tau_rp;
  /// Coordinate-wise coupling only: first time every coordinate has been
  /// refreshed.
  std::optional<Step> all_refreshed;
  /// R_j = Z_j^(r) - Y_j^(r) never changed sign (2D coupling).
  bool sign_preserved = true;
  /// Agreement, once reached, was never lost.
  bool permanent = true;

  bool coalesced() const { return tau.has_value(); }
  /// tau > t, counting capped runs as not coalesced.
  bool exceeds(Step t) const { return !tau || *tau > t; }
};

enum class StopRule { at_coalescence, run_to_cap };

// ---------------------------------------------------------------------------
// Coordinate-wise coupling of the full chain
// ---------------------------------------------------------------------------

class CoordinatewiseCoupling {
 public:
  CoordinatewiseCoupling(const ModelParams& m, HypercubeState x, HypercubeState y);

  /// One shared (coordinate, uniform) update of both chains.
  void step(Engine& eng);

  const HypercubeState& x() const { return x_; }
  const HypercubeState& y() const { return y_; }
  int disagreements() const { return disagree_; }
  int unrefreshed() const { return unrefreshed_; }
  Step time() const { return time_; }

 private:
  ModelParams model_;
  HypercubeState x_, y_;
  std::vector<std::uint8_t> refreshed_;
  int disagree_ = 0;
  int unrefreshed_ = 0;
  Step time_ = 0;
};

CouplingOutcome run_coordinatewise(const ModelParams& m, const HypercubeState& x,
                                   const HypercubeState& y, Step t_cap, std::uint64_t seed,
                                   StopRule stop = StopRule::at_coalescence);

// ---------------------------------------------------------------------------
// Alternating independence coupling of the two-dimensional chain
// ---------------------------------------------------------------------------

class IndependenceCoupling2D {
 public:
  IndependenceCoupling2D(const ModelParams& m, int k, State2D z0, State2D y0);

  /// One step. Before agreement a fair coin picks which chain attempts a
  /// move of the non-lazy kernel 2P - I while the other stays. A coordinate
  /// (r or rp) on which the chains agree only moves jointly: a proposal in
  /// that coordinate is executed by both chains on a second fair coin and
  /// rejected otherwise. Once the chains agree everywhere they move together
  /// under P.
  void step(Engine& eng);

  State2D z() const { return lattice_.at(zi_, zj_); }
  State2D y() const { return lattice_.at(yi_, yj_); }
  bool r_agree() const { return zi_ == yi_; }
  bool rp_agree() const { return zj_ == yj_; }
  bool coalesced() const { return r_agree() && rp_agree(); }
  Step time() const { return time_; }
  const Kernel2D<double>& kernel() const { return kernel_; }

 private:
  enum class Move { r_up, r_down, rp_up, rp_down, stay };
  Move propose(int i, int j, double u, double scale) const;

  Kernel2D<double> kernel_;
  Lattice2D lattice_;
  int zi_, zj_, yi_, yj_;
  Step time_ = 0;
};

/// Runs the coupling from (z0, y0) for base weight k.
CouplingOutcome run_independence_2d(const ModelParams& m, int k, State2D z0, State2D y0,
                                    Step t_cap, std::uint64_t seed,
                                    StopRule stop = StopRule::at_coalescence,
                                    State2D* z_final = nullptr, State2D* y_final = nullptr);

/// Draw from the stationary law of the two-dimensional chain.
State2D sample_stationary_2d(const ModelParams& m, int k, Engine& eng);

// ---------------------------------------------------------------------------
// Tail estimates
// ---------------------------------------------------------------------------

struct TailEstimate {
  Step t = 0;
  double p_hat = 0.0;
  double se = 0.0;
  long replicates = 0;
  std::uint64_t seed = 0;
};

/// Start pair for the two-dimensional coupling; an empty `y0` draws Y_0 from
/// the stationary law in every replicate.
struct StartPair {
  State2D z0;
  std::optional<State2D> y0;
};

/// Empirical P(tau > t) per threshold with binomial standard errors.
std::vector<TailEstimate> estimate_coupling_tail(const ModelParams& m, int k, const StartPair& start,
                                                 const std::vector<Step>& thresholds,
                                                 long replicates, std::uint64_t seed);

std::vector<TailEstimate> estimate_coordinatewise_tail(const ModelParams& m,
                                                       const HypercubeState& x,
                                                       const HypercubeState& y,
                                                       const std::vector<Step>& thresholds,
                                                       long replicates, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Coupon collector, concentration and burn-in
// ---------------------------------------------------------------------------

struct SampleMoments {
  double mean = 0.0;
  double mean_se = 0.0;
  double variance = 0.0;
  double variance_se = 0.0;
  long replicates = 0;
};

SampleMoments sample_moments(const std::vector<double>& xs);

/// R_t, the number of coordinates not refreshed by time t, per replicate.
std::vector<int> simulate_coupon_counts(const ModelParams& m, Step t, long replicates,
                                        std::uint64_t seed);

/// Mean and variance of R_t over the replicates.
SampleMoments simulate_coupon(const ModelParams& m, Step t, long replicates, std::uint64_t seed);

struct CovarianceEstimate {
  Eigen::MatrixXd cov;
  Eigen::MatrixXd se;
};

/// Sample covariance of the not-refreshed indicators I_j(t).
CovarianceEstimate coupon_indicator_covariance(const ModelParams& m, Step t, long replicates,
                                               std::uint64_t seed);

/// S(X_t) of the full chain from x0, per replicate.
std::vector<int> simulate_weights(const ModelParams& m, const HypercubeState& x0, Step t,
                                  long replicates, std::uint64_t seed);

struct BurnInCheck {
  Step steps = 0;
  double outside = 0.0;  // empirical P(S_{alpha n} outside n(p +- delta))
  double se = 0.0;
  double bound = 1.0;  // Azuma-based bound on the same probability
};

/// Runs alpha n free steps from x0 and compares the frequency of leaving the
/// window n(p +- delta) with 2 exp(-(2/9) s^2 (1 - gamma^2)),
/// s = delta n - |E_x S_{alpha n} - np|.
BurnInCheck burn_in_check(const ModelParams& m, const HypercubeState& x0, double alpha, double delta,
                          long replicates, std::uint64_t seed);

/// Empirical Var(R_{j+1} | F_j) of the difference process in one coordinate
/// after one coupling step from (z, y).
SampleMoments one_step_difference_variance(const ModelParams& m, int k, State2D z, State2D y,
                                           bool rp_coordinate, long samples, std::uint64_t seed);

}  // namespace hcmix
