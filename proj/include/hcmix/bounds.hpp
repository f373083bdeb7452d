#pragma once

// Evaluable forms of the explicit bounds: distinguishing-statistic and
// Azuma lower bounds on d(t), coupon-collector moments, supermartingale
// hitting-time tails, the varying-theta cutoff time and the conditional
// variance floors used by the coupling argument.

#include "hcmix/model.hpp"
#include "hcmix/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace hcmix {

struct BoundReport {
  double value = 0.0;
  bool valid = false;
  std::string precondition_detail;
  /// Time the bound refers to, when it has one.
  Step t = -1;
  /// Named intermediate quantities, in evaluation order.
  std::vector<std::pair<std::string, double>> terms;

  double term(const std::string& name) const;
};

/// Slack used in the asymptotic ratio r_alpha = (1 - eps) e^{alpha(1+theta)/2}.
inline constexpr double kDefaultSlack = 0.05;
/// Default half-width of the burn-in window n(p +- delta).
inline constexpr double kDefaultDelta = 0.05;

/// round(n log n/(1+theta) - alpha n); may be negative.
Step lower_bound_time(const ModelParams& m, double alpha);

/// 1 - 4/(4 + r^2).
double distinguishing_bound_from_ratio(double r);

/// Distinguishing-statistic bound on ||P^t(1, .) - pi|| at an explicit t,
/// with r = |E_1 S_t - E_pi S| / sigma and sigma^2 <= n/(1+theta)^2.
BoundReport distinguishing_lower_bound_at(const ModelParams& m, Step t, double slack = kDefaultSlack);

/// The same bound at t = round(n log n/(1+theta) - alpha n).
BoundReport distinguishing_lower_bound(const ModelParams& m, double alpha,
                                       double slack = kDefaultSlack);

/// Azuma concentration of S_t about its mean: exp(-(2/9) s^2 (1 - gamma^2)).
double azuma_tail(const ModelParams& m, double s);

/// 1 - P_n{S_t < r} - P{Bin(n,p) >= r} with r = np + sqrt(alpha n), the first
/// probability bounded by Azuma and the second by Chebyshev.
BoundReport azuma_lower_bound_at(const ModelParams& m, Step t, double alpha);
BoundReport azuma_lower_bound(const ModelParams& m, double alpha);

struct CouponMoments {
  double mean = 0.0;
  double variance_bound = 0.0;
};

/// E R_t = n gamma^t and Var R_t <= n gamma^t (1 - gamma^t).
CouponMoments coupon_moments(const ModelParams& m, Step t);

/// P_k{tau > u} <= 4 k/(sigma sqrt u), valid when u > 12 B^2/sigma^2.
BoundReport supermartingale_tail(double k0, double bound_b, double sigma_sq, double u);

/// P_k{tau > u} <= k/h + 3 k h/(u sigma^2), valid when h >= 2B.
BoundReport supermartingale_tail_modified(double k0, double bound_b, double sigma_sq, double u,
                                          double h);

/// (2/(1+theta_n)) n min{log n, log sqrt(n/theta_n)}.
double theta_n_cutoff_time(int n, double theta_n);

enum class FloorCoordinate { r, rp };
enum class ThetaRegime { constant, varying };

/// delta' for the varying-theta rp floor, from delta'' = 2 delta/(1 - delta).
double delta_prime(double theta_n, double delta);

/// Lower bound on Var(R_{j+1} | F_j) for the coupled difference process.
/// Constant theta: 4(1-p-delta)(p-delta) theta for either coordinate.
/// Varying theta: 4 delta'(1-p-delta) theta_n (rp) and
/// 4(1-p-delta)(k/n) theta_n (r). Invalid unless |k - np| <= delta n.
BoundReport sigma_floor(const ModelParams& m, int k, double delta, FloorCoordinate coordinate,
                        ThetaRegime regime = ThetaRegime::constant);

}  // namespace hcmix
