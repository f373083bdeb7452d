#include "hcmix/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hcmix {

double BoundReport::term(const std::string& name) const {
  for (const auto& [key, v] : terms)
    if (key == name) return v;
  throw std::out_of_range("BoundReport: no term named " + name);
}

Step lower_bound_time(const ModelParams& m, double alpha) {
  const double n = m.n;
  return static_cast<Step>(std::llround(n * std::log(n) / (1.0 + m.theta) - alpha * n));
}

double distinguishing_bound_from_ratio(double r) { return 1.0 - 4.0 / (4.0 + r * r); }

BoundReport distinguishing_lower_bound_at(const ModelParams& m, Step t, double slack) {
  require(m.is_half_lazy(), "distinguishing_lower_bound: lazy(1/2) chain only");
  BoundReport rep;
  rep.t = t;
  if (t < 0) {
    rep.precondition_detail = "t = " + std::to_string(t) + " is negative";
    return rep;
  }
  const double n = m.n;
  const double gt = std::pow(m.gamma(), static_cast<double>(t));
  const double gap = n / (1.0 + m.theta) * gt;
  const double sigma = std::sqrt(n) / (1.0 + m.theta);
  const double r = gap / sigma;
  rep.value = distinguishing_bound_from_ratio(r);
  rep.valid = true;
  rep.precondition_detail = "sigma^2 <= n/(1+theta)^2; slack eps = " + std::to_string(slack);
  rep.terms = {{"gamma_t", gt}, {"mean_gap", gap}, {"sigma", sigma}, {"r", r}};
  return rep;
}

BoundReport distinguishing_lower_bound(const ModelParams& m, double alpha, double slack) {
  BoundReport rep = distinguishing_lower_bound_at(m, lower_bound_time(m, alpha), slack);
  const double r_alpha = (1.0 - slack) * std::exp(alpha * (1.0 + m.theta) / 2.0);
  rep.terms.emplace_back("alpha", alpha);
  rep.terms.emplace_back("r_alpha", r_alpha);
  rep.terms.emplace_back("asymptotic_bound", distinguishing_bound_from_ratio(r_alpha));
  return rep;
}

double azuma_tail(const ModelParams& m, double s) {
  require(s > 0.0, "azuma_tail: s must be > 0");
  const double g = m.gamma();
  return std::exp(-2.0 / 9.0 * s * s * (1.0 - g * g));
}

BoundReport azuma_lower_bound_at(const ModelParams& m, Step t, double alpha) {
  require(m.is_half_lazy(), "azuma_lower_bound: lazy(1/2) chain only");
  require(alpha > 0.0, "azuma_lower_bound: alpha must be > 0");
  BoundReport rep;
  rep.t = t;
  if (t < 0) {
    rep.precondition_detail = "t = " + std::to_string(t) + " is negative";
    return rep;
  }
  const double n = m.n;
  const double p = m.p();
  const double gt = std::pow(m.gamma(), static_cast<double>(t));
  const double threshold = n * p + std::sqrt(alpha * n);
  // E_n S_t - threshold = n (1-p) gamma^t - sqrt(alpha n).
  const double deviation = n * (1.0 - p) * gt - std::sqrt(alpha * n);
  const double concentration = deviation > 0.0 ? azuma_tail(m, deviation) : 1.0;
  const double chebyshev = std::min(1.0, p * (1.0 - p) / alpha);
  rep.value = std::max(0.0, 1.0 - concentration - chebyshev);
  rep.valid = true;
  rep.precondition_detail = deviation > 0.0 ? "threshold r = np + sqrt(alpha n)"
                                            : "vacuous: E_n S_t lies below the threshold";
  rep.terms = {{"alpha", alpha},           {"threshold", threshold}, {"deviation", deviation},
               {"azuma_term", concentration}, {"chebyshev_term", chebyshev}};
  return rep;
}

BoundReport azuma_lower_bound(const ModelParams& m, double alpha) {
  return azuma_lower_bound_at(m, lower_bound_time(m, alpha), alpha);
}

CouponMoments coupon_moments(const ModelParams& m, Step t) {
  require(t >= 0, "coupon_moments: t must be >= 0");
  const double gt = std::pow(m.gamma(), static_cast<double>(t));
  return {m.n * gt, m.n * gt * (1.0 - gt)};
}

BoundReport supermartingale_tail(double k0, double bound_b, double sigma_sq, double u) {
  require(k0 >= 0.0 && bound_b > 0.0 && sigma_sq > 0.0 && u > 0.0,
          "supermartingale_tail: need k0 >= 0, B > 0, sigma^2 > 0, u > 0");
  BoundReport rep;
  const double need = 12.0 * bound_b * bound_b / sigma_sq;
  rep.value = 4.0 * k0 / (std::sqrt(sigma_sq) * std::sqrt(u));
  rep.valid = u > need;
  rep.precondition_detail = "u > 12 B^2/sigma^2 = " + std::to_string(need);
  rep.terms = {{"u_min", need}};
  return rep;
}

BoundReport supermartingale_tail_modified(double k0, double bound_b, double sigma_sq, double u,
                                          double h) {
  require(k0 >= 0.0 && bound_b > 0.0 && sigma_sq > 0.0 && u > 0.0 && h > 0.0,
          "supermartingale_tail_modified: need k0 >= 0 and B, sigma^2, u, h > 0");
  BoundReport rep;
  rep.value = k0 / h + 3.0 * k0 * h / (u * sigma_sq);
  rep.valid = h >= 2.0 * bound_b;
  rep.precondition_detail = "h >= 2B = " + std::to_string(2.0 * bound_b);
  return rep;
}

double theta_n_cutoff_time(int n, double theta_n) {
  require(n >= 1, "theta_n_cutoff_time: n must be >= 1");
  require(theta_n > 0.0 && theta_n <= 1.0, "theta_n_cutoff_time: theta_n outside (0, 1]");
  const double nn = n;
  return 2.0 / (1.0 + theta_n) * nn * std::min(std::log(nn), 0.5 * std::log(nn / theta_n));
}

double delta_prime(double theta_n, double delta) {
  require(delta > 0.0 && delta < 1.0, "delta_prime: delta outside (0, 1)");
  const double dd = 2.0 * delta / (1.0 - delta);
  if (theta_n < dd) return (1.0 - dd) / 2.0;
  return dd / (1.0 + dd) - delta;
}

BoundReport sigma_floor(const ModelParams& m, int k, double delta, FloorCoordinate coordinate,
                        ThetaRegime regime) {
  require(delta > 0.0 && delta < 0.5, "sigma_floor: delta outside (0, 1/2)");
  require(k >= 0 && k <= m.n, "sigma_floor: k outside [0, n]");
  BoundReport rep;
  const double p = m.p();
  const double theta = m.theta;
  if (std::abs(k - m.n * p) > delta * m.n) {
    rep.precondition_detail = "k = " + std::to_string(k) + " outside the burn-in window n(p +- delta)";
    return rep;
  }
  if (regime == ThetaRegime::constant) {
    rep.value = 4.0 * (1.0 - p - delta) * (p - delta) * theta;
    rep.precondition_detail = "constant theta: 4(1-p-delta)(p-delta)theta";
  } else if (coordinate == FloorCoordinate::rp) {
    const double dp = delta_prime(theta, delta);
    rep.value = 4.0 * dp * (1.0 - p - delta) * theta;
    rep.terms = {{"delta_prime", dp}};
    rep.precondition_detail = "varying theta, rp: 4 delta'(1-p-delta)theta_n";
  } else {
    rep.value = 4.0 * (1.0 - p - delta) * (static_cast<double>(k) / m.n) * theta;
    rep.precondition_detail = "varying theta, r: 4(1-p-delta)(k/n)theta_n";
  }
  rep.valid = rep.value > 0.0;
  if (!rep.valid) rep.precondition_detail += " is not positive";
  return rep;
}

}  // namespace hcmix
