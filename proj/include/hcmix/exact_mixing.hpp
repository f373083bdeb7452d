#pragma once

// Exact evolution of the lumped chains, total-variation profiles d(t),
// mixing times and the closed-form expected locations.

#include "hcmix/model.hpp"
#include "hcmix/projection.hpp"
#include "hcmix/types.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hcmix {

/// Mass bookkeeping for long evolutions: the distribution is renormalised
/// every `interval` kernel applications and the absolute drift accumulated.
struct DriftMonitor {
  Step interval = 10000;
  double abort_above = 1e-9;
  double cumulative = 0.0;
  std::vector<double> history;

  template <class Dense>
  void maybe_renormalize(Step applied, Dense& d) {
    if (applied == 0 || applied % interval != 0) return;
    const auto total = d.sum();
    const double drift = std::abs(static_cast<double>(total) - 1.0);
    cumulative += drift;
    history.push_back(drift);
    if (cumulative > abort_above)
      throw std::runtime_error("evolve: cumulative mass drift " + std::to_string(cumulative) +
                               " exceeds " + std::to_string(abort_above));
    d /= total;
  }
};

template <class Scalar>
Dist1D<Scalar> evolve(const Kernel1D<Scalar>& kern, Dist1D<Scalar> d, Step t,
                      DriftMonitor* monitor = nullptr) {
  require(t >= 0, "evolve: t must be >= 0");
  DriftMonitor local;
  DriftMonitor& mon = monitor ? *monitor : local;
  for (Step s = 1; s <= t; ++s) {
    d = apply_kernel(kern, d);
    mon.maybe_renormalize(s, d);
  }
  return d;
}

template <class Scalar>
Dist2D<Scalar> evolve(const Kernel2D<Scalar>& kern, Dist2D<Scalar> d, Step t,
                      DriftMonitor* monitor = nullptr) {
  require(t >= 0, "evolve: t must be >= 0");
  DriftMonitor local;
  DriftMonitor& mon = monitor ? *monitor : local;
  Dist2D<Scalar> next;
  for (Step s = 1; s <= t; ++s) {
    apply_kernel(kern, d, next);
    d.swap(next);
    mon.maybe_renormalize(s, d);
  }
  return d;
}

/// Half the L1 distance.
template <class A, class B>
auto tv_distance(const Eigen::DenseBase<A>& a, const Eigen::DenseBase<B>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw StateSpaceMismatch("tv_distance: state spaces differ");
  return (a.derived().array() - b.derived().array()).abs().sum() / 2;
}

// ---------------------------------------------------------------------------
// Closed forms (lazy(1/2) chain)
// ---------------------------------------------------------------------------

struct ClosedFormParams {
  double gamma;  // 1 - (1 + theta)/(2n)
  double beta;   // k (1 - theta)/(2n)
  double p;      // theta/(1 + theta)
};

ClosedFormParams closed_form_params(const ModelParams& m, int k);

/// E_k S_t = (n theta/(1+theta))(1 - gamma^t) + k gamma^t.
double expected_location_1d(const ModelParams& m, double k, Step t);

/// Expected (r, rp) after t steps from (v, v') for base weight k.
std::pair<double, double> expected_location_2d(const ModelParams& m, int k, State2D start, Step t);

/// Stationary mean (2n beta/(1+theta), 2n(theta+beta)/(1+theta)).
std::pair<double, double> stationary_location_2d(const ModelParams& m, int k);

/// gamma^u sqrt(n) at u = round(n log n/(1+theta)).
double gamma_power_check(const ModelParams& m);

/// n log n/(1 + theta), the cutoff location of the lazy chain.
double predicted_cutoff(const ModelParams& m);

template <class Scalar>
Scalar mean_1d(const Dist1D<Scalar>& d) {
  Scalar acc = Scalar(0);
  for (Eigen::Index k = 0; k < d.size(); ++k) acc += Scalar(k) * d[k];
  return acc;
}

template <class Scalar>
Scalar variance_1d(const Dist1D<Scalar>& d) {
  const Scalar mu = mean_1d(d);
  Scalar acc = Scalar(0);
  for (Eigen::Index k = 0; k < d.size(); ++k) acc += (Scalar(k) - mu) * (Scalar(k) - mu) * d[k];
  return acc;
}

/// Mean (r, rp) of a two-dimensional distribution.
template <class Scalar>
std::pair<Scalar, Scalar> mean_2d(const Dist2D<Scalar>& d) {
  const int k = static_cast<int>(d.rows()) - 1;
  Scalar er = Scalar(0), erp = Scalar(0);
  for (Eigen::Index j = 0; j < d.cols(); ++j)
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
      er += Scalar(-k + 2 * i) * d(i, j);
      erp += Scalar(k + 2 * j) * d(i, j);
    }
  return {er, erp};
}

// ---------------------------------------------------------------------------
// Profiles
// ---------------------------------------------------------------------------

struct MixingProfile {
  int n = 0;
  double theta = 1.0;
  /// Weight of the start, or -1 for a worst-start envelope.
  int start_k = -1;
  std::vector<Step> t;
  std::vector<double> d;

  std::size_t size() const { return t.size(); }
};

struct ProfileOptions {
  /// Stop once d(t) <= stop_below (the point reaching it is kept). Negative
  /// disables early stopping.
  double stop_below = -1.0;
};

/// Every step 0..t_max.
std::vector<Step> linear_grid(Step t_max, Step stride = 1);

/// Geometric spacing up to `dense_from`, then every step up to t_max.
std::vector<Step> cutoff_grid(Step dense_from, Step t_max, double ratio = 1.25);

/// Exact d(t) from a start of weight k, on the grid times (ascending).
MixingProfile distance_profile(const ModelParams& m, int start_k, const std::vector<Step>& t_grid,
                               const ProfileOptions& opts = {});

/// The default k grid: all levels for n <= 64, else {0, n/4, n/2, 3n/4, n}
/// (ceilings).
std::vector<int> default_k_grid(int n);

/// Pointwise maximum over starts in k_grid. With early stopping the
/// envelope is exact while it exceeds stop_below.
MixingProfile worst_start_profile(const ModelParams& m, const std::vector<Step>& t_grid,
                                  const std::vector<int>& k_grid, const ProfileOptions& opts = {});

struct MixingTimeResult {
  bool resolved = false;
  Step t = -1;
  Step last_t = -1;
  double last_d = 1.0;
};

/// Smallest grid t with d(t) <= eps.
MixingTimeResult mixing_time(const MixingProfile& profile, double eps);

struct WindowRow {
  int n = 0;
  double theta = 1.0;
  MixingTimeResult t_quarter;  // t_mix(0.25)
  MixingTimeResult t_tenth;    // t_mix(0.1)
  MixingTimeResult t_ninetenths;
  /// t_mix(0.1) - t_mix(0.9), meaningful only when both resolved.
  Step width = -1;
  /// t_mix(0.25) / (n log n).
  double ratio = 0.0;

  bool resolved() const { return t_quarter.resolved && t_tenth.resolved && t_ninetenths.resolved; }
};

std::vector<WindowRow> cutoff_window_stats(const std::vector<MixingProfile>& profiles);

}  // namespace hcmix
