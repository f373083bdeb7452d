#pragma once

// The full hypercube chain: Metropolis and Gibbs kernels for the product
// measure pi(x) = theta^S(x) (1+theta)^-n, the three-band single-step
// simulation rule, and a brute-force full-state-space oracle for small n.

#include "hcmix/types.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace hcmix {

/// Dimension n, neighbour odds ratio theta in (0, 1] and laziness q in [0, 1].
struct ModelParams {
  int n = 1;
  double theta = 1.0;
  double q = 0.5;

  ModelParams() = default;
  ModelParams(int n_, double theta_, double q_ = 0.5) : n(n_), theta(theta_), q(q_) {
    require(n >= 1, "ModelParams: n must be >= 1, got " + std::to_string(n));
    require(theta > 0.0 && theta <= 1.0,
            "ModelParams: theta must lie in (0, 1], got " + std::to_string(theta));
    require(q >= 0.0 && q <= 1.0, "ModelParams: q must lie in [0, 1], got " + std::to_string(q));
  }

  /// Edge probability theta / (1 + theta), in (0, 1/2].
  double p() const { return theta / (1.0 + theta); }

  /// Contraction factor of the mean under the lazy(1/2) chain.
  double gamma() const { return 1.0 - (1.0 + theta) / (2.0 * n); }

  bool is_half_lazy() const { return q == 0.5; }
};

/// How theta depends on n in the varying-odds experiments.
enum class ThetaSchedule { constant, reciprocal, inverse_sqrt };

/// theta_n for the schedule; `theta` is used only by `constant`.
inline double theta_for(ThetaSchedule s, int n, double theta) {
  switch (s) {
    case ThetaSchedule::reciprocal: return 1.0 / n;
    case ThetaSchedule::inverse_sqrt: return 1.0 / std::sqrt(static_cast<double>(n));
    case ThetaSchedule::constant: break;
  }
  return theta;
}

/// A point of {0,1}^n. Integer encodings are little-endian: coordinate i is
/// bit i of the index.
class HypercubeState {
 public:
  HypercubeState() = default;
  explicit HypercubeState(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (auto b : bits_) require(b <= 1, "HypercubeState: entries must be 0 or 1");
  }

  static HypercubeState zeros(int n) { return HypercubeState(std::vector<std::uint8_t>(n, 0)); }
  static HypercubeState ones(int n) { return HypercubeState(std::vector<std::uint8_t>(n, 1)); }

  /// The state whose first k coordinates are ones.
  static HypercubeState with_weight(int n, int k) {
    require(k >= 0 && k <= n, "HypercubeState::with_weight: k outside [0, n]");
    std::vector<std::uint8_t> b(n, 0);
    for (int i = 0; i < k; ++i) b[i] = 1;
    return HypercubeState(std::move(b));
  }

  static HypercubeState decode(int n, std::uint64_t index) {
    require(n >= 1 && n <= 63, "HypercubeState::decode: n must lie in [1, 63]");
    std::vector<std::uint8_t> b(n);
    for (int i = 0; i < n; ++i) b[i] = static_cast<std::uint8_t>((index >> i) & 1u);
    return HypercubeState(std::move(b));
  }

  std::uint64_t encode() const {
    require(size() <= 63, "HypercubeState::encode: n must be <= 63");
    std::uint64_t idx = 0;
    for (int i = 0; i < size(); ++i) idx |= std::uint64_t{bits_[i]} << i;
    return idx;
  }

  int size() const { return static_cast<int>(bits_.size()); }
  int weight() const {
    int s = 0;
    for (auto b : bits_) s += b;
    return s;
  }
  std::uint8_t operator[](int i) const { return bits_[i]; }
  std::uint8_t& operator[](int i) { return bits_[i]; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  HypercubeState flipped(int i) const {
    HypercubeState out = *this;
    out.bits_[i] ^= 1u;
    return out;
  }

  friend bool operator==(const HypercubeState&, const HypercubeState&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Hamming distance.
inline int hamming(const HypercubeState& a, const HypercubeState& b) {
  require(a.size() == b.size(), "hamming: dimension mismatch");
  int d = 0;
  for (int i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

enum class KernelKind { metropolis, gibbs };

inline const char* to_string(KernelKind k) {
  return k == KernelKind::metropolis ? "metropolis" : "gibbs";
}

/// Per-coordinate flip probabilities of the lazy(q) chain: `up` for 0 -> 1,
/// `down` for 1 -> 0. The self-loop carries the rest of the row.
template <class Scalar = double>
struct FlipRates {
  Scalar up;
  Scalar down;
};

template <class Scalar = double>
FlipRates<Scalar> flip_rates(const ModelParams& m, KernelKind kind) {
  const Scalar move = Scalar(1) - Scalar(m.q);
  const Scalar n = Scalar(m.n);
  const Scalar theta = Scalar(m.theta);
  if (kind == KernelKind::metropolis) {
    // Non-lazy Metropolis: propose a uniform coordinate, accept 1 -> 0
    // always and 0 -> 1 with probability theta.
    return {move * theta / n, move / n};
  }
  const Scalar p = theta / (Scalar(1) + theta);
  return {move * p / n, move * (Scalar(1) - p) / n};
}

template <class Scalar = double>
struct RowEntry {
  HypercubeState to;
  Scalar prob;
};

template <class Scalar = double>
std::vector<RowEntry<Scalar>> kernel_row(const ModelParams& m, const HypercubeState& x,
                                         KernelKind kind) {
  require(x.size() == m.n, "kernel_row: state dimension differs from model n");
  const auto rates = flip_rates<Scalar>(m, kind);
  std::vector<RowEntry<Scalar>> row;
  row.reserve(m.n + 1);
  Scalar off = Scalar(0);
  for (int i = 0; i < m.n; ++i) {
    const Scalar pr = x[i] ? rates.down : rates.up;
    off += pr;
    row.push_back({x.flipped(i), pr});
  }
  row.push_back({x, Scalar(1) - off});
  return row;
}

/// Row P(x, .) of the lazy(q) random-walk Metropolis chain: the n neighbours
/// followed by the self-loop.
template <class Scalar = double>
std::vector<RowEntry<Scalar>> metropolis_row(const ModelParams& m, const HypercubeState& x) {
  return kernel_row<Scalar>(m, x, KernelKind::metropolis);
}

/// Row of the lazy(q) random-scan Gibbs sampler (resample one uniform
/// coordinate as Bernoulli(p)).
template <class Scalar = double>
std::vector<RowEntry<Scalar>> gibbs_row(const ModelParams& m, const HypercubeState& x) {
  return kernel_row<Scalar>(m, x, KernelKind::gibbs);
}

/// Three-band update of one coordinate: set to 1 when u <= theta/2, keep when
/// theta/2 < u <= 1/2, set to 0 when u > 1/2.
inline std::uint8_t band_update(std::uint8_t bit, double theta, double u) {
  if (u <= 0.5 * theta) return 1;
  if (u <= 0.5) return bit;
  return 0;
}

/// True when the uniform falls outside the no-move band (theta/2, 1/2].
inline bool refreshes(double theta, double u) { return u <= 0.5 * theta || u > 0.5; }

/// One step of the lazy(1/2) Metropolis chain driven by an explicit
/// coordinate (0-based) and uniform draw.
inline HypercubeState simulate_step(const ModelParams& m, HypercubeState x, int coordinate,
                                    double u) {
  require(x.size() == m.n, "simulate_step: state dimension differs from model n");
  require(coordinate >= 0 && coordinate < m.n,
          "simulate_step: coordinate " + std::to_string(coordinate) + " outside [0, n)");
  require(u >= 0.0 && u <= 1.0, "simulate_step: u outside [0, 1]");
  x[coordinate] = band_update(x[coordinate], m.theta, u);
  return x;
}

// ---------------------------------------------------------------------------
// Full-state-space oracle
// ---------------------------------------------------------------------------

inline constexpr int kMaxFullDimension = 16;

inline void require_full_size(int n, const char* who) {
  require(n >= 1 && n <= kMaxFullDimension,
          std::string(who) + ": full state space limited to n <= 16, got n = " + std::to_string(n));
}

/// Mass over {0,1}^n indexed by the little-endian encoding.
template <class Scalar = double>
using FullDist = Vector<Scalar>;

template <class Scalar = double>
FullDist<Scalar> full_point_mass(int n, std::uint64_t index) {
  require_full_size(n, "full_point_mass");
  FullDist<Scalar> d = FullDist<Scalar>::Zero(Eigen::Index{1} << n);
  require(index < static_cast<std::uint64_t>(d.size()), "full_point_mass: index out of range");
  d[static_cast<Eigen::Index>(index)] = Scalar(1);
  return d;
}

template <class Scalar = double>
FullDist<Scalar> full_stationary(const ModelParams& m) {
  require_full_size(m.n, "full_stationary");
  using std::pow;
  const Scalar theta = Scalar(m.theta);
  const Scalar norm = pow(Scalar(1) + theta, -Scalar(m.n));
  Vector<Scalar> by_weight(m.n + 1);
  for (int s = 0; s <= m.n; ++s) by_weight[s] = pow(theta, Scalar(s)) * norm;
  const Eigen::Index size = Eigen::Index{1} << m.n;
  FullDist<Scalar> d(size);
  for (Eigen::Index x = 0; x < size; ++x)
    d[x] = by_weight[std::popcount(static_cast<std::uint64_t>(x))];
  return d;
}

/// Applies the chosen kernel t times to `init` (row vector convention,
/// mu -> mu P).
template <class Scalar = double>
FullDist<Scalar> full_evolve(const ModelParams& m, FullDist<Scalar> init, Step t, KernelKind kind) {
  require_full_size(m.n, "full_evolve");
  require(t >= 0, "full_evolve: t must be >= 0");
  const Eigen::Index size = Eigen::Index{1} << m.n;
  if (init.size() != size)
    throw StateSpaceMismatch("full_evolve: distribution size differs from 2^n");
  const auto rates = flip_rates<Scalar>(m, kind);
  Vector<Scalar> self(m.n + 1);
  for (int s = 0; s <= m.n; ++s)
    self[s] = Scalar(1) - (Scalar(s) * rates.down + Scalar(m.n - s) * rates.up);

  FullDist<Scalar> next(size);
  for (Step step = 0; step < t; ++step) {
    for (Eigen::Index x = 0; x < size; ++x) {
      const auto ux = static_cast<std::uint64_t>(x);
      Scalar acc = self[std::popcount(ux)] * init[x];
      for (int i = 0; i < m.n; ++i) {
        const std::uint64_t y = ux ^ (std::uint64_t{1} << i);
        // y -> x flips coordinate i; it is a 1 -> 0 move when y has a one there.
        acc += ((y >> i) & 1u ? rates.down : rates.up) * init[static_cast<Eigen::Index>(y)];
      }
      next[x] = acc;
    }
    init.swap(next);
  }
  return init;
}

}  // namespace hcmix
