#pragma once

// Lumped chains. S(X_t) is a birth-death chain on {0..n}; for a base point x
// of weight k, Z_t = (S(X_t), d(x, X_t)) is a two-dimensional birth-death
// chain. Internally Z is stored in the (r, rp) = (l' - l, l' + l)
// parametrization on the rectangle r in {-k, -k+2, .., k},
// rp in {k, k+2, .., 2n-k}, with array indices r = -k + 2i, rp = k + 2j.

#include "hcmix/model.hpp"
#include "hcmix/types.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace hcmix {

/// Sizes of G = {x=0,z=0}, N = {x=0,z=1}, E = {x=1,z=0}, F = {x=1,z=1}.
struct OverlapCounts {
  int g = 0;
  int nn = 0;
  int e = 0;
  int f = 0;
  friend bool operator==(const OverlapCounts&, const OverlapCounts&) = default;
};

/// Counts for S(x) = k, S(z) = l, d(x, z) = lp. Throws DomainError when the
/// triple is not realisable for this n.
inline OverlapCounts overlap_counts(int n, int k, int l, int lp) {
  require(n >= 1 && k >= 0 && k <= n, "overlap_counts: k outside [0, n]");
  require(((l + lp + k) & 1) == 0, "overlap_counts: l, l'-k, l'+k must share parity");
  OverlapCounts c;
  c.g = n - (l + lp + k) / 2;
  c.nn = (l + lp - k) / 2;
  c.e = (lp + k - l) / 2;
  c.f = (l - (lp - k)) / 2;
  require(c.g >= 0 && c.nn >= 0 && c.e >= 0 && c.f >= 0,
          "overlap_counts: (k, l, l') = (" + std::to_string(k) + ", " + std::to_string(l) + ", " +
              std::to_string(lp) + ") is not realisable for n = " + std::to_string(n));
  return c;
}

struct LL {
  int l = 0;
  int lp = 0;
  friend bool operator==(const LL&, const LL&) = default;
};

struct State2D {
  int r = 0;
  int rp = 0;
  friend bool operator==(const State2D&, const State2D&) = default;
};

inline State2D reparametrize(LL x) { return {x.lp - x.l, x.lp + x.l}; }

inline LL unreparametrize(State2D z) {
  require(((z.r + z.rp) & 1) == 0, "unreparametrize: r + r' must be even");
  return {(z.rp - z.r) / 2, (z.rp + z.r) / 2};
}

/// Index map between (r, rp) and the dense (i, j) cell of a weight-k lattice.
struct Lattice2D {
  int n = 1;
  int k = 0;

  Lattice2D(int n_, int k_) : n(n_), k(k_) {
    require(n >= 1 && k >= 0 && k <= n, "Lattice2D: k outside [0, n]");
  }

  int rows() const { return k + 1; }
  int cols() const { return n - k + 1; }
  Eigen::Index size() const { return Eigen::Index{rows()} * cols(); }

  bool contains(State2D z) const {
    return z.r >= -k && z.r <= k && z.rp >= k && z.rp <= 2 * n - k && ((z.r + k) & 1) == 0 &&
           ((z.rp - k) & 1) == 0;
  }
  int row_of(State2D z) const { return (z.r + k) / 2; }
  int col_of(State2D z) const { return (z.rp - k) / 2; }
  State2D at(int i, int j) const { return {-k + 2 * i, k + 2 * j}; }

  /// Start of the chain projected through its own base point, Z_0 = (k, 0).
  State2D origin() const { return {-k, k}; }

  void check(State2D z, const char* who) const {
    require(contains(z), std::string(who) + ": state (" + std::to_string(z.r) + ", " +
                             std::to_string(z.rp) + ") is not on the (n=" + std::to_string(n) +
                             ", k=" + std::to_string(k) + ") lattice");
  }
};

/// All states of the weight-k lattice, r outer, rp inner.
inline std::vector<State2D> enumerate_states_2d(const ModelParams& m, int k) {
  Lattice2D lat(m.n, k);
  std::vector<State2D> out;
  out.reserve(static_cast<std::size_t>(lat.size()));
  for (int i = 0; i < lat.rows(); ++i)
    for (int j = 0; j < lat.cols(); ++j) out.push_back(lat.at(i, j));
  return out;
}

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

template <class Scalar = double>
struct Kernel1D {
  Vector<Scalar> up;    // k -> k+1
  Vector<Scalar> down;  // k -> k-1
  Vector<Scalar> stay;

  int n() const { return static_cast<int>(up.size()) - 1; }
};

/// Birth-death chain of S(X_t) for the lazy(q) Metropolis chain. At q = 1/2:
/// up (1 - k/n) theta/2, down k/(2n).
template <class Scalar = double>
Kernel1D<Scalar> kernel_1d(const ModelParams& m) {
  const int n = m.n;
  const Scalar move = Scalar(1) - Scalar(m.q);
  const Scalar theta = Scalar(m.theta);
  Kernel1D<Scalar> kern;
  kern.up.resize(n + 1);
  kern.down.resize(n + 1);
  kern.stay.resize(n + 1);
  for (int k = 0; k <= n; ++k) {
    kern.up[k] = move * Scalar(n - k) * theta / Scalar(n);
    kern.down[k] = move * Scalar(k) / Scalar(n);
    kern.stay[k] = Scalar(1) - kern.up[k] - kern.down[k];
  }
  return kern;
}

/// Five-point stencil of one state of the two-dimensional chain.
template <class Scalar = double>
struct Stencil5 {
  Scalar rp_up;    // rp + 2
  Scalar rp_down;  // rp - 2
  Scalar r_down;   // r - 2
  Scalar r_up;     // r + 2
  Scalar stay;
};

/// Two-dimensional chain for base weight k. The r-moves depend on r only and
/// the rp-moves on rp only, so they are stored as vectors; the self-loop
/// depends on both.
template <class Scalar = double>
struct Kernel2D {
  int n = 1;
  int k = 0;
  Vector<Scalar> r_up;     // size k+1, i -> i+1
  Vector<Scalar> r_down;   // size k+1, i -> i-1
  Vector<Scalar> rp_up;    // size n-k+1, j -> j+1
  Vector<Scalar> rp_down;  // size n-k+1, j -> j-1
  Grid<Scalar> stay;       // (k+1) x (n-k+1)

  Lattice2D lattice() const { return {n, k}; }

  Stencil5<Scalar> row(State2D z) const {
    const Lattice2D lat = lattice();
    lat.check(z, "Kernel2D::row");
    const int i = lat.row_of(z);
    const int j = lat.col_of(z);
    return {rp_up[j], rp_down[j], r_down[i], r_up[i], stay(i, j)};
  }
};

/// Lumped kernel in the (r, rp) parametrization. At q = 1/2:
///   rp+2: (2n - (rp + k)) theta / 4n     rp-2: (rp - k) / 4n
///   r-2:  (k + r) theta / 4n             r+2:  (k - r) / 4n
/// Other laziness levels rescale the off-diagonal mass by 2(1 - q).
template <class Scalar = double>
Kernel2D<Scalar> kernel_2d(const ModelParams& m, int k) {
  const Lattice2D lat(m.n, k);
  const Scalar move = Scalar(1) - Scalar(m.q);
  const Scalar theta = Scalar(m.theta);
  const Scalar n = Scalar(m.n);
  Kernel2D<Scalar> kern;
  kern.n = m.n;
  kern.k = k;
  kern.r_up.resize(lat.rows());
  kern.r_down.resize(lat.rows());
  for (int i = 0; i < lat.rows(); ++i) {
    kern.r_up[i] = move * Scalar(k - i) / n;
    kern.r_down[i] = move * Scalar(i) * theta / n;
  }
  kern.rp_up.resize(lat.cols());
  kern.rp_down.resize(lat.cols());
  for (int j = 0; j < lat.cols(); ++j) {
    kern.rp_up[j] = move * Scalar(m.n - k - j) * theta / n;
    kern.rp_down[j] = move * Scalar(j) / n;
  }
  kern.stay.resize(lat.rows(), lat.cols());
  for (int j = 0; j < lat.cols(); ++j)
    for (int i = 0; i < lat.rows(); ++i)
      kern.stay(i, j) = Scalar(1) - (kern.r_up[i] + kern.r_down[i] + kern.rp_up[j] + kern.rp_down[j]);
  return kern;
}

/// The same row in the (l, l') parametrization, keyed by the target (h, h').
template <class Scalar = double>
struct MoveLL {
  LL to;
  Scalar prob;
};

template <class Scalar = double>
std::vector<MoveLL<Scalar>> kernel_2d_row_ll(const Kernel2D<Scalar>& kern, LL from) {
  const State2D z = reparametrize(from);
  const auto s = kern.row(z);
  return {
      {{from.l + 1, from.lp + 1}, s.rp_up},
      {{from.l - 1, from.lp - 1}, s.rp_down},
      {{from.l + 1, from.lp - 1}, s.r_down},
      {{from.l - 1, from.lp + 1}, s.r_up},
      {from, s.stay},
  };
}

// ---------------------------------------------------------------------------
// Distributions
// ---------------------------------------------------------------------------

template <class Scalar = double>
using Dist1D = Vector<Scalar>;

/// Mass over the weight-k lattice, shape (k+1) x (n-k+1).
template <class Scalar = double>
using Dist2D = Grid<Scalar>;

/// Binomial(n, p) masses from accumulated log-factorials, renormalised.
template <class Scalar = double>
Vector<Scalar> binomial_pmf(int n, Scalar p) {
  require(n >= 0, "binomial_pmf: n must be >= 0");
  using std::exp;
  using std::lgamma;
  using std::log;
  using std::log1p;
  Vector<Scalar> out(n + 1);
  if (p <= Scalar(0) || p >= Scalar(1)) {
    out.setZero();
    out[p <= Scalar(0) ? 0 : n] = Scalar(1);
    return out;
  }
  const Scalar lp = log(p);
  const Scalar lq = log1p(-p);
  const Scalar lgn = lgamma(Scalar(n + 1));
  for (int k = 0; k <= n; ++k)
    out[k] = exp(lgn - lgamma(Scalar(k + 1)) - lgamma(Scalar(n - k + 1)) + Scalar(k) * lp +
                 Scalar(n - k) * lq);
  return out / out.sum();
}

template <class Scalar = double>
Dist1D<Scalar> stationary_1d(const ModelParams& m) {
  const Scalar theta = Scalar(m.theta);
  return binomial_pmf<Scalar>(m.n, theta / (Scalar(1) + theta));
}

/// Pushforward of pi: r = 2E - k with E ~ Bin(k, 1-p) and rp = 2N + k with
/// N ~ Bin(n-k, p), independent.
template <class Scalar = double>
Dist2D<Scalar> stationary_2d(const ModelParams& m, int k) {
  const Lattice2D lat(m.n, k);
  const Scalar theta = Scalar(m.theta);
  const Scalar p = theta / (Scalar(1) + theta);
  const Vector<Scalar> e = binomial_pmf<Scalar>(k, Scalar(1) - p);
  const Vector<Scalar> nn = binomial_pmf<Scalar>(m.n - k, p);
  return (e * nn.transpose()).array();
}

template <class Scalar = double>
Dist1D<Scalar> point_mass_1d(int n, int k) {
  require(k >= 0 && k <= n, "point_mass_1d: level outside [0, n]");
  Dist1D<Scalar> d = Dist1D<Scalar>::Zero(n + 1);
  d[k] = Scalar(1);
  return d;
}

template <class Scalar = double>
Dist2D<Scalar> point_mass_2d(int n, int k, State2D z) {
  const Lattice2D lat(n, k);
  lat.check(z, "point_mass_2d");
  Dist2D<Scalar> d = Dist2D<Scalar>::Zero(lat.rows(), lat.cols());
  d(lat.row_of(z), lat.col_of(z)) = Scalar(1);
  return d;
}

/// Distribution of S = l = k + j - i under a two-dimensional distribution.
template <class Scalar = double>
Dist1D<Scalar> s_marginal(const Dist2D<Scalar>& d) {
  const int k = static_cast<int>(d.rows()) - 1;
  const int n = static_cast<int>(d.rows() + d.cols()) - 2;
  Dist1D<Scalar> out = Dist1D<Scalar>::Zero(n + 1);
  for (Eigen::Index j = 0; j < d.cols(); ++j)
    for (Eigen::Index i = 0; i < d.rows(); ++i) out[k + j - i] += d(i, j);
  return out;
}

/// Sums full-space mass over the level sets {z : Z_x(z) = (l, l')}.
template <class Scalar = double>
Dist2D<Scalar> lumped_pushforward(const FullDist<Scalar>& full, const HypercubeState& base) {
  const int n = base.size();
  require_full_size(n, "lumped_pushforward");
  if (full.size() != (Eigen::Index{1} << n))
    throw StateSpaceMismatch("lumped_pushforward: distribution size differs from 2^n");
  const int k = base.weight();
  const Lattice2D lat(n, k);
  const std::uint64_t x = base.encode();
  Dist2D<Scalar> out = Dist2D<Scalar>::Zero(lat.rows(), lat.cols());
  for (Eigen::Index z = 0; z < full.size(); ++z) {
    const auto uz = static_cast<std::uint64_t>(z);
    const State2D s = reparametrize({std::popcount(uz), std::popcount(uz ^ x)});
    out(lat.row_of(s), lat.col_of(s)) += full[z];
  }
  return out;
}

/// One application mu -> mu K of the birth-death kernel.
template <class Scalar>
Dist1D<Scalar> apply_kernel(const Kernel1D<Scalar>& kern, const Dist1D<Scalar>& d) {
  const Eigen::Index n = kern.up.size() - 1;
  if (d.size() != n + 1) throw StateSpaceMismatch("apply_kernel: 1D size mismatch");
  Dist1D<Scalar> out = kern.stay.cwiseProduct(d);
  if (n > 0) {
    out.tail(n) += kern.up.head(n).cwiseProduct(d.head(n));
    out.head(n) += kern.down.tail(n).cwiseProduct(d.tail(n));
  }
  return out;
}

/// One application mu -> mu K of the five-point kernel. Writes into `out`.
template <class Scalar>
void apply_kernel(const Kernel2D<Scalar>& kern, const Dist2D<Scalar>& d, Dist2D<Scalar>& out) {
  const Eigen::Index rows = kern.stay.rows();
  const Eigen::Index cols = kern.stay.cols();
  if (d.rows() != rows || d.cols() != cols)
    throw StateSpaceMismatch("apply_kernel: 2D lattice mismatch");
  out = kern.stay * d;
  if (rows > 1) {
    const Eigen::Index m = rows - 1;
    out.bottomRows(m) += d.topRows(m).colwise() * kern.r_up.head(m).array();
    out.topRows(m) += d.bottomRows(m).colwise() * kern.r_down.tail(m).array();
  }
  if (cols > 1) {
    const Eigen::Index m = cols - 1;
    out.rightCols(m) += d.leftCols(m).rowwise() * kern.rp_up.head(m).array().transpose();
    out.leftCols(m) += d.rightCols(m).rowwise() * kern.rp_down.tail(m).array().transpose();
  }
}

template <class Scalar>
Dist2D<Scalar> apply_kernel(const Kernel2D<Scalar>& kern, const Dist2D<Scalar>& d) {
  Dist2D<Scalar> out;
  apply_kernel(kern, d, out);
  return out;
}

}  // namespace hcmix
