#pragma once

// Propagators of the repulsive delta-Bose gas on the half-line (hard wall at
// 0, sum over B_N) and on the line (sum over S_N), evaluated at damped time
// by tensor trapezoid quadrature over real momenta. Residual operators insert
// exact derivative and energy factors into the integrand.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include "halfline/contour_quad.hpp"
#include "halfline/errors.hpp"
#include "halfline/scattering.hpp"
#include "halfline/signed_perm.hpp"

namespace halfline {

inline constexpr int kMaxBoseParticles = 4;

/// Strictly increasing real positions.
class RealConfig {
public:
  RealConfig(std::vector<double> positions) : x_(std::move(positions)) {  // NOLINT: implicit by design
    if (x_.empty()) throw InvalidArgument("configuration needs at least one particle");
    for (double v : x_)
      if (!std::isfinite(v)) throw InvalidArgument("positions must be finite");
    for (std::size_t i = 1; i < x_.size(); ++i)
      if (!(x_[i] > x_[i - 1])) throw InvalidArgument("positions must be strictly increasing");
  }

  int size() const noexcept { return static_cast<int>(x_.size()); }
  std::span<const double> positions() const noexcept { return x_; }
  double operator[](std::size_t i) const { return x_.at(i); }
  bool on_halfline() const noexcept { return x_.front() > 0.0; }

private:
  std::vector<double> x_;
};

/// Complex time with Im t <= -delta_min, so |e^{-i t k^2}| = e^{Im(t) k^2}.
struct DampedTime {
  cplx t;

  explicit DampedTime(cplx value, double delta_min = 1e-3) : t(value) {
    if (!std::isfinite(t.real()) || !std::isfinite(t.imag())) throw InvalidArgument("time must be finite");
    if (!(t.imag() <= -delta_min)) throw InvalidArgument("damped time needs Im t <= -delta_min");
  }

  /// t = -i tau.
  static DampedTime imaginary(double tau) { return DampedTime(cplx(0.0, -tau)); }

  double damping() const noexcept { return -t.imag(); }
};

struct BoseEvalReport {
  cplx value;
  double error_estimate;
  long points_used;
  long term_count;
};

/// Free heat kernel (4 pi tau)^{-1/2} exp(-z^2/(4 tau)).
inline double heat_kernel(double z, double tau) {
  if (!(tau > 0.0)) throw InvalidArgument("heat kernel needs tau > 0");
  return std::exp(-z * z / (4.0 * tau)) / std::sqrt(4.0 * std::numbers::pi * tau);
}

/// Dirichlet kernel on the half-line by images.
inline double image_kernel(double x, double y, double tau) { return heat_kernel(x - y, tau) - heat_kernel(x + y, tau); }

/// One term of a linear combination of the propagator with some entries
/// differentiated: each x_j carries a derivative order (0, 1 or 2), and
/// `energy` multiplies the integrand by sum_a eps(k_a) (that is, i d/dt).
struct BoseTarget {
  std::vector<double> x;
  std::vector<int> derivs;
  cplx coef = 1.0;
  bool energy = false;
};

namespace detail {

/// Line cutoff from the Gaussian decay bound.
inline double bose_cutoff(std::span<const double> x, std::span<const double> y, const DampedTime& t, double tol) {
  double reach = 0.0;
  for (double v : x) reach = std::max(reach, std::abs(v));
  for (double v : y) reach = std::max(reach, std::abs(v));
  const double d = t.damping();
  return std::sqrt(std::log(1.0 / tol) / d) + reach / (2.0 * d);
}

class BoseBetheIntegrand {
public:
  BoseBetheIntegrand(std::span<const double> y, std::vector<BoseTarget> targets, DampedTime t, BoseParams params,
                     Group group)
      : y_(y.begin(), y.end()), targets_(std::move(targets)), t_(t), params_(params), group_(group),
        n_(static_cast<int>(y.size())) {
    if (n_ < 1 || n_ > kMaxBoseParticles) throw SizeLimitError("exact Bose evaluator supports 1 <= N <= 4");
    for (auto& tg : targets_) {
      if (static_cast<int>(tg.x.size()) != n_) throw InvalidArgument("target arity must equal N");
      if (tg.derivs.empty()) tg.derivs.assign(static_cast<std::size_t>(n_), 0);
      if (static_cast<int>(tg.derivs.size()) != n_) throw InvalidArgument("derivative orders must have N entries");
    }
  }

  long term_count() const {
    long f = 1;
    for (int i = 2; i <= n_; ++i) f *= i;
    return group_ == Group::SignedB ? (1L << n_) * f : f;
  }

  cplx level(const LineGrid& grid, int threads) {
    prepare(grid);
    const int n = n_;
    const std::size_t mp = nodes_.size();
    return tensor_sum<cplx>(
        n, static_cast<int>(mp),
        [&, n, mp](std::span<const int> idx) {
          cplx common = 1.0;
          cplx energy = 0.0;
          for (int a = 0; a < n; ++a) {
            const std::size_t m = static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
            common *= common_[static_cast<std::size_t>(a) * mp + m];
            energy += energy_[m];
          }
          std::array<std::array<cplx, 2 * kMaxBoseParticles + 1>, 2 * kMaxBoseParticles + 1> pair{};
          for (int s = -n; s <= n; ++s) {
            if (s == 0) continue;
            const std::size_t ma = static_cast<std::size_t>(idx[static_cast<std::size_t>(std::abs(s) - 1)]);
            for (int u = -n; u <= n; ++u) {
              if (u == 0 || std::abs(u) == std::abs(s)) continue;
              const std::size_t mb = static_cast<std::size_t>(idx[static_cast<std::size_t>(std::abs(u) - 1)]);
              cplx f = 1.0;
              if (s > u) f *= spair_[table(s < 0, u < 0)][ma * mp + mb];
              if (-s > u) f *= spair_[table(s > 0, u < 0)][ma * mp + mb];
              pair[static_cast<std::size_t>(s + n)][static_cast<std::size_t>(u + n)] = f;
            }
          }
          cplx acc = 0.0;
          for (std::size_t tg = 0; tg < targets_.size(); ++tg) {
            const cplx sum = factorized_group_sum<cplx>(
                n, group_,
                [&](int pos, int v) {
                  const std::size_t m = static_cast<std::size_t>(idx[static_cast<std::size_t>(std::abs(v) - 1)]);
                  return pos_[pos_index(tg, static_cast<std::size_t>(pos - 1), v < 0) * mp + m];
                },
                [&](int s, int u) { return pair[static_cast<std::size_t>(s + n)][static_cast<std::size_t>(u + n)]; });
            const auto& target = targets_[tg];
            acc += target.coef * (target.energy ? energy * sum : sum);
          }
          return common * acc;
        },
        threads);
  }

private:
  static std::size_t table(bool neg_s, bool neg_u) { return (neg_s ? 2u : 0u) + (neg_u ? 1u : 0u); }

  std::size_t pos_index(std::size_t tg, std::size_t pos, bool negative) const {
    return (tg * static_cast<std::size_t>(n_) + pos) * 2 + (negative ? 1 : 0);
  }

  void prepare(const LineGrid& grid) {
    nodes_ = line_nodes(grid);
    const std::size_t mp = nodes_.size();
    const std::size_t n = static_cast<std::size_t>(n_);
    const cplx i{0.0, 1.0};

    common_.assign(n * mp, 0.0);
    energy_.assign(mp, 0.0);
    for (std::size_t m = 0; m < mp; ++m) {
      const double k = nodes_[m].node;
      energy_[m] = eps_bose(k);
      const cplx decay = nodes_[m].weight * std::exp(-i * t_.t * eps_bose(k));
      for (std::size_t a = 0; a < n; ++a) common_[a * mp + m] = decay * std::exp(-i * k * y_[a]);
    }

    pos_.assign(targets_.size() * n * 2 * mp, 0.0);
    for (std::size_t tg = 0; tg < targets_.size(); ++tg) {
      for (std::size_t j = 0; j < n; ++j) {
        const double x = targets_[tg].x[j];
        const int d = targets_[tg].derivs[j];
        for (std::size_t m = 0; m < mp; ++m) {
          for (int neg = 0; neg < 2; ++neg) {
            const double k = neg ? -nodes_[m].node : nodes_[m].node;
            // Each negative entry carries a factor -1 of the amplitude.
            cplx factor = neg ? -std::exp(i * k * x) : std::exp(i * k * x);
            for (int r = 0; r < d; ++r) factor *= i * k;
            pos_[pos_index(tg, j, neg == 1) * mp + m] = factor;
          }
        }
      }
    }

    if (n_ < 2) return;
    for (int neg_s = 0; neg_s < 2; ++neg_s) {
      for (int neg_u = 0; neg_u < 2; ++neg_u) {
        auto& tab = spair_[table(neg_s == 1, neg_u == 1)];
        tab.resize(mp * mp);
        for (std::size_t ma = 0; ma < mp; ++ma) {
          const double ka = neg_s ? -nodes_[ma].node : nodes_[ma].node;
          for (std::size_t mb = 0; mb < mp; ++mb) {
            const double kb = neg_u ? -nodes_[mb].node : nodes_[mb].node;
            tab[ma * mp + mb] = s_bose(ka - kb, params_);
          }
        }
      }
    }
  }

  std::vector<double> y_;
  std::vector<BoseTarget> targets_;
  DampedTime t_;
  BoseParams params_;
  Group group_;
  int n_;
  std::vector<LineNode> nodes_;
  std::vector<cplx> common_;
  std::vector<cplx> energy_;
  std::vector<cplx> pos_;
  std::array<std::vector<cplx>, 4> spair_;
};

inline BoseEvalReport run_bose(std::span<const double> y, std::vector<BoseTarget> targets, const DampedTime& t,
                               const BoseParams& params, const QuadOptions& opts, Group group) {
  opts.validate();
  if (opts.initial_points < 16) throw InvalidArgument("line quadrature needs initial_points >= 16");
  std::vector<double> all_x;
  for (const auto& tg : targets) all_x.insert(all_x.end(), tg.x.begin(), tg.x.end());
  const double cutoff = bose_cutoff(all_x, y, t, opts.tol);
  double reach = 0.0;
  for (double v : all_x) reach = std::max(reach, std::abs(v));
  double y_reach = 0.0;
  for (double v : y) y_reach = std::max(y_reach, std::abs(v));
  // Heat-kernel width at which e^{-z^2/(4 tau)} drops below tol.
  const double tail = 2.0 * std::sqrt(t.damping() * std::log(1.0 / opts.tol));
  const QuadOptions start = guarded_line_start(opts, cutoff, reach + y_reach, tail);
  BoseBetheIntegrand integrand(y, std::move(targets), t, params, group);
  const auto r = adaptive_refine(
      [&](int m) { return integrand.level(LineGrid(cutoff, 2.0 * cutoff / m), opts.threads); }, start);
  return {r.value, r.error_estimate, r.points_used, integrand.term_count()};
}

inline void check_halfline_y(const RealConfig& y) {
  if (!y.on_halfline()) throw InvalidArgument("half-line initial positions need y_1 > 0");
}

inline std::vector<double> to_vec(const RealConfig& c) { return {c.positions().begin(), c.positions().end()}; }

}  // namespace detail

/// Psi(x; y; t) on the half-line with a hard wall at 0.
inline BoseEvalReport propagator_halfline(const RealConfig& y, const RealConfig& x, const DampedTime& t,
                                          const BoseParams& params, const QuadOptions& opts = {}) {
  if (x.size() != y.size()) throw InvalidArgument("x and y must have the same number of particles");
  detail::check_halfline_y(y);
  if (!x.on_halfline()) throw InvalidArgument("half-line positions need x_1 > 0");
  return detail::run_bose(y.positions(), {{detail::to_vec(x), {}, 1.0, false}}, t, params, opts, Group::SignedB);
}

/// Psi(x; y; t) on the line, ordered sector x_1 < ... < x_N.
inline BoseEvalReport propagator_fullline(const RealConfig& y, const RealConfig& x, const DampedTime& t,
                                          const BoseParams& params, const QuadOptions& opts = {}) {
  if (x.size() != y.size()) throw InvalidArgument("x and y must have the same number of particles");
  return detail::run_bose(y.positions(), {{detail::to_vec(x), {}, 1.0, false}}, t, params, opts, Group::Symmetric);
}

/// (d/dx_{j+1} - d/dx_j - c) Psi at x_{j+1} = x_j (1-based j). `x` lists
/// the N - 1 distinct positions with the coincident pair entered once, at
/// index j.
inline BoseEvalReport bc1_residual(const RealConfig& y, const RealConfig& x, int j, const DampedTime& t,
                                   const BoseParams& params, const QuadOptions& opts = {}) {
  const int n = y.size();
  if (n < 2) throw InvalidArgument("bc1 residual needs N >= 2");
  if (x.size() != n - 1) throw InvalidArgument("bc1 residual takes N - 1 distinct positions");
  if (j < 1 || j > n - 1) throw InvalidArgument("bc1 residual: j outside [1, N-1]");
  detail::check_halfline_y(y);
  if (!x.on_halfline()) throw InvalidArgument("half-line positions need x_1 > 0");
  std::vector<double> full(x.positions().begin(), x.positions().end());
  full.insert(full.begin() + j, full[static_cast<std::size_t>(j - 1)]);
  std::vector<int> right(static_cast<std::size_t>(n), 0);
  std::vector<int> left(static_cast<std::size_t>(n), 0);
  right[static_cast<std::size_t>(j)] = 1;
  left[static_cast<std::size_t>(j - 1)] = 1;
  return detail::run_bose(y.positions(),
                          {{full, right, 1.0, false}, {full, left, -1.0, false}, {full, {}, -params.c, false}}, t,
                          params, opts, Group::SignedB);
}

/// Psi(0, x_2, ..., x_N); `rest` holds x_2 < ... < x_N (empty for N = 1).
inline BoseEvalReport wall_residual(const RealConfig& y, std::span<const double> rest, const DampedTime& t,
                                    const BoseParams& params, const QuadOptions& opts = {}) {
  if (static_cast<int>(rest.size()) != y.size() - 1) throw InvalidArgument("wall residual takes N - 1 positions");
  detail::check_halfline_y(y);
  std::vector<double> full{0.0};
  full.insert(full.end(), rest.begin(), rest.end());
  for (std::size_t i = 1; i < full.size(); ++i)
    if (!(full[i] > full[i - 1])) throw InvalidArgument("positions must be strictly increasing and > 0");
  return detail::run_bose(y.positions(), {{full, {}, 1.0, false}}, t, params, opts, Group::SignedB);
}

/// i dPsi/dt + sum_j d^2 Psi/dx_j^2 at an interior point of the half-line.
inline BoseEvalReport pde_residual(const RealConfig& y, const RealConfig& x, const DampedTime& t,
                                   const BoseParams& params, const QuadOptions& opts = {}) {
  const int n = y.size();
  if (x.size() != n) throw InvalidArgument("x and y must have the same number of particles");
  detail::check_halfline_y(y);
  if (!x.on_halfline()) throw InvalidArgument("half-line positions need x_1 > 0");
  const auto xs = detail::to_vec(x);
  std::vector<BoseTarget> targets{{xs, {}, 1.0, true}};
  for (int j = 0; j < n; ++j) {
    std::vector<int> d(static_cast<std::size_t>(n), 0);
    d[static_cast<std::size_t>(j)] = 2;
    targets.push_back({xs, d, 1.0, false});
  }
  return detail::run_bose(y.positions(), std::move(targets), t, params, opts, Group::SignedB);
}

/// i dPsi/dt alone (energy insertion), for cross-checks against finite
/// differences in t.
inline BoseEvalReport time_derivative_halfline(const RealConfig& y, const RealConfig& x, const DampedTime& t,
                                               const BoseParams& params, const QuadOptions& opts = {}) {
  if (x.size() != y.size()) throw InvalidArgument("x and y must have the same number of particles");
  detail::check_halfline_y(y);
  return detail::run_bose(y.positions(), {{detail::to_vec(x), {}, 1.0, true}}, t, params, opts, Group::SignedB);
}

namespace detail {
inline std::vector<std::vector<double>> image_matrix(const RealConfig& y, const RealConfig& x, double tau) {
  const int n = y.size();
  if (x.size() != n) throw InvalidArgument("x and y must have the same number of particles");
  std::vector<std::vector<double>> m(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = image_kernel(x[static_cast<std::size_t>(i)], y[static_cast<std::size_t>(j)], tau);
  return m;
}

/// Sum over S_N of prod_i m[i][rho(i)], optionally signed.
inline double permutation_sum(const std::vector<std::vector<double>>& m, bool sign) {
  const std::size_t n = m.size();
  std::vector<std::size_t> rho(n);
  std::iota(rho.begin(), rho.end(), 0);
  double total = 0.0;
  do {
    double prod = 1.0;
    for (std::size_t i = 0; i < n; ++i) prod *= m[i][rho[i]];
    if (sign) {
      int inv = 0;
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
          if (rho[a] > rho[b]) ++inv;
      if (inv % 2) prod = -prod;
    }
    total += prod;
  } while (std::next_permutation(rho.begin(), rho.end()));
  return total;
}
}  // namespace detail

/// c = 0: permanent of the image-kernel matrix.
inline cplx free_limit_c0(const RealConfig& y, const RealConfig& x, double tau) {
  return detail::permutation_sum(detail::image_matrix(y, x, tau), false);
}

/// c = infinity: determinant of the image-kernel matrix.
inline cplx fermion_limit_cinf(const RealConfig& y, const RealConfig& x, double tau) {
  return detail::permutation_sum(detail::image_matrix(y, x, tau), true);
}

/// Characteristic size (4 pi tau)^{-N/2} of Psi, used to express residuals
/// in relative terms.
inline double bose_scale(int n, double tau) { return std::pow(4.0 * std::numbers::pi * tau, -0.5 * n); }

}  // namespace halfline
