#pragma once

// Trapezoidal rules on circles ((2 pi i)^{-1} normalization) and on
// truncated lines ((2 pi)^{-1} normalization), tensor-grid summation with a
// fixed reduction order, and resolution doubling until successive estimates
// agree.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "halfline/errors.hpp"

namespace halfline {

using cplx = std::complex<double>;

struct CircleContour {
  cplx center{0.0, 0.0};
  double radius = 1.0;

  CircleContour(cplx c, double r) : center(c), radius(r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("circle radius must be positive and finite");
  }
};

/// Concentric circles with strictly increasing radii R_1 < ... < R_N.
class RadiiScheme {
public:
  /// Adjacent radii must differ by at least min_gap_fraction * R_1.
  RadiiScheme(cplx center, std::vector<double> radii, double min_gap_fraction = 0.05)
      : center_(center), radii_(std::move(radii)) {
    if (radii_.empty()) throw InvalidArgument("radii scheme needs at least one radius");
    for (double r : radii_)
      if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("radii must be positive and finite");
    const double min_gap = min_gap_fraction * radii_.front();
    for (std::size_t a = 1; a < radii_.size(); ++a) {
      if (!(radii_[a] > radii_[a - 1])) throw InvalidArgument("radii must be strictly increasing");
      if (radii_[a] - radii_[a - 1] < min_gap * (1.0 - 1e-12))
        throw InvalidArgument("radii gap below the configured minimum");
    }
  }

  cplx center() const noexcept { return center_; }
  std::span<const double> radii() const noexcept { return radii_; }
  int size() const noexcept { return static_cast<int>(radii_.size()); }
  CircleContour circle(int a) const { return {center_, radii_.at(static_cast<std::size_t>(a))}; }

  RadiiScheme scaled(double factor) const {
    std::vector<double> r = radii_;
    for (double& x : r) x *= factor;
    return RadiiScheme(center_, std::move(r), 0.0);
  }

  /// Keep R_1, multiply every gap R_a - R_1 by `factor`.
  RadiiScheme with_gaps_scaled(double factor) const {
    std::vector<double> r = radii_;
    for (double& x : r) x = radii_.front() + factor * (x - radii_.front());
    return RadiiScheme(center_, std::move(r), 0.0);
  }

private:
  cplx center_;
  std::vector<double> radii_;
};

/// Uniform grid on [-K, K] with spacing h; K/h must be an integer >= 8.
struct LineGrid {
  double cutoff;
  double spacing;

  LineGrid(double k, double h) : cutoff(k), spacing(h) {
    if (!(k > 0.0) || !(h > 0.0)) throw InvalidArgument("line grid needs positive cutoff and spacing");
    const double ratio = k / h;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio) || std::round(ratio) < 8.0)
      throw InvalidArgument("line grid: K/h must be an integer >= 8");
  }

  int intervals() const { return static_cast<int>(std::lround(2.0 * cutoff / spacing)); }
};

struct QuadOptions {
  int initial_points = 16;
  long max_points = 4096;
  double tol = 1e-10;
  /// Worker threads for tensor sums; 0 means hardware concurrency. The
  /// reduction order never depends on this.
  int threads = 1;
  /// Circle evaluators start above twice the largest monomial degree of the
  /// integrand, line evaluators at a spacing whose alias period clears every
  /// displacement; coarser levels alias onto the same wrong value and agree
  /// with each other.
  bool alias_guard = true;

  void validate() const {
    if (initial_points < 8) throw InvalidArgument("initial_points must be >= 8");
    if (max_points < initial_points) throw InvalidArgument("max_points must be >= initial_points");
    if (!(tol > 0.0)) throw InvalidArgument("tol must be positive");
    if (threads < 0) throw InvalidArgument("threads must be >= 0");
  }
};

/// Opts with initial_points doubled until it exceeds 2 (degree + 1), when
/// the alias guard is on.
inline QuadOptions guarded_start(QuadOptions opts, long degree) {
  if (!opts.alias_guard) return opts;
  long m = opts.initial_points;
  while (m < 2 * (degree + 1)) m *= 2;
  if (m > opts.max_points)
    throw ConvergenceError("max_points=" + std::to_string(opts.max_points) + " is below the alias-free start M=" +
                               std::to_string(m) + " for monomial degree " + std::to_string(degree),
                           NAN, NAN, m);
  opts.initial_points = static_cast<int>(m);
  return opts;
}

/// Line analogue of guarded_start. Spacing h replicates the result at
/// displacements shifted by 2 pi n / h, so 2 pi / h must exceed
/// 2 * reach + tail, with `reach` the largest displacement present and
/// `tail` the width beyond which the kernel is negligible.
inline QuadOptions guarded_line_start(QuadOptions opts, double cutoff, double reach, double tail) {
  if (!opts.alias_guard) return opts;
  const double h_max = 2.0 * std::numbers::pi / (2.0 * reach + tail);
  long m = opts.initial_points;
  while (2.0 * cutoff / static_cast<double>(m) > h_max) m *= 2;
  if (m > opts.max_points)
    throw ConvergenceError("max_points=" + std::to_string(opts.max_points) + " is below the alias-free start M=" +
                               std::to_string(m) + " for the line rule",
                           NAN, NAN, m);
  opts.initial_points = static_cast<int>(m);
  return opts;
}

struct CircleNode {
  cplx node;
  cplx weight;
};

/// xi_m = c + R e^{2 pi i m/M}, w_m = (R/M) e^{2 pi i m/M}, so that
/// sum w_m f(xi_m) approximates (2 pi i)^{-1} * contour integral of f.
inline std::vector<CircleNode> circle_nodes(const CircleContour& contour, int m_points) {
  if (m_points < 8) throw InvalidArgument("circle rule needs M >= 8");
  std::vector<CircleNode> out(static_cast<std::size_t>(m_points));
  for (int m = 0; m < m_points; ++m) {
    const cplx root = std::polar(1.0, 2.0 * std::numbers::pi * m / m_points);
    out[static_cast<std::size_t>(m)] = {contour.center + contour.radius * root,
                                        (contour.radius / m_points) * root};
  }
  return out;
}

struct LineNode {
  double node;
  double weight;
};

/// Trapezoid nodes on [-K, K], weights carry the (2 pi)^{-1} factor.
inline std::vector<LineNode> line_nodes(const LineGrid& grid) {
  const int n = grid.intervals();
  std::vector<LineNode> out(static_cast<std::size_t>(n) + 1);
  const double w = grid.spacing / (2.0 * std::numbers::pi);
  for (int m = 0; m <= n; ++m) {
    // Symmetric construction keeps nodes exactly antisymmetric about 0.
    const int offset = m - n / 2;
    const double k = offset * grid.spacing;
    out[static_cast<std::size_t>(m)] = {k, (m == 0 || m == n) ? 0.5 * w : w};
  }
  return out;
}

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Sum f(idx) over the tensor grid [0, extent)^dims.
///
/// The first index is the outer slab; each slab is summed in odometer order
/// and slabs are combined in index order, so the result is bit-identical for
/// any thread count.
template <class T, class F>
T tensor_sum(int dims, int extent, F&& f, int threads = 1) {
  if (dims < 1 || extent < 1) throw InvalidArgument("tensor_sum: empty grid");
  std::vector<T> slabs(static_cast<std::size_t>(extent), T{});
  auto run_slab = [&](int first) {
    std::vector<int> idx(static_cast<std::size_t>(dims), 0);
    idx[0] = first;
    T acc{};
    while (true) {
      acc += f(std::span<const int>(idx));
      int d = dims - 1;
      while (d >= 1) {
        if (++idx[static_cast<std::size_t>(d)] < extent) break;
        idx[static_cast<std::size_t>(d)] = 0;
        --d;
      }
      if (d < 1) break;
    }
    slabs[static_cast<std::size_t>(first)] = acc;
  };
  const int workers = std::min(resolve_threads(threads), extent);
  if (workers <= 1) {
    for (int s = 0; s < extent; ++s) run_slab(s);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int s = w; s < extent; s += workers) run_slab(s);
      });
    }
    for (auto& th : pool) th.join();
  }
  T total{};
  for (const T& s : slabs) total += s;
  return total;
}

/// A quadrature level together with sum |w_m f(xi_m)|, the scale of the
/// rounding error that level carries.
struct LevelValue {
  cplx value{};
  double magnitude = 0.0;

  LevelValue& operator+=(const LevelValue& other) {
    value += other.value;
    magnitude += other.magnitude;
    return *this;
  }
};

/// Successive levels closer than this many ulps of the level magnitude are
/// treated as converged; below that the difference is rounding noise.
inline constexpr double kRoundoffUlps = 1000.0;

struct AdaptiveResult {
  cplx value;
  double error_estimate;
  long points_used;  // per-dimension resolution of the last level
  int levels;
  /// kRoundoffUlps * eps * magnitude of the last level; zero when the level
  /// function reports no magnitude.
  double roundoff_floor = 0.0;
};

/// Doubles the per-dimension resolution M from opts.initial_points until two
/// successive estimates differ by less than max(opts.tol, roundoff floor).
/// `level_value(M)` returns the estimate at resolution M, either as a plain
/// complex number or as a LevelValue.
template <class LevelFn>
AdaptiveResult adaptive_refine(LevelFn&& level_value, const QuadOptions& opts) {
  opts.validate();
  auto eval = [&](long m) {
    const auto r = level_value(static_cast<int>(m));
    if constexpr (std::is_same_v<std::decay_t<decltype(r)>, LevelValue>) {
      return r;
    } else {
      return LevelValue{cplx(r), 0.0};
    }
  };
  long m = opts.initial_points;
  cplx before = eval(m).value;
  cplx previous = before;
  int levels = 1;
  while (true) {
    const long next = 2 * m;
    if (next > opts.max_points) {
      throw ConvergenceError("adaptive quadrature did not reach tol=" + std::to_string(opts.tol) +
                                 " by M=" + std::to_string(m) + " (last difference " +
                                 std::to_string(std::abs(previous - before)) + ")",
                             before, previous, m);
    }
    const LevelValue current = eval(next);
    ++levels;
    const double diff = std::abs(current.value - previous);
    if (!std::isfinite(diff))
      throw ConvergenceError("adaptive quadrature produced a non-finite estimate", previous, current.value, next);
    const double floor = kRoundoffUlps * std::numeric_limits<double>::epsilon() * current.magnitude;
    if (diff < std::max(opts.tol, floor)) return {current.value, diff, next, levels, floor};
    before = previous;
    previous = current.value;
    m = next;
  }
}

/// Adaptive tensor-trapezoid evaluation of
/// (2 pi i)^{-N} * integral over C_1 x ... x C_N of f(xi_1, ..., xi_N).
template <class F>
AdaptiveResult adaptive_eval(F&& integrand, const std::vector<CircleContour>& contours,
                             const QuadOptions& opts) {
  const int dims = static_cast<int>(contours.size());
  auto level = [&](int m_points) {
    std::vector<std::vector<CircleNode>> nodes;
    for (const auto& c : contours) nodes.push_back(circle_nodes(c, m_points));
    return tensor_sum<cplx>(
        dims, m_points,
        [&](std::span<const int> idx) {
          std::vector<cplx> xs(static_cast<std::size_t>(dims));
          cplx w = 1.0;
          for (int d = 0; d < dims; ++d) {
            const auto& nd = nodes[static_cast<std::size_t>(d)][static_cast<std::size_t>(idx[static_cast<std::size_t>(d)])];
            xs[static_cast<std::size_t>(d)] = nd.node;
            w *= nd.weight;
          }
          return w * integrand(std::span<const cplx>(xs));
        },
        opts.threads);
  };
  return adaptive_refine(level, opts);
}

/// Adaptive tensor-trapezoid evaluation of (2 pi)^{-N} * integral over
/// [-K, K]^N of f(k_1, ..., k_N); resolution M means spacing h = 2K/M.
template <class F>
AdaptiveResult adaptive_eval_line(F&& integrand, int dims, double cutoff, const QuadOptions& opts) {
  auto level = [&](int m_points) {
    const LineGrid grid(cutoff, 2.0 * cutoff / m_points);
    const auto nodes = line_nodes(grid);
    return tensor_sum<cplx>(
        dims, static_cast<int>(nodes.size()),
        [&](std::span<const int> idx) {
          std::vector<double> ks(static_cast<std::size_t>(dims));
          double w = 1.0;
          for (int d = 0; d < dims; ++d) {
            const auto& nd = nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(d)])];
            ks[static_cast<std::size_t>(d)] = nd.node;
            w *= nd.weight;
          }
          return w * integrand(std::span<const double>(ks));
        },
        opts.threads);
  };
  return adaptive_refine(level, opts);
}

}  // namespace halfline
