#pragma once

// Exact ASEP transition probabilities as Bethe sums of contour integrals:
// the half-line sum over B_N on radius-graded circles centred at 1/(2q), the
// full-line sum over S_N on one circle about 0, the one-particle closed form,
// and residual checks of the master equation and boundary conditions.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "halfline/contour_quad.hpp"
#include "halfline/errors.hpp"
#include "halfline/scattering.hpp"
#include "halfline/signed_perm.hpp"

namespace halfline {

inline constexpr int kMaxExactParticles = 4;

/// Occupied sites x_1 < ... < x_N.
class LatticeConfig {
public:
  LatticeConfig(std::vector<int> sites) : sites_(std::move(sites)) {  // NOLINT(implicit)
    if (sites_.empty()) throw InvalidArgument("lattice configuration needs at least one particle");
    for (std::size_t i = 1; i < sites_.size(); ++i)
      if (sites_[i] <= sites_[i - 1]) throw InvalidArgument("lattice sites must be strictly increasing");
  }

  int size() const noexcept { return static_cast<int>(sites_.size()); }
  std::span<const int> sites() const noexcept { return sites_; }
  int operator[](std::size_t i) const { return sites_.at(i); }
  bool on_halfline() const noexcept { return sites_.front() >= 0; }

  friend bool operator==(const LatticeConfig&, const LatticeConfig&) = default;

private:
  std::vector<int> sites_;
};

struct AsepEvalReport {
  double value = 0.0;
  double imag_residual = 0.0;
  double error_estimate = 0.0;
  long points_used = 0;
  long term_count = 0;
  /// Rounding noise of the last level; differences below it count as converged.
  double roundoff_floor = 0.0;
};

/// One integrand of a linear combination: coef * u(z_1, ..., z_N), with the
/// factor sum_a eps(xi_a) inserted when `energy` is set (that term is du/dt).
struct AsepTarget {
  std::vector<int> z;
  double coef = 1.0;
  bool energy = false;
};

/// Radii R_a = rho (1 + a/(4N)) with rho = scale * max(1, 1/q, |1 - 1/2q|,
/// |tau - 1/2q|), centre 1/(2q).
inline RadiiScheme graded_radii(const AsepParams& params, int n, double scale) {
  if (n < 1) throw InvalidArgument("graded_radii: N must be >= 1");
  const double c0 = 1.0 / (2.0 * params.q);
  const double rho = scale * std::max({1.0, 1.0 / std::abs(params.q), std::abs(1.0 - c0),
                                       std::abs(params.tau - c0)});
  std::vector<double> radii(static_cast<std::size_t>(n));
  for (int a = 1; a <= n; ++a) radii[static_cast<std::size_t>(a - 1)] = rho * (1.0 + a / (4.0 * n));
  return RadiiScheme(c0, std::move(radii), 1.0 / (4.0 * n + 4.0));
}

/// The large-radius reference scheme (scale 4).
inline RadiiScheme default_radii(const AsepParams& params, int n) { return graded_radii(params, n, 4.0); }

/// Smallest graded scheme (same grading, same centre) whose circles keep
/// every singular set of the integrand on the inside with a 25% margin:
/// xi = 0, 1, tau, and the pole sets of S(xi_a, xi_b) and S(tau/xi_a, xi_b).
/// The S(xi_a, tau/xi_b) poles sit on z_a = -z_b (z = xi - 1/2q) and are
/// avoided by distinct radii. Shrinking the default scheme down to this one
/// crosses no singularity, so both give the same integral while this one
/// keeps |xi|^x e^{q xi t} small enough for double precision.
///
/// For N = 1 there are no pair singularities and the only singular points
/// are 0 and 1 (tau is a zero of the r-factor, not a pole), so the circle
/// is centred at 0 with radius max(1.25, sqrt(tau)). That keeps both
/// |xi|^x and (tau/|xi|)^x as small as the pole margin allows; the circle
/// about 1/2q comes within R - 1/2q of zero and loses all precision once
/// x reaches about 10.
inline RadiiScheme compact_radii(const AsepParams& params, int n) {
  if (n < 1) throw InvalidArgument("compact_radii: N must be >= 1");
  if (n == 1) return RadiiScheme(0.0, {std::max(1.25, std::sqrt(params.tau))});
  const double p = params.p;
  const double q = params.q;
  const double c0 = 1.0 / (2.0 * q);
  const double margin = 1.25;
  const double d = (2.0 * q - 1.0) * (2.0 * q - 1.0) / (4.0 * q);
  const double e = (1.0 - 2.0 * p * q) / (2.0 * q);
  const double f = (1.0 - 2.0 * q) * (1.0 - 2.0 * q) / (4.0 * q * q);
  auto grade = [n](int a) { return 1.0 + a / (4.0 * n); };
  const double inclusion = margin * std::max({c0, std::abs(1.0 - c0), std::abs(params.tau - c0)});
  double rho = inclusion / grade(1);
  auto pairs_ok = [&](double r) {
    for (int a = 1; a <= n; ++a) {
      for (int b = 1; b <= n; ++b) {
        if (a == b) continue;
        const double ra = r * grade(a);
        const double rb = r * grade(b);
        if (q * ra - 0.5 <= 0.0 || margin * (d + 0.5 * ra) / (q * ra - 0.5) > rb) return false;
        if (ra - e <= 0.0 || margin * (e * ra + f) / (ra - e) > rb) return false;
      }
    }
    return true;
  };
  int guard = 0;
  while (!pairs_ok(rho)) {
    rho *= 1.02;
    if (++guard > 5000) throw InvalidArgument("compact_radii: no admissible radius found");
  }
  std::vector<double> radii(static_cast<std::size_t>(n));
  for (int a = 1; a <= n; ++a) radii[static_cast<std::size_t>(a - 1)] = rho * grade(a);
  return RadiiScheme(c0, std::move(radii), 1.0 / (4.0 * n + 4.0));
}

inline double full_line_radius(const AsepParams& params) {
  return std::max(2.0, 2.0 / std::abs(params.q));
}

namespace detail {

inline cplx ipow(cplx base, int exponent) {
  if (exponent == 0) return 1.0;
  if (std::abs(base) < kSingularityThreshold && exponent < 0)
    throw SingularityError("negative power of a vanishing spectral variable");
  unsigned e = static_cast<unsigned>(exponent < 0 ? -exponent : exponent);
  cplx result = 1.0;
  cplx b = base;
  while (e) {
    if (e & 1u) result *= b;
    b *= b;
    e >>= 1u;
  }
  return exponent < 0 ? 1.0 / result : result;
}

inline long factorial(int n) {
  long f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

/// Product-contour layout: dimension a runs over circle assignment[a].
struct ContourLayout {
  std::vector<CircleContour> circles;
  std::vector<std::vector<int>> assignments;
  double weight;  // multiplies every assignment
  Group group;
};

inline ContourLayout halfline_layout(const RadiiScheme& radii, int n) {
  if (radii.size() != n) throw InvalidArgument("radii scheme size must equal N");
  ContourLayout layout{{}, {}, 1.0 / static_cast<double>(factorial(n)), Group::SignedB};
  for (int a = 0; a < n; ++a) layout.circles.push_back(radii.circle(a));
  std::vector<int> mu(static_cast<std::size_t>(n));
  std::iota(mu.begin(), mu.end(), 0);
  do {
    layout.assignments.push_back(mu);
  } while (std::next_permutation(mu.begin(), mu.end()));
  return layout;
}

inline ContourLayout fullline_layout(double radius, int n) {
  ContourLayout layout{{CircleContour(0.0, radius)}, {std::vector<int>(static_cast<std::size_t>(n), 0)},
                       1.0, Group::Symmetric};
  return layout;
}

inline long term_count(const ContourLayout& layout, int n) {
  const long group = layout.group == Group::SignedB ? (1L << n) * factorial(n) : factorial(n);
  return group * static_cast<long>(layout.assignments.size());
}

/// Evaluates (weight) * sum_assignments sum_targets coef * sum_sigma of the
/// contour integral of A_sigma prod_i xi_{sigma(i)}^{z_i} prod_a xi_a^{-y_a-1} e^{eps(xi_a) t}.
class AsepBetheIntegrand {
public:
  AsepBetheIntegrand(std::span<const int> y, std::vector<AsepTarget> targets, double t,
                     const AsepParams& params, ContourLayout layout)
      : y_(y.begin(), y.end()), targets_(std::move(targets)), t_(t), params_(params),
        layout_(std::move(layout)), n_(static_cast<int>(y.size())) {
    require_bethe_params(params_);
    if (n_ < 1 || n_ > kMaxExactParticles)
      throw SizeLimitError("exact ASEP evaluator supports 1 <= N <= 4");
    for (const auto& tg : targets_)
      if (static_cast<int>(tg.z.size()) != n_) throw InvalidArgument("target arity must equal N");
    for (const auto& as : layout_.assignments)
      for (int a = 0; a < n_; ++a)
        for (int b = 0; b < n_; ++b)
          if (a != b) used_pairs_.push_back({as[static_cast<std::size_t>(a)], as[static_cast<std::size_t>(b)]});
    std::sort(used_pairs_.begin(), used_pairs_.end());
    used_pairs_.erase(std::unique(used_pairs_.begin(), used_pairs_.end()), used_pairs_.end());
  }

  int dims() const noexcept { return n_; }

  LevelValue level(int m_points, int threads) {
    prepare(m_points);
    const int n = n_;
    const std::size_t mp = static_cast<std::size_t>(m_points);
    const bool signed_group = layout_.group == Group::SignedB;
    return tensor_sum<LevelValue>(
        n, m_points,
        [&, n, mp, signed_group](std::span<const int> idx) {
          cplx node_total = 0.0;
          double node_magnitude = 0.0;
          for (const auto& as : layout_.assignments) {
            cplx common = 1.0;
            cplx energy = 0.0;
            for (int a = 0; a < n; ++a) {
              const std::size_t c = static_cast<std::size_t>(as[static_cast<std::size_t>(a)]);
              const std::size_t m = static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
              common *= common_[(static_cast<std::size_t>(a) * circles() + c) * mp + m];
              energy += energy_[c * mp + m];
            }
            // F(s,u) for signed s,u, indexed s + n.
            const auto& lookup = links_[static_cast<std::size_t>(&as - layout_.assignments.data())];
            std::array<std::array<cplx, 2 * kMaxExactParticles + 1>, 2 * kMaxExactParticles + 1> pair{};
            for (const PairLink& link : lookup) {
              cplx f = 1.0;
              const std::size_t ma = static_cast<std::size_t>(idx[link.a]) * mp;
              const std::size_t mb = static_cast<std::size_t>(idx[link.b]);
              if (link.direct) f *= link.direct[ma + mb];
              if (link.reflected) f *= link.reflected[ma + mb];
              pair[link.s][link.u] = f;
            }
            cplx acc = 0.0;
            double acc_magnitude = 0.0;
            for (std::size_t tg = 0; tg < targets_.size(); ++tg) {
              const cplx sum = factorized_group_sum<cplx>(
                  n, signed_group ? Group::SignedB : Group::Symmetric,
                  [&](int pos, int v) {
                    const std::size_t a = static_cast<std::size_t>(std::abs(v) - 1);
                    const std::size_t c = static_cast<std::size_t>(as[a]);
                    const std::size_t m = static_cast<std::size_t>(idx[a]);
                    return pos_[pos_index(tg, static_cast<std::size_t>(pos - 1), v < 0, c) * mp + m];
                  },
                  [&](int s, int u) {
                    return pair[static_cast<std::size_t>(s + n)][static_cast<std::size_t>(u + n)];
                  });
              const auto& target = targets_[tg];
              const cplx term = target.coef * (target.energy ? energy * sum : sum);
              acc += term;
              acc_magnitude += std::abs(term);
            }
            node_total += common * acc;
            node_magnitude += std::abs(common) * acc_magnitude;
          }
          return LevelValue{layout_.weight * node_total, layout_.weight * node_magnitude};
        },
        threads);
  }

  long term_count() const { return detail::term_count(layout_, n_); }

private:
  std::size_t circles() const { return layout_.circles.size(); }

  std::size_t pos_index(std::size_t tg, std::size_t pos, bool negative, std::size_t c) const {
    return ((tg * static_cast<std::size_t>(n_) + pos) * 2 + (negative ? 1 : 0)) * circles() + c;
  }

  std::size_t pair_table_index(int ca, int cb, bool neg_s, bool neg_u) const {
    const auto it = std::lower_bound(used_pairs_.begin(), used_pairs_.end(), std::array<int, 2>{ca, cb});
    const std::size_t k = static_cast<std::size_t>(it - used_pairs_.begin());
    return k * 4 + (neg_s ? 2 : 0) + (neg_u ? 1 : 0);
  }

  void prepare(int m_points) {
    const std::size_t mp = static_cast<std::size_t>(m_points);
    const std::size_t nc = circles();
    const std::size_t n = static_cast<std::size_t>(n_);
    std::vector<std::vector<CircleNode>> nodes;
    for (const auto& c : layout_.circles) nodes.push_back(circle_nodes(c, m_points));

    common_.assign(n * nc * mp, 0.0);
    energy_.assign(nc * mp, 0.0);
    for (std::size_t c = 0; c < nc; ++c) {
      for (std::size_t m = 0; m < mp; ++m) {
        const cplx xi = nodes[c][m].node;
        const cplx eps = eps_asep(xi, params_);
        energy_[c * mp + m] = eps;
        const cplx damp = nodes[c][m].weight * std::exp(eps * t_);
        for (std::size_t a = 0; a < n; ++a)
          common_[(a * nc + c) * mp + m] = damp * ipow(xi, -y_[a] - 1);
      }
    }

    pos_.assign(targets_.size() * n * 2 * nc * mp, 0.0);
    for (std::size_t tg = 0; tg < targets_.size(); ++tg) {
      for (std::size_t i = 0; i < n; ++i) {
        const int z = targets_[tg].z[i];
        for (std::size_t c = 0; c < nc; ++c) {
          for (std::size_t m = 0; m < mp; ++m) {
            const cplx xi = nodes[c][m].node;
            const cplx reflected = params_.tau / xi;
            pos_[pos_index(tg, i, false, c) * mp + m] = ipow(xi, z);
            pos_[pos_index(tg, i, true, c) * mp + m] = ipow(reflected, z) * r_factor(reflected, params_);
          }
        }
      }
    }

    spair_.assign(used_pairs_.size() * 4, {});
    for (std::size_t k = 0; k < used_pairs_.size(); ++k) {
      const auto [ca, cb] = used_pairs_[k];
      for (int neg_s = 0; neg_s < 2; ++neg_s) {
        for (int neg_u = 0; neg_u < 2; ++neg_u) {
          auto& table = spair_[k * 4 + static_cast<std::size_t>(neg_s * 2 + neg_u)];
          table.resize(mp * mp);
          for (std::size_t ma = 0; ma < mp; ++ma) {
            const cplx xa = nodes[static_cast<std::size_t>(ca)][ma].node;
            const cplx sa = neg_s ? params_.tau / xa : xa;
            for (std::size_t mb = 0; mb < mp; ++mb) {
              const cplx xb = nodes[static_cast<std::size_t>(cb)][mb].node;
              const cplx sb = neg_u ? params_.tau / xb : xb;
              table[ma * mp + mb] = s_asep(sa, sb, params_);
            }
          }
        }
      }
    }

    links_.assign(layout_.assignments.size(), {});
    const int nn = n_;
    for (std::size_t k = 0; k < layout_.assignments.size(); ++k) {
      const auto& as = layout_.assignments[k];
      for (int s = -nn; s <= nn; ++s) {
        for (int u = -nn; u <= nn; ++u) {
          if (s == 0 || u == 0 || std::abs(u) == std::abs(s)) continue;
          const std::size_t a = static_cast<std::size_t>(std::abs(s) - 1);
          const std::size_t b = static_cast<std::size_t>(std::abs(u) - 1);
          PairLink link{a, b, static_cast<std::size_t>(s + nn), static_cast<std::size_t>(u + nn), nullptr, nullptr};
          if (s > u) link.direct = spair_[pair_table_index(as[a], as[b], s < 0, u < 0)].data();
          if (-s > u) link.reflected = spair_[pair_table_index(as[a], as[b], s > 0, u < 0)].data();
          links_[k].push_back(link);
        }
      }
    }
  }

  struct PairLink {
    std::size_t a, b, s, u;
    const cplx* direct;
    const cplx* reflected;
  };

  std::vector<int> y_;
  std::vector<AsepTarget> targets_;
  double t_;
  AsepParams params_;
  ContourLayout layout_;
  int n_;
  std::vector<std::array<int, 2>> used_pairs_;
  std::vector<cplx> common_;
  std::vector<cplx> energy_;
  std::vector<cplx> pos_;
  std::vector<std::vector<cplx>> spair_;
  std::vector<std::vector<PairLink>> links_;
};

inline AsepEvalReport make_report(const AdaptiveResult& r, long terms) {
  return {r.value.real(), std::abs(r.value.imag()), r.error_estimate, r.points_used, terms, r.roundoff_floor};
}

inline void check_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("time must be finite and >= 0");
}

inline AdaptiveResult run_layout(std::span<const int> y, std::vector<AsepTarget> targets, double t,
                                 const AsepParams& params, ContourLayout layout, const QuadOptions& opts,
                                 long* terms = nullptr) {
  // Each variable carries at most xi^{+-z - y - 1}.
  long max_z = 0, max_y = 0;
  for (const auto& tg : targets)
    for (int z : tg.z) max_z = std::max<long>(max_z, std::abs(z));
  for (int v : y) max_y = std::max<long>(max_y, std::abs(v));
  const long degree = max_z + max_y + 1;
  const QuadOptions start = guarded_start(opts, degree);
  AsepBetheIntegrand integrand(y, std::move(targets), t, params, std::move(layout));
  if (terms) *terms = integrand.term_count();
  return adaptive_refine([&](int m) { return integrand.level(m, opts.threads); }, start);
}

}  // namespace detail

/// Linear combination of the half-line formula extended to arbitrary integer
/// arguments. Every target shares the same quadrature nodes.
inline AdaptiveResult evaluate_combination(const LatticeConfig& y, std::vector<AsepTarget> targets, double t,
                                           const AsepParams& params, const QuadOptions& opts = {},
                                           const std::optional<RadiiScheme>& radii = std::nullopt,
                                           long* terms = nullptr) {
  detail::check_time(t);
  const int n = y.size();
  if (n > kMaxExactParticles) throw SizeLimitError("exact ASEP evaluator supports N <= 4");
  const RadiiScheme scheme = radii ? *radii : compact_radii(params, n);
  return detail::run_layout(y.sites(), std::move(targets), t, params, detail::halfline_layout(scheme, n),
                            opts, terms);
}

/// Half-line transition probability P_Y(X; t).
inline AsepEvalReport prob_halfline(const LatticeConfig& y, const LatticeConfig& x, double t,
                                    const AsepParams& params, const QuadOptions& opts = {},
                                    const std::optional<RadiiScheme>& radii = std::nullopt) {
  if (y.size() != x.size()) throw InvalidArgument("X and Y must have the same number of particles");
  if (!y.on_halfline() || !x.on_halfline()) throw InvalidArgument("half-line configurations need x_1 >= 0");
  long terms = 0;
  const auto r = evaluate_combination(y, {{std::vector<int>(x.sites().begin(), x.sites().end()), 1.0, false}},
                                      t, params, opts, radii, &terms);
  return detail::make_report(r, terms);
}

/// The half-line formula at an arbitrary integer tuple (no ordering or sign
/// constraints).
inline cplx evaluate_extended(const LatticeConfig& y, std::span<const int> z, double t, const AsepParams& params,
                              const QuadOptions& opts = {},
                              const std::optional<RadiiScheme>& radii = std::nullopt) {
  if (static_cast<int>(z.size()) != y.size()) throw InvalidArgument("Z must have N entries");
  return evaluate_combination(y, {{std::vector<int>(z.begin(), z.end()), 1.0, false}}, t, params, opts, radii)
      .value;
}

/// Full-line transition probability on one circle about 0, sum over S_N.
inline AsepEvalReport prob_fullline(const LatticeConfig& y, const LatticeConfig& x, double t,
                                    const AsepParams& params, const QuadOptions& opts = {},
                                    std::optional<double> radius = std::nullopt) {
  detail::check_time(t);
  if (y.size() != x.size()) throw InvalidArgument("X and Y must have the same number of particles");
  const int n = y.size();
  if (n > kMaxExactParticles) throw SizeLimitError("exact ASEP evaluator supports N <= 4");
  long terms = 0;
  const auto r = detail::run_layout(y.sites(), {{std::vector<int>(x.sites().begin(), x.sites().end()), 1.0, false}},
                                    t, params, detail::fullline_layout(radius ? *radius : full_line_radius(params), n),
                                    opts, &terms);
  return detail::make_report(r, terms);
}

/// One particle on the half-line:
/// contour integral of [xi^{x-y-1} - ((1 - tau/xi)/(1 - xi)) tau^x xi^{-x-y-1}] e^{eps(xi) t}.
inline AsepEvalReport prob_n1_closed(int y, int x, double t, const AsepParams& params,
                                     const QuadOptions& opts = {},
                                     std::optional<CircleContour> contour = std::nullopt) {
  detail::check_time(t);
  require_bethe_params(params);
  if (y < 0 || x < 0) throw InvalidArgument("half-line sites must be >= 0");
  const CircleContour c = contour ? *contour : compact_radii(params, 1).circle(0);
  const double tau_x = std::pow(params.tau, x);
  auto level = [&](int m_points) {
    LevelValue sum;
    for (const auto& nd : circle_nodes(c, m_points)) {
      const cplx xi = nd.node;
      const cplx bracket = detail::ipow(xi, x - y - 1) -
                           ((1.0 - params.tau / xi) / (1.0 - xi)) * tau_x * detail::ipow(xi, -x - y - 1);
      const cplx term = nd.weight * bracket * std::exp(eps_asep(xi, params) * t);
      sum.value += term;
      sum.magnitude += std::abs(term);
    }
    return sum;
  };
  return detail::make_report(adaptive_refine(level, guarded_start(opts, x + y + 1)), 2);
}

/// p u(.., x, x, ..) + q u(.., x+1, x+1, ..) - u(.., x, x+1, ..) with entries i
/// and i+1 (1-based) displayed and the others taken from `rest`.
inline cplx exclusion_boundary_residual(const LatticeConfig& y, std::span<const int> rest, int i, int x, double t,
                                        const AsepParams& params, const QuadOptions& opts = {},
                                        const std::optional<RadiiScheme>& radii = std::nullopt) {
  const int n = y.size();
  if (i < 1 || i > n - 1) throw InvalidArgument("boundary index must lie in [1, N-1]");
  if (static_cast<int>(rest.size()) != n) throw InvalidArgument("argument must have N entries");
  auto with = [&](int a, int b) {
    std::vector<int> z(rest.begin(), rest.end());
    z[static_cast<std::size_t>(i - 1)] = a;
    z[static_cast<std::size_t>(i)] = b;
    return z;
  };
  return evaluate_combination(y,
                              {{with(x, x), params.p, false},
                               {with(x + 1, x + 1), params.q, false},
                               {with(x, x + 1), -1.0, false}},
                              t, params, opts, radii)
      .value;
}

/// u(0, x_2, ..., x_N) - tau u(-1, x_2, ..., x_N).
inline cplx wall_boundary_residual(const LatticeConfig& y, std::span<const int> rest, double t,
                                   const AsepParams& params, const QuadOptions& opts = {},
                                   const std::optional<RadiiScheme>& radii = std::nullopt) {
  if (static_cast<int>(rest.size()) != y.size()) throw InvalidArgument("argument must have N entries");
  std::vector<int> at0(rest.begin(), rest.end());
  std::vector<int> at_minus1 = at0;
  at0.front() = 0;
  at_minus1.front() = -1;
  return evaluate_combination(y, {{at0, 1.0, false}, {at_minus1, -params.tau, false}}, t, params, opts, radii)
      .value;
}

/// Linear combination expressing du/dt minus the right side of the
/// half-line master equation at X. Exclusion terms use the delta factors;
/// the leftmost particle's inflow-from-the-left and outflow-to-the-left
/// summands carry the extra factor (1 - delta(x_1)).
inline std::vector<AsepTarget> master_equation_targets(const LatticeConfig& x, const AsepParams& params) {
  const int n = x.size();
  const auto s = x.sites();
  std::vector<AsepTarget> targets;
  targets.push_back({std::vector<int>(s.begin(), s.end()), 1.0, true});
  auto add = [&](std::vector<int> z, double coef) {
    if (coef == 0.0) return;
    for (auto& tg : targets) {
      if (!tg.energy && tg.z == z) {
        tg.coef += coef;
        return;
      }
    }
    targets.push_back({std::move(z), coef, false});
  };
  auto delta = [](int v) { return v == 0 ? 1.0 : 0.0; };
  for (int i = 0; i < n; ++i) {
    // delta terms involving x_0 or x_{N+1} are replaced by zero
    const double left_gap = i > 0 ? delta(s[static_cast<std::size_t>(i)] - s[static_cast<std::size_t>(i - 1)] - 1) : 0.0;
    const double right_gap =
        i < n - 1 ? delta(s[static_cast<std::size_t>(i + 1)] - s[static_cast<std::size_t>(i)] - 1) : 0.0;
    const double wall = i == 0 ? 1.0 - delta(s[0]) : 1.0;
    std::vector<int> z(s.begin(), s.end());
    auto shifted = [&](int d) {
      auto w = z;
      w[static_cast<std::size_t>(i)] += d;
      return w;
    };
    add(shifted(-1), -params.p * (1.0 - left_gap) * wall);
    add(shifted(+1), -params.q * (1.0 - right_gap));
    add(z, params.p * (1.0 - right_gap));
    add(z, params.q * (1.0 - left_gap) * wall);
  }
  return targets;
}

/// |du/dt - RHS| of the half-line master equation, with du/dt computed by
/// inserting sum_a eps(xi_a) into the integrand.
inline double master_equation_residual(const LatticeConfig& y, const LatticeConfig& x, double t,
                                       const AsepParams& params, const QuadOptions& opts = {},
                                       const std::optional<RadiiScheme>& radii = std::nullopt) {
  if (!(t > 0.0)) throw InvalidArgument("master equation residual needs t > 0");
  if (y.size() > 3) throw SizeLimitError("master equation residual supports N <= 3");
  if (y.size() != x.size()) throw InvalidArgument("X and Y must have the same number of particles");
  if (!x.on_halfline()) throw InvalidArgument("X must lie on the half-line");
  return std::abs(evaluate_combination(y, master_equation_targets(x, params), t, params, opts, radii).value);
}

/// All ordered N-subsets of {lo, ..., hi}, lexicographic.
inline std::vector<std::vector<int>> ordered_subsets(int lo, int hi, int n) {
  std::vector<std::vector<int>> out;
  if (hi - lo + 1 < n) return out;
  std::vector<int> cur(static_cast<std::size_t>(n));
  auto recurse = [&](auto&& self, int depth, int start) -> void {
    if (depth == n) {
      out.push_back(cur);
      return;
    }
    for (int v = start; v <= hi - (n - depth - 1); ++v) {
      cur[static_cast<std::size_t>(depth)] = v;
      self(self, depth + 1, v + 1);
    }
  };
  recurse(recurse, 0, lo);
  return out;
}

/// Sum of prob_halfline over every configuration inside {0, ..., L}.
inline double total_mass(const LatticeConfig& y, double t, const AsepParams& params, int window,
                         const QuadOptions& opts = {}, const std::optional<RadiiScheme>& radii = std::nullopt) {
  if (y.size() > 3) throw SizeLimitError("total_mass supports N <= 3");
  if (!y.on_halfline()) throw InvalidArgument("Y must lie on the half-line");
  if (window < y.sites().back()) throw InvalidArgument("window must contain Y");
  std::vector<AsepTarget> targets;
  for (auto& z : ordered_subsets(0, window, y.size())) targets.push_back({std::move(z), 1.0, false});
  return evaluate_combination(y, std::move(targets), t, params, opts, radii).value.real();
}

}  // namespace halfline
