#pragma once

// Randomized checks of the algebraic identities the Bethe sums rest on: the
// T_i ratio relations for both models, the wall pairings sigma <-> sigma'
// (first entry negated), and the (a,b)-pairing cancellation at xi_a = xi_b.
// Every suite walks all of B_N and reports its worst residual.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "halfline/errors.hpp"
#include "halfline/scattering.hpp"
#include "halfline/signed_perm.hpp"

namespace halfline {

struct IdentityResult {
  std::string name;
  int n = 0;
  double max_residual = 0.0;
  double threshold = 0.0;
  long checks = 0;
  /// Counts of the sign cases (+,+), (-,-), (+,-), (-,+); only the
  /// (a,b)-pairing suite fills these.
  std::array<long, 4> sign_cases{};
  bool passed() const { return checks > 0 && max_residual < threshold; }
};

struct IdentityOptions {
  int draws = 200;
  std::uint64_t seed = 1;
  double bose_c = 1.0;
  double asep_p = 0.4;
  /// Sampled spectral variables keep every S and r numerator and
  /// denominator at least this far from zero.
  double pole_clearance = 1e-3;
};

namespace detail {

inline std::vector<cplx> draw_real_momenta(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<cplx> k(static_cast<std::size_t>(n));
  for (auto& v : k) v = u(rng);
  return k;
}

inline bool asep_clear(const std::vector<cplx>& xi, const AsepParams& params, double clearance) {
  const int n = static_cast<int>(xi.size());
  for (int a = -n; a <= n; ++a) {
    if (a == 0) continue;
    const cplx x = xi_signed(a, xi, params);
    if (std::abs(1.0 - x) < clearance || std::abs(1.0 - params.tau / x) < clearance) return false;
    for (int b = -n; b <= n; ++b) {
      if (b == 0 || std::abs(b) == std::abs(a)) continue;
      const cplx y = xi_signed(b, xi, params);
      const cplx common = params.p + params.q * x * y;
      if (std::abs(common - x) < clearance || std::abs(common - y) < clearance) return false;
    }
  }
  return true;
}

/// Uniform on the annulus 1/2 <= |xi| <= 2, redrawn until clear of poles
/// and zeros. With `tie` = {a, b} (1-based), xi_b is set equal to xi_a.
inline std::vector<cplx> draw_asep_vars(int n, const AsepParams& params, double clearance, std::mt19937_64& rng,
                                        std::array<int, 2> tie = {0, 0}) {
  std::uniform_real_distribution<double> radius(0.5, 2.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    std::vector<cplx> xi(static_cast<std::size_t>(n));
    for (auto& v : xi) v = std::polar(radius(rng), angle(rng));
    if (tie[0] > 0) xi[static_cast<std::size_t>(tie[1] - 1)] = xi[static_cast<std::size_t>(tie[0] - 1)];
    if (asep_clear(xi, params, clearance)) return xi;
  }
  throw ConvergenceError("could not draw spectral variables clear of poles", 0.0, 0.0, 100000);
}

inline IdentityResult make_result(std::string name, int n, double threshold) {
  IdentityResult r;
  r.name = std::move(name);
  r.n = n;
  r.threshold = threshold;
  return r;
}

inline void record(IdentityResult& r, double residual) {
  ++r.checks;
  // NaN must never pass silently.
  if (!(residual <= r.max_residual)) r.max_residual = std::isnan(residual) ? INFINITY : residual;
}

}  // namespace detail

/// A_{T_i sigma} / A_sigma = S(k_{sigma(i+1)} - k_{sigma(i)}).
inline IdentityResult check_ratio_bose(int n, const IdentityOptions& opts = {}) {
  auto r = detail::make_result("ratio_bose", n, 1e-10);
  const BoseParams params(opts.bose_c);
  std::mt19937_64 rng(opts.seed);
  for (const auto& sigma : enumerate_bn(n)) {
    for (int i = 1; i < n; ++i) {
      const auto swapped = apply_adjacent_transposition(sigma, i);
      for (int d = 0; d < opts.draws; ++d) {
        const auto k = detail::draw_real_momenta(n, rng);
        const cplx ratio = amplitude_bose(swapped, k, params) / amplitude_bose(sigma, k, params);
        const cplx expect = s_bose(k_signed(sigma(i + 1), k) - k_signed(sigma(i), k), params);
        detail::record(r, std::abs(ratio - expect) / std::max(1.0, std::abs(expect)));
      }
    }
  }
  return r;
}

/// A_{T_i sigma} / A_sigma = S(xi_{sigma(i+1)}, xi_{sigma(i)}).
inline IdentityResult check_ratio_asep(int n, const IdentityOptions& opts = {}) {
  auto r = detail::make_result("ratio_asep", n, 1e-10);
  const auto params = AsepParams::from_p(opts.asep_p);
  std::mt19937_64 rng(opts.seed + 1);
  for (const auto& sigma : enumerate_bn(n)) {
    for (int i = 1; i < n; ++i) {
      const auto swapped = apply_adjacent_transposition(sigma, i);
      for (int d = 0; d < opts.draws; ++d) {
        const auto xi = detail::draw_asep_vars(n, params, opts.pole_clearance, rng);
        const cplx ratio = amplitude_asep(swapped, xi, params) / amplitude_asep(sigma, xi, params);
        const cplx expect =
            s_asep(xi_signed(sigma(i + 1), xi, params), xi_signed(sigma(i), xi, params), params);
        detail::record(r, std::abs(ratio - expect) / std::max(1.0, std::abs(expect)));
      }
    }
  }
  return r;
}

/// A_sigma + A_{sigma'} = 0 for the Bose amplitude, sigma' = negate_first(sigma).
inline IdentityResult check_sign_flip_bose(int n, const IdentityOptions& opts = {}) {
  auto r = detail::make_result("sign_flip_bose", n, 1e-12);
  const BoseParams params(opts.bose_c);
  std::mt19937_64 rng(opts.seed + 2);
  for (const auto& sigma : enumerate_bn(n)) {
    const auto flipped = negate_first(sigma);
    for (int d = 0; d < opts.draws; ++d) {
      const auto k = detail::draw_real_momenta(n, rng);
      const cplx a = amplitude_bose(sigma, k, params);
      detail::record(r, std::abs(a + amplitude_bose(flipped, k, params)) / std::abs(a));
    }
  }
  return r;
}

/// A_{sigma'} / (1 - xi_{sigma'(1)}) + A_sigma / (1 - xi_{sigma(1)}) = 0.
inline IdentityResult check_wall_pairing_asep(int n, const IdentityOptions& opts = {}) {
  auto r = detail::make_result("wall_pairing_asep", n, 1e-10);
  const auto params = AsepParams::from_p(opts.asep_p);
  std::mt19937_64 rng(opts.seed + 3);
  for (const auto& sigma : enumerate_bn(n)) {
    const auto flipped = negate_first(sigma);
    for (int d = 0; d < opts.draws; ++d) {
      const auto xi = detail::draw_asep_vars(n, params, opts.pole_clearance, rng);
      const cplx lhs = amplitude_asep(sigma, xi, params) / (1.0 - xi_signed(sigma(1), xi, params));
      const cplx rhs = amplitude_asep(flipped, xi, params) / (1.0 - xi_signed(flipped(1), xi, params));
      detail::record(r, std::abs(lhs + rhs) / std::abs(lhs));
    }
  }
  return r;
}

/// For (a,b)-paired sigma, sigma' with a < b and +-a placed before +-b in
/// sigma: at xi_a = xi_b both the S-products and the amplitudes are negatives
/// of each other. Each sum is measured against max(1, |sigma term|), since
/// S-products near the pole clearance can reach 1e8 and carry roundoff of
/// that relative size.
inline IdentityResult check_ab_cancellation(int n, const IdentityOptions& opts = {}) {
  auto r = detail::make_result("ab_cancellation", n, 1e-10);
  const auto params = AsepParams::from_p(opts.asep_p);
  std::mt19937_64 rng(opts.seed + 4);
  for (const auto& sigma : enumerate_bn(n)) {
    std::vector<int> where(static_cast<std::size_t>(n) + 1);
    for (int i = 1; i <= n; ++i) where[static_cast<std::size_t>(std::abs(sigma(i)))] = i;
    for (int a = 1; a <= n; ++a) {
      for (int b = a + 1; b <= n; ++b) {
        const int pa = where[static_cast<std::size_t>(a)];
        const int pb = where[static_cast<std::size_t>(b)];
        if (pa > pb) continue;
        const bool neg_a = sigma(pa) < 0;
        const bool neg_b = sigma(pb) < 0;
        const int sign_case = !neg_a && !neg_b ? 0 : neg_a && neg_b ? 1 : !neg_a ? 2 : 3;
        const auto paired = ab_pair(sigma, a, b);
        for (int d = 0; d < opts.draws; ++d) {
          const auto xi = detail::draw_asep_vars(n, params, opts.pole_clearance, rng, {a, b});
          const cplx s1 = s_product(sigma, xi, params);
          const cplx a1 = amplitude_asep(sigma, xi, params);
          const double s_sum = std::abs(s1 + s_product(paired, xi, params)) / std::max(1.0, std::abs(s1));
          const double a_sum = std::abs(a1 + amplitude_asep(paired, xi, params)) / std::max(1.0, std::abs(a1));
          detail::record(r, std::max(s_sum, a_sum));
        }
        ++r.sign_cases[static_cast<std::size_t>(sign_case)];
      }
    }
  }
  return r;
}

/// Every suite that has something to check at this N (the ratio and
/// (a,b) suites need N >= 2).
inline std::vector<IdentityResult> identity_suite(int n, const IdentityOptions& opts = {}) {
  std::vector<IdentityResult> out;
  if (n >= 2) {
    out.push_back(check_ratio_bose(n, opts));
    out.push_back(check_ratio_asep(n, opts));
  }
  out.push_back(check_sign_flip_bose(n, opts));
  out.push_back(check_wall_pairing_asep(n, opts));
  if (n >= 2) out.push_back(check_ab_cancellation(n, opts));
  return out;
}

}  // namespace halfline
