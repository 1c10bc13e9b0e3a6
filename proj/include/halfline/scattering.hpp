#pragma once

// Two-body scattering factors, one-particle energies, reflection
// substitutions and the Bethe amplitudes A_sigma for the delta-Bose gas and
// for ASEP, on the line (sigma in S_N) and on the half-line (sigma in B_N).

#include <cmath>
#include <complex>
#include <cstdlib>
#include <span>
#include <string>

#include "halfline/errors.hpp"
#include "halfline/signed_perm.hpp"

namespace halfline {

using cplx = std::complex<double>;

/// Delta-Bose coupling. c = 0 is the free gas, where S is identically 1.
struct BoseParams {
  double c = 1.0;

  explicit BoseParams(double coupling = 1.0) : c(coupling) {
    if (!std::isfinite(c) || c < 0.0) throw InvalidArgument("Bose coupling must be finite and >= 0");
  }
};

/// ASEP hop rates. q != 0 always; p = 0 is accepted here so the Markov-chain
/// oracles can use it, but the Bethe formulas reject it (tau would vanish).
struct AsepParams {
  double p;
  double q;
  double tau;

  AsepParams(double right, double left) : p(right), q(left), tau(0.0) {
    if (!std::isfinite(p) || !std::isfinite(q)) throw InvalidArgument("ASEP rates must be finite");
    if (std::abs(p + q - 1.0) > 1e-14) throw InvalidArgument("ASEP rates must satisfy p + q = 1");
    if (q == 0.0) throw InvalidArgument("ASEP requires q != 0");
    if (p < 0.0 || q < 0.0) throw InvalidArgument("ASEP rates must be nonnegative");
    tau = p / q;
  }

  static AsepParams from_p(double right) { return AsepParams(right, 1.0 - right); }
};

inline void require_bethe_params(const AsepParams& params) {
  if (params.p == 0.0) throw InvalidArgument("Bethe formulas require p != 0 (tau = 0 is degenerate)");
}

namespace detail {
inline void check_index(int a, std::size_t n) {
  if (a == 0 || static_cast<std::size_t>(std::abs(a)) > n)
    throw InvalidArgument("signed index " + std::to_string(a) + " outside [-N,-1] U [1,N]");
}
}  // namespace detail

/// k_a for a > 0, -k_{-a} for a < 0.
inline cplx k_signed(int a, std::span<const cplx> vars) {
  detail::check_index(a, vars.size());
  const cplx k = vars[static_cast<std::size_t>(std::abs(a) - 1)];
  return a > 0 ? k : -k;
}

/// xi_a for a > 0, tau / xi_{-a} for a < 0.
inline cplx xi_signed(int a, std::span<const cplx> vars, const AsepParams& params) {
  detail::check_index(a, vars.size());
  const cplx x = vars[static_cast<std::size_t>(std::abs(a) - 1)];
  if (a > 0) return x;
  if (std::abs(x) < kSingularityThreshold) throw SingularityError("xi_signed: zero spectral variable");
  return params.tau / x;
}

/// S(k) = -(c - ik)/(c + ik).
inline cplx s_bose(cplx k, const BoseParams& params) {
  if (params.c == 0.0) return 1.0;
  const cplx i{0.0, 1.0};
  const cplx den = params.c + i * k;
  if (std::abs(den) < kSingularityThreshold) throw SingularityError("s_bose: pole at k = ic");
  return -(params.c - i * k) / den;
}

inline cplx eps_bose(cplx k) { return k * k; }

/// S(x, y) = -(p + qxy - x)/(p + qxy - y).
inline cplx s_asep(cplx x, cplx y, const AsepParams& params) {
  const cplx common = params.p + params.q * x * y;
  const cplx den = common - y;
  if (std::abs(den) < kSingularityThreshold) throw SingularityError("s_asep: vanishing denominator");
  return -(common - x) / den;
}

/// eps(x) = p/x + qx - 1.
inline cplx eps_asep(cplx x, const AsepParams& params) {
  if (std::abs(x) < kSingularityThreshold) throw SingularityError("eps_asep: x = 0");
  return params.p / x + params.q * x - 1.0;
}

/// r(x) = -(1 - x)/(1 - tau/x), the wall factor for negative entries.
inline cplx r_factor(cplx x, const AsepParams& params) {
  if (std::abs(x) < kSingularityThreshold) throw SingularityError("r_factor: x = 0");
  const cplx den = 1.0 - params.tau / x;
  if (std::abs(den) < kSingularityThreshold) throw SingularityError("r_factor: pole at x = tau");
  return -(1.0 - x) / den;
}

namespace detail {
inline std::string inversion_str(const Inversion& inv) {
  return "(" + std::to_string(inv.first) + "," + std::to_string(inv.second) + ")";
}
}  // namespace detail

/// prod over B_N inversions (a,b) of S(k_a - k_b).
inline cplx s_product(const SignedPermutation& sigma, std::span<const cplx> vars,
                      const BoseParams& params) {
  cplx prod = 1.0;
  for (const Inversion& inv : inversions(sigma)) {
    try {
      prod *= s_bose(k_signed(inv.first, vars) - k_signed(inv.second, vars), params);
    } catch (const SingularityError& e) {
      throw SingularityError(std::string(e.what()) + " at inversion " + detail::inversion_str(inv) +
                             " of " + sigma.str());
    }
  }
  return prod;
}

/// prod over B_N inversions (a,b) of S(xi_a, xi_b), xi_{-a} = tau/xi_a.
inline cplx s_product(const SignedPermutation& sigma, std::span<const cplx> vars,
                      const AsepParams& params) {
  cplx prod = 1.0;
  for (const Inversion& inv : inversions(sigma)) {
    try {
      prod *= s_asep(xi_signed(inv.first, vars, params), xi_signed(inv.second, vars, params), params);
    } catch (const SingularityError& e) {
      throw SingularityError(std::string(e.what()) + " at inversion " + detail::inversion_str(inv) +
                             " of " + sigma.str());
    }
  }
  return prod;
}

/// Half-line Bose amplitude (-1)^{#negatives} * S-product. For sigma in S_N
/// this is the full-line amplitude.
inline cplx amplitude_bose(const SignedPermutation& sigma, std::span<const cplx> vars,
                           const BoseParams& params) {
  const cplx prod = s_product(sigma, vars, params);
  return neg_count(sigma) % 2 ? -prod : prod;
}

/// Half-line ASEP amplitude: prod over negative entries of r(xi_{sigma(i)})
/// times the S-product. For sigma in S_N this is the full-line amplitude.
inline cplx amplitude_asep(const SignedPermutation& sigma, std::span<const cplx> vars,
                           const AsepParams& params) {
  require_bethe_params(params);
  cplx amp = s_product(sigma, vars, params);
  for (int v : sigma.values()) {
    if (v < 0) amp *= r_factor(xi_signed(v, vars, params), params);
  }
  return amp;
}

}  // namespace halfline
