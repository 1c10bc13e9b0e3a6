// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "halfline/halfline.hpp"

using namespace halfline;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

QuadOptions quad(double tol) {
  QuadOptions o;
  o.tol = tol;
  return o;
}

// 1. Identity suites over all of B_N, N <= 4, 200 draws each.
Outcome identities() {
  const auto start = std::chrono::steady_clock::now();
  bool ok = true;
  std::string worst;
  double ratio = 0, flip = 0, wall = 0, ab = 0;
  for (int n = 1; n <= 4; ++n) {
    for (const auto& r : identity_suite(n)) {
      ok = ok && r.passed();
      if (r.name.rfind("ratio", 0) == 0) ratio = std::max(ratio, r.max_residual);
      if (r.name == "sign_flip_bose") flip = std::max(flip, r.max_residual);
      if (r.name == "wall_pairing_asep") wall = std::max(wall, r.max_residual);
      if (r.name == "ab_cancellation") {
        ab = std::max(ab, r.max_residual);
        for (long c : r.sign_cases) ok = ok && c > 0;
      }
    }
  }
  const double elapsed = seconds_since(start);
  ok = ok && elapsed < 60.0;
  return {ok, fmt("ratio %.2e (<1e-10), sign flip %.2e (<1e-12), wall pairing %.2e (<1e-10), (a,b) cancellation "
                  "%.2e (<1e-10), %.1f s (<60 s)",
                  ratio, flip, wall, ab, elapsed)};
}

// 2. One particle: Bethe sum vs closed form vs chain.
Outcome asep_n1() {
  const auto start = std::chrono::steady_clock::now();
  double vs_closed = 0, vs_chain = 0;
  for (double p : {0.3, 0.5, 0.7}) {
    const auto params = AsepParams::from_p(p);
    for (double t : {0.25, 1.0, 4.0})
      for (int y = 0; y <= 5; ++y)
        for (int x = 0; x <= 5; ++x) {
          const double bethe = prob_halfline({{y}}, {{x}}, t, params, quad(1e-12)).value;
          const double closed = prob_n1_closed(y, x, t, params, quad(1e-12)).value;
          const int ys[1] = {y}, xs[1] = {x};
          const double chain = ctmc_prob(ys, xs, t, params);
          vs_closed = std::max(vs_closed, std::abs(bethe - closed));
          vs_chain = std::max({vs_chain, std::abs(bethe - chain), std::abs(closed - chain)});
        }
  }
  const double elapsed = seconds_since(start);
  return {vs_closed < 1e-10 && vs_chain < 1e-8 && elapsed < 60.0,
          fmt("Bethe vs closed %.2e (<1e-10), vs chain %.2e (<1e-8), 324 cases, %.1f s (<60 s)", vs_closed, vs_chain,
              elapsed)};
}

// 3. Two particles from Y = (0,2): every X in the window.
Outcome asep_n2() {
  const auto start = std::chrono::steady_clock::now();
  const auto params = AsepParams::from_p(0.4);
  const LatticeConfig y({0, 2});
  const auto opts = quad(1e-11);
  double delta = 0, mass_err = 0;
  long compared = 0;
  for (double t : {0.5, 1.0}) {
    // Every site the chain reaches with mass above 1e-10; past that the
    // probabilities sit below the quadrature's rounding floor.
    const int window = mass_window(y.sites(), t, params);
    double mass = 0.0;
    for (const auto& z : ordered_subsets(0, window, 2)) {
      const double v = prob_halfline(y, LatticeConfig(z), t, params, opts).value;
      mass += v;
      const double oracle = ctmc_prob(y.sites(), z, t, params);
      if (oracle > 1e-9) {
        delta = std::max(delta, std::abs(v - oracle));
        ++compared;
      }
    }
    mass_err = std::max(mass_err, std::abs(mass - 1.0));
  }
  const double at = prob_halfline(y, y, 0.0, params, opts).value;
  const double off = prob_halfline(y, {{1, 2}}, 0.0, params, opts).value;
  const double ic = std::max(std::abs(at - 1.0), std::abs(off));
  const double elapsed = seconds_since(start);
  return {delta < 1e-6 && mass_err < 1e-6 && ic < 1e-8 && elapsed < 300.0,
          fmt("max |exact - chain| %.2e over %ld configs (<1e-6), mass %.2e (<1e-6), t=0 delta %.2e (<1e-8), %.1f s "
              "(<300 s)",
              delta, compared, mass_err, ic, elapsed)};
}

// 4. Three particles, reduced quadrature budget.
Outcome asep_n3() {
  const auto start = std::chrono::steady_clock::now();
  const auto params = AsepParams::from_p(0.4);
  QuadOptions o;
  o.initial_points = 16;
  o.max_points = 64;
  o.tol = 1e-5;
  const std::vector<std::pair<std::vector<int>, std::vector<int>>> cases{{{0, 1, 3}, {1, 2, 4}},
                                                                         {{0, 1, 2}, {0, 1, 2}},
                                                                         {{0, 2, 4}, {0, 3, 4}},
                                                                         {{1, 2, 3}, {0, 2, 3}},
                                                                         {{0, 1, 3}, {0, 2, 5}}};
  double worst = 0;
  for (const auto& [y, x] : cases) {
    try {
      const double v = prob_halfline(y, x, 0.5, params, o).value;
      worst = std::max(worst, std::abs(v - ctmc_prob(y, x, 0.5, params)));
    } catch (const ConvergenceError& e) {
      return {false, std::string("no convergence: ") + e.what()};
    }
  }
  const double elapsed = seconds_since(start);
  return {worst < 1e-5 && elapsed < 1800.0,
          fmt("max |exact - chain| %.2e over 5 configs at t=0.5 (<1e-5), M<=64, %.1f s (<1800 s)", worst, elapsed)};
}

// 5. Radii scaled by 1.1 and grading gaps doubled.
Outcome contour_robustness() {
  const auto params = AsepParams::from_p(0.4);
  const auto opts = quad(1e-11);
  double worst = 0;
  long cases = 0;
  auto probe = [&](const LatticeConfig& y, const LatticeConfig& x, double t) {
    const auto base = compact_radii(params, y.size());
    const double v = prob_halfline(y, x, t, params, opts, base).value;
    for (const auto& alt : {base.scaled(1.1), base.with_gaps_scaled(2.0)}) {
      worst = std::max(worst, std::abs(prob_halfline(y, x, t, params, opts, alt).value - v));
      ++cases;
    }
  };
  for (double t : {0.5, 1.0}) {
    probe({{0}}, {{0}}, t);
    probe({{2}}, {{4}}, t);
    probe({{0, 2}}, {{1, 3}}, t);
    probe({{0, 2}}, {{0, 1}}, t);
    probe({{1, 3}}, {{2, 5}}, t);
  }
  return {worst < 1e-8, fmt("max change %.2e over %ld radius variants, N<=2 (<1e-8)", worst, cases)};
}

// 6. Boundary and master-equation residuals.
Outcome residuals() {
  const auto params = AsepParams::from_p(0.4);
  const auto opts = quad(1e-11);
  const LatticeConfig y({0, 2});
  double bc2 = 0, bc4 = 0, adj = 0, sep = 0;
  for (double t : {0.5, 1.0}) {
    for (int x : {0, 1, 3}) {
      const std::vector<int> rest{0, 0};
      bc2 = std::max(bc2, std::abs(exclusion_boundary_residual(y, rest, 1, x, t, params, opts)));
    }
    for (int x2 : {1, 2, 4}) {
      const std::vector<int> rest{0, x2};
      bc4 = std::max(bc4, std::abs(wall_boundary_residual(y, rest, t, params, opts)));
    }
    adj = std::max({adj, master_equation_residual(y, {{0, 1}}, t, params, opts),
                    master_equation_residual(y, {{2, 3}}, t, params, opts)});
    sep = std::max({sep, master_equation_residual(y, {{0, 2}}, t, params, opts),
                    master_equation_residual(y, {{1, 4}}, t, params, opts)});
  }
  return {bc2 < 1e-8 && bc4 < 1e-8 && adj < 1e-8 && sep < 1e-8,
          fmt("exclusion %.2e, wall %.2e, master adjacent %.2e, master separated %.2e (all <1e-8)", bc2, bc4, adj, sep)};
}

// 7. One boson vs the method of images.
Outcome bose_n1() {
  double worst = 0;
  for (double tau : {0.1, 0.5, 2.0})
    for (double x : {0.25, 0.5, 1.0, 2.0, 3.0, 4.0})
      for (double y : {0.25, 1.0, 2.5, 4.0}) {
        const auto r = propagator_halfline({{y}}, {{x}}, DampedTime::imaginary(tau), BoseParams(1.0));
        worst = std::max(worst, std::abs(r.value - image_kernel(x, y, tau)));
      }
  return {worst < 1e-10, fmt("max |Bethe - images| %.2e over 72 cases (<1e-10)", worst)};
}

// 8. Two and three bosons: wall, contact condition, c = 0 and c -> infinity.
Outcome bose_n23() {
  const auto start = std::chrono::steady_clock::now();
  const double tau = 0.5;
  const auto t = DampedTime::imaginary(tau);
  double wall = 0, bc1 = 0, free = 0;
  bool halving = true;
  std::string sweep;
  const std::vector<std::pair<RealConfig, RealConfig>> sets{{{{0.4, 1.1}}, {{0.7, 1.5}}},
                                                            {{{0.4, 1.1, 1.9}}, {{0.7, 1.5, 2.2}}}};
  for (const auto& [y, x] : sets) {
    const int n = y.size();
    const double scale = bose_scale(n, tau);
    std::vector<double> rest(x.positions().begin() + 1, x.positions().end());
    for (double c : {0.5, 1.0, 4.0}) {
      wall = std::max(wall, std::abs(wall_residual(y, rest, t, BoseParams(c)).value) / scale);
      // Coincident pair in the middle for N = 3, first pair for N = 2.
      const int j = n == 3 ? 2 : 1;
      std::vector<double> merged(x.positions().begin(), x.positions().end());
      merged.erase(merged.begin() + j);
      const double rel = scale * (c + 1.0 / std::sqrt(tau));
      bc1 = std::max(bc1, std::abs(bc1_residual(y, RealConfig(merged), j, t, BoseParams(c)).value) / rel);
    }
    free = std::max(free, std::abs(propagator_halfline(y, x, t, BoseParams(0.0)).value - free_limit_c0(y, x, tau)));
    const cplx det = fermion_limit_cinf(y, x, tau);
    double previous = INFINITY;
    sweep += fmt(" N=%d:", n);
    for (double c : {1e2, 1e3, 1e4}) {
      const double err = std::abs(propagator_halfline(y, x, t, BoseParams(c)).value - det);
      halving = halving && err <= 0.5 * previous;
      previous = err;
      sweep += fmt(" %.2e", err);
    }
  }
  const double elapsed = seconds_since(start);
  return {wall < 1e-10 && bc1 < 1e-8 && free < 1e-10 && halving,
          fmt("wall %.2e (<1e-10 rel), contact %.2e (<1e-8 rel), c=0 %.2e (<1e-10), |Psi - det| at c=1e2,1e3,1e4%s "
              "(each <= half the previous), %.1f s",
              wall, bc1, free, sweep.c_str(), elapsed)};
}

// 9. Monte Carlo vs exact values.
Outcome monte_carlo() {
  const auto params = AsepParams::from_p(0.4);
  const long trials = 200000;
  const std::vector<int> y{0, 2};
  const std::vector<std::vector<int>> xs{{0, 1}, {0, 2}, {1, 2}, {1, 3}, {0, 3}, {2, 3}, {0, 4}, {1, 4}, {2, 4}, {3, 4}};
  int within = 0;
  double worst_z = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double exact = prob_halfline(y, xs[i], 1.0, params, quad(1e-11)).value;
    const auto mc = mc_estimate(y, xs[i], {trials, 1000 + i, 1.0, 1}, params);
    const double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(trials));
    const double z = std::abs(mc.estimate - exact) / se;
    worst_z = std::max(worst_z, z);
    if (z < 4.0) ++within;
  }
  const auto a = mc_estimate(y, xs[3], {trials, 77, 1.0, 1}, params);
  const auto b = mc_estimate(y, xs[3], {trials, 77, 1.0, 1}, params);
  const bool repro = a.hits == b.hits && a.estimate == b.estimate;
  const int needed = static_cast<int>(std::ceil(0.95 * static_cast<double>(xs.size())));
  return {within >= needed && repro,
          fmt("%d/%zu configs within 4 s.e. (need %d), worst z %.2f, same seed reproduces: %s", within, xs.size(),
              needed, worst_z, repro ? "yes" : "no")};
}

// 10. Full-line formulas.
Outcome full_line() {
  const auto params = AsepParams::from_p(0.4);
  double asep = 0;
  const std::vector<std::pair<std::vector<int>, std::vector<int>>> cases{
      {{0}, {2}}, {{0}, {-3}}, {{3}, {3}}, {{0, 2}, {1, 3}}, {{0, 2}, {-2, 5}}, {{0, 1}, {0, 1}}, {{-1, 2}, {-3, 0}}};
  for (double t : {0.5, 1.0})
    for (const auto& [y, x] : cases)
      asep = std::max(asep, std::abs(prob_fullline(y, x, t, params, quad(1e-11)).value - ctmc_prob(y, x, t, params, false)));
  double bose = 0;
  for (double tau : {0.1, 0.5, 2.0})
    for (double x : {-3.0, -0.5, 0.0, 1.0, 4.0}) {
      const auto r = propagator_fullline({{0.5}}, {{x}}, DampedTime::imaginary(tau), BoseParams(1.0));
      bose = std::max(bose, std::abs(r.value - heat_kernel(x - 0.5, tau)));
    }
  return {asep < 1e-6 && bose < 1e-10,
          fmt("ASEP vs full-line chain %.2e (<1e-6), Bose N=1 vs heat kernel %.2e (<1e-10)", asep, bose)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"identity suites N<=4", identities},
      {"ASEP N=1 three-way agreement", asep_n1},
      {"ASEP N=2 oracle equivalence", asep_n2},
      {"ASEP N=3 spot checks", asep_n3},
      {"contour robustness", contour_robustness},
      {"boundary and master residuals", residuals},
      {"Bose N=1 method of images", bose_n1},
      {"Bose N=2,3 wall, contact, limits", bose_n23},
      {"Monte Carlo concordance", monte_carlo},
      {"full-line cross-checks", full_line}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.passed) ++failed;
    std::printf("[%s] %zu %s: %s\n", o.passed ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
