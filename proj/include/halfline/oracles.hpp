#pragma once

// Independent ground truth for ASEP: a finite-window continuous-time Markov
// chain solved by uniformization, and a kinetic Monte Carlo simulator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "halfline/errors.hpp"
#include "halfline/scattering.hpp"

namespace halfline {

/// Sites {lo, ..., hi}.
struct LatticeWindow {
  int lo;
  int hi;

  int sites() const noexcept { return hi - lo + 1; }

  void validate(int n) const {
    if (hi - lo < n) throw InvalidArgument("window must satisfy hi - lo >= N");
    if (hi - lo > 64 * n) throw SizeLimitError("window wider than 64 N sites");
  }
};

inline constexpr double kMaxStates = 2e6;

/// Sparse rate matrix over ordered N-subsets of a window. Off-diagonal rates
/// are stored per source state; diagonal = -(sum of the row's rates).
struct GeneratorMatrix {
  int n = 0;
  LatticeWindow window{0, 0};
  bool halfline = true;
  std::vector<std::vector<int>> states;
  std::vector<std::size_t> row_start;
  std::vector<std::size_t> target;
  std::vector<double> rate;
  std::vector<double> diagonal;
  std::map<std::vector<int>, std::size_t> index;

  std::size_t size() const noexcept { return states.size(); }

  std::size_t index_of(std::span<const int> sites) const {
    const auto it = index.find(std::vector<int>(sites.begin(), sites.end()));
    if (it == index.end()) throw InvalidArgument("configuration not inside the window");
    return it->second;
  }

  bool contains(std::span<const int> sites) const {
    return index.count(std::vector<int>(sites.begin(), sites.end())) > 0;
  }
};

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

/// Each particle jumps right at rate p and left at rate q onto empty sites
/// inside the window; on the half-line a particle at 0 cannot jump left.
inline GeneratorMatrix build_generator(const AsepParams& params, LatticeWindow window, int n, bool halfline) {
  if (n < 1) throw InvalidArgument("need at least one particle");
  window.validate(n);
  if (halfline && window.lo != 0) throw InvalidArgument("half-line windows start at 0");
  if (binomial(window.sites(), n) > kMaxStates) throw SizeLimitError("window has too many states");

  GeneratorMatrix g;
  g.n = n;
  g.window = window;
  g.halfline = halfline;
  std::vector<int> cur(static_cast<std::size_t>(n));
  auto recurse = [&](auto&& self, int depth, int start) -> void {
    if (depth == n) {
      g.index.emplace(cur, g.states.size());
      g.states.push_back(cur);
      return;
    }
    for (int v = start; v <= window.hi - (n - depth - 1); ++v) {
      cur[static_cast<std::size_t>(depth)] = v;
      self(self, depth + 1, v + 1);
    }
  };
  recurse(recurse, 0, window.lo);

  g.row_start.push_back(0);
  g.diagonal.resize(g.states.size());
  for (std::size_t s = 0; s < g.states.size(); ++s) {
    const auto& x = g.states[s];
    double out = 0.0;
    for (int i = 0; i < n; ++i) {
      const int site = x[static_cast<std::size_t>(i)];
      const bool right_free = i == n - 1 ? site + 1 <= window.hi : x[static_cast<std::size_t>(i + 1)] != site + 1;
      const bool left_free = i == 0 ? site - 1 >= window.lo : x[static_cast<std::size_t>(i - 1)] != site - 1;
      if (right_free && params.p > 0.0) {
        auto y = x;
        y[static_cast<std::size_t>(i)] += 1;
        g.target.push_back(g.index.at(y));
        g.rate.push_back(params.p);
        out += params.p;
      }
      if (left_free && params.q > 0.0) {
        auto y = x;
        y[static_cast<std::size_t>(i)] -= 1;
        g.target.push_back(g.index.at(y));
        g.rate.push_back(params.q);
        out += params.q;
      }
    }
    g.diagonal[s] = -out;
    g.row_start.push_back(g.target.size());
  }
  return g;
}

/// Distribution at time t started from delta_Y, by uniformization
/// sum_m Poisson(Lambda t; m) delta_Y P^m with P = I + Q/Lambda, truncated
/// once the Poisson tail drops below tol.
inline std::vector<double> uniformized_distribution(const GeneratorMatrix& g, std::span<const int> y, double t,
                                                    double tol = 1e-14) {
  if (!(t >= 0.0)) throw InvalidArgument("time must be >= 0");
  std::vector<double> v(g.size(), 0.0);
  v[g.index_of(y)] = 1.0;
  double lambda = 0.0;
  for (double d : g.diagonal) lambda = std::max(lambda, -d);
  if (t == 0.0 || lambda == 0.0) return v;

  const double lt = lambda * t;
  std::vector<double> result(g.size(), 0.0);
  std::vector<double> next(g.size());
  double cumulative = 0.0;
  for (long m = 0;; ++m) {
    const double w = std::exp(-lt + m * std::log(lt) - std::lgamma(m + 1.0));
    for (std::size_t s = 0; s < g.size(); ++s) result[s] += w * v[s];
    cumulative += w;
    // Past the mode the remaining weights fall off faster than a geometric
    // series of ratio lt / (m + 1); 1 - cumulative itself rounds near 1e-16.
    const double ratio = lt / (m + 1.0);
    if (m > lt && (1.0 - cumulative < tol || w * ratio / (1.0 - ratio) < tol)) break;
    if (m > 100000) throw ConvergenceError("uniformization: Poisson series did not terminate", cumulative, w, m);
    for (std::size_t s = 0; s < g.size(); ++s) next[s] = v[s] * (1.0 + g.diagonal[s] / lambda);
    for (std::size_t s = 0; s < g.size(); ++s) {
      if (v[s] == 0.0) continue;
      for (std::size_t k = g.row_start[s]; k < g.row_start[s + 1]; ++k)
        next[g.target[k]] += v[s] * g.rate[k] / lambda;
    }
    v.swap(next);
  }
  return result;
}

namespace detail {
inline LatticeWindow oracle_window(std::span<const int> y, std::span<const int> x, int margin, bool halfline) {
  const int max_site = std::max(y.back(), x.back());
  const int min_site = std::min(y.front(), x.front());
  const int n = static_cast<int>(y.size());
  LatticeWindow w{halfline ? 0 : min_site - margin, max_site + margin};
  if (w.hi - w.lo < n) w.hi = w.lo + n;
  return w;
}
}  // namespace detail

/// P_Y(X; t) from the windowed chain. With an explicit window the value is
/// returned as is; otherwise the margin starts at ceil(4 sqrt t) + 4 and is
/// doubled until the result changes by less than tol.
inline double ctmc_prob(std::span<const int> y, std::span<const int> x, double t, const AsepParams& params,
                        bool halfline = true, std::optional<LatticeWindow> window = std::nullopt,
                        double tol = 1e-13) {
  if (y.size() != x.size() || y.empty()) throw InvalidArgument("X and Y must have the same nonzero size");
  const int n = static_cast<int>(y.size());
  auto solve = [&](LatticeWindow w) {
    const auto g = build_generator(params, w, n, halfline);
    if (!g.contains(x)) throw InvalidArgument("X outside the oracle window");
    const auto dist = uniformized_distribution(g, y, t, tol * 1e-2);
    return dist[g.index_of(x)];
  };
  if (window) return solve(*window);
  int margin = static_cast<int>(std::ceil(4.0 * std::sqrt(t))) + 4;
  double previous = solve(detail::oracle_window(y, x, margin, halfline));
  for (int iter = 0; iter < 8; ++iter) {
    margin *= 2;
    const auto w = detail::oracle_window(y, x, margin, halfline);
    if (w.hi - w.lo > 64 * n || binomial(w.sites(), n) > kMaxStates)
      throw ConvergenceError("ctmc_prob: window growth hit the state-count guard", previous, previous, margin);
    const double current = solve(w);
    if (std::abs(current - previous) < tol) return current;
    previous = current;
  }
  throw ConvergenceError("ctmc_prob: window growth did not stabilise", previous, previous, margin);
}

/// Smallest L >= max Y such that the half-line chain puts less than `leak`
/// of its mass on configurations with x_N > L at time t. Computed on a
/// window with 16 spare sites beyond the answer.
inline int mass_window(std::span<const int> y, double t, const AsepParams& params, double leak = 1e-10) {
  if (y.empty()) throw InvalidArgument("Y must be nonempty");
  const int n = static_cast<int>(y.size());
  for (int spare = 16;; spare *= 2) {
    const LatticeWindow w{0, y.back() + spare};
    if (w.hi - w.lo > 64 * n || binomial(w.sites(), n) > kMaxStates)
      throw SizeLimitError("mass_window: chain window too large");
    const auto g = build_generator(params, w, n, true);
    const auto dist = uniformized_distribution(g, y, t);
    std::vector<double> by_last(static_cast<std::size_t>(w.hi) + 1, 0.0);
    for (std::size_t s = 0; s < g.size(); ++s) by_last[static_cast<std::size_t>(g.states[s].back())] += dist[s];
    double tail = 0.0;
    int l = w.hi;
    while (l > y.back() && tail + by_last[static_cast<std::size_t>(l)] < leak) tail += by_last[static_cast<std::size_t>(l--)];
    if (w.hi - l >= 16) return l;
  }
}

struct McConfig {
  long trials = 100000;
  std::uint64_t seed = 1;
  double t = 1.0;
  int threads = 1;
};

struct McEstimate {
  double estimate;
  double std_error;
  long hits;
  long trials;
};

/// SplitMix64 finaliser; mixes (seed, trial) into the per-trial mt19937_64 seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t trial_seed(std::uint64_t seed, long trial) {
  return splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(trial));
}

/// Runs one path to time t: every particle rings at rate p + q = 1, then
/// attempts a right step with probability p, otherwise a left step, and
/// moves only onto an empty site (never below 0 on the half-line).
inline std::vector<int> simulate_path(std::span<const int> y, double t, const AsepParams& params, bool halfline,
                                      std::mt19937_64& rng) {
  std::vector<int> x(y.begin(), y.end());
  const int n = static_cast<int>(x.size());
  std::exponential_distribution<double> wait(static_cast<double>(n));
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  double clock = 0.0;
  while (true) {
    clock += wait(rng);
    if (clock > t) break;
    const int i = pick(rng);
    const bool right = coin(rng) < params.p;
    const std::size_t k = static_cast<std::size_t>(i);
    if (right) {
      if (i == n - 1 || x[k + 1] != x[k] + 1) x[k] += 1;
    } else {
      const bool blocked_by_wall = halfline && x[k] == 0;
      if (!blocked_by_wall && (i == 0 || x[k - 1] != x[k] - 1)) x[k] -= 1;
    }
  }
  return x;
}

/// Fraction of simulated paths that end in X, with its binomial standard
/// error. Results depend only on (seed, trials), not on thread count.
inline McEstimate mc_estimate(std::span<const int> y, std::span<const int> x, const McConfig& cfg,
                              const AsepParams& params, bool halfline = true) {
  if (cfg.trials < 1) throw InvalidArgument("need at least one trial");
  if (y.size() != x.size()) throw InvalidArgument("X and Y must have the same size");
  const std::vector<int> target(x.begin(), x.end());
  const int workers = static_cast<int>(std::min<long>(cfg.threads > 0 ? cfg.threads : 1, cfg.trials));
  std::vector<long> hits(static_cast<std::size_t>(workers), 0);
  auto run = [&](int w) {
    for (long trial = w; trial < cfg.trials; trial += workers) {
      std::mt19937_64 rng(trial_seed(cfg.seed, trial));
      if (simulate_path(y, cfg.t, params, halfline, rng) == target) ++hits[static_cast<std::size_t>(w)];
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& th : pool) th.join();
  }
  long total = 0;
  for (long h : hits) total += h;
  const double phat = static_cast<double>(total) / static_cast<double>(cfg.trials);
  return {phat, std::sqrt(phat * (1.0 - phat) / static_cast<double>(cfg.trials)), total, cfg.trials};
}

}  // namespace halfline
