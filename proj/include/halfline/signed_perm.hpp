#pragma once

// Combinatorics of the hyperoctahedral group B_N (signed permutations).
//
// Positions are 1-based, values are nonzero integers in [-N,-1] U [1,N].
// A negative value -a stands for the reflected spectral variable; resolving
// it is left to the scattering layer.

#include <algorithm>
#include <array>
#include <compare>
#include <cstdlib>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "halfline/errors.hpp"

namespace halfline {

inline constexpr int kMaxEnumerationSize = 8;

class SignedPermutation {
public:
  explicit SignedPermutation(std::vector<int> values) : values_(std::move(values)) {
    const int n = static_cast<int>(values_.size());
    if (n < 1) throw InvalidArgument("signed permutation must have N >= 1");
    std::vector<bool> seen(static_cast<std::size_t>(n) + 1, false);
    for (int v : values_) {
      const int a = std::abs(v);
      if (a < 1 || a > n || seen[static_cast<std::size_t>(a)])
        throw InvalidArgument("not a signed permutation: " + to_string_values(values_));
      seen[static_cast<std::size_t>(a)] = true;
    }
  }

  static SignedPermutation identity(int n) {
    std::vector<int> v(static_cast<std::size_t>(std::max(n, 0)));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i + 1;
    return SignedPermutation(std::move(v));
  }

  int size() const noexcept { return static_cast<int>(values_.size()); }

  /// sigma(i), 1-based.
  int operator()(int i) const { return values_.at(static_cast<std::size_t>(i - 1)); }

  std::span<const int> values() const noexcept { return values_; }

  bool all_positive() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](int v) { return v > 0; });
  }

  std::string str() const { return to_string_values(values_); }

  friend bool operator==(const SignedPermutation&, const SignedPermutation&) = default;
  friend auto operator<=>(const SignedPermutation& a, const SignedPermutation& b) {
    return a.values_ <=> b.values_;
  }

private:
  static std::string to_string_values(const std::vector<int>& v) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << ')';
    return os.str();
  }

  std::vector<int> values_;
};

/// Ordered pair of signed indices (first, second) with first > second.
struct Inversion {
  int first;
  int second;
  friend bool operator==(const Inversion&, const Inversion&) = default;
  friend auto operator<=>(const Inversion&, const Inversion&) = default;
};

enum class Group { SignedB, Symmetric };

/// Sum over the group of prod_i pos(i, sigma(i)) * prod_{i<j} pair(sigma(i), sigma(j)).
///
/// Elements are visited depth-first with values tried in increasing order,
/// which is lexicographic order on the value vector; partial products are
/// shared between elements with a common prefix. `pos` receives the
/// 1-based position.
template <class T, class PosFn, class PairFn>
T factorized_group_sum(int n, Group group, PosFn&& pos, PairFn&& pair) {
  if (n < 1 || n > kMaxEnumerationSize)
    throw SizeLimitError("group size N=" + std::to_string(n) + " outside [1, 8]");
  std::array<int, kMaxEnumerationSize> chosen{};
  std::array<bool, kMaxEnumerationSize + 1> used{};
  T total{};
  auto recurse = [&](auto&& self, int depth, const T& partial) -> void {
    if (depth == n) {
      total += partial;
      return;
    }
    const int lo = group == Group::SignedB ? -n : 1;
    for (int v = lo; v <= n; ++v) {
      if (v == 0 || used[static_cast<std::size_t>(std::abs(v))]) continue;
      T next = partial * pos(depth + 1, v);
      for (int i = 0; i < depth; ++i) next *= pair(chosen[static_cast<std::size_t>(i)], v);
      chosen[static_cast<std::size_t>(depth)] = v;
      used[static_cast<std::size_t>(std::abs(v))] = true;
      self(self, depth + 1, next);
      used[static_cast<std::size_t>(std::abs(v))] = false;
    }
  };
  recurse(recurse, 0, T{1});
  return total;
}

/// All 2^N N! signed permutations in lexicographic order of their values.
inline std::vector<SignedPermutation> enumerate_bn(int n) {
  if (n < 1 || n > kMaxEnumerationSize)
    throw SizeLimitError("enumerate_bn: N=" + std::to_string(n) + " outside [1, 8]");
  std::vector<SignedPermutation> out;
  std::vector<int> current(static_cast<std::size_t>(n));
  std::vector<bool> used(static_cast<std::size_t>(n) + 1, false);
  auto recurse = [&](auto&& self, int depth) -> void {
    if (depth == n) {
      out.emplace_back(current);
      return;
    }
    for (int v = -n; v <= n; ++v) {
      if (v == 0 || used[static_cast<std::size_t>(std::abs(v))]) continue;
      current[static_cast<std::size_t>(depth)] = v;
      used[static_cast<std::size_t>(std::abs(v))] = true;
      self(self, depth + 1);
      used[static_cast<std::size_t>(std::abs(v))] = false;
    }
  };
  recurse(recurse, 0);
  return out;
}

/// The embedded copy of S_N (all values positive), lexicographic order.
inline std::vector<SignedPermutation> enumerate_sn(int n) {
  if (n < 1 || n > kMaxEnumerationSize)
    throw SizeLimitError("enumerate_sn: N=" + std::to_string(n) + " outside [1, 8]");
  std::vector<int> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i + 1;
  std::vector<SignedPermutation> out;
  do {
    out.emplace_back(v);
  } while (std::next_permutation(v.begin(), v.end()));
  return out;
}

/// Pairs (+-sigma(i), sigma(j)), i<j, with +-sigma(i) > sigma(j). Ordered by
/// (i, j), with sigma(i) itself before its negation.
inline std::vector<Inversion> inversions(const SignedPermutation& sigma) {
  std::vector<Inversion> out;
  const int n = sigma.size();
  for (int i = 1; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      const int a = sigma(i);
      const int b = sigma(j);
      if (a > b) out.push_back({a, b});
      if (-a > b) out.push_back({-a, b});
    }
  }
  return out;
}

inline int neg_count(const SignedPermutation& sigma) {
  const auto v = sigma.values();
  return static_cast<int>(std::count_if(v.begin(), v.end(), [](int x) { return x < 0; }));
}

/// T_i: swap the values at positions i and i+1.
inline SignedPermutation apply_adjacent_transposition(const SignedPermutation& sigma, int i) {
  const int n = sigma.size();
  if (i < 1 || i > n - 1)
    throw InvalidArgument("adjacent transposition index " + std::to_string(i) +
                          " outside [1, " + std::to_string(n - 1) + "]");
  std::vector<int> v(sigma.values().begin(), sigma.values().end());
  std::swap(v[static_cast<std::size_t>(i - 1)], v[static_cast<std::size_t>(i)]);
  return SignedPermutation(std::move(v));
}

/// sigma'(1) = -sigma(1), sigma'(i) = sigma(i) otherwise.
inline SignedPermutation negate_first(const SignedPermutation& sigma) {
  std::vector<int> v(sigma.values().begin(), sigma.values().end());
  v.front() = -v.front();
  return SignedPermutation(std::move(v));
}

/// (a,b)-pairing: the entries carrying +-a and +-b exchange magnitudes while
/// each keeps the sign already sitting at its position.
inline SignedPermutation ab_pair(const SignedPermutation& sigma, int a, int b) {
  const int n = sigma.size();
  if (a == b || a < 1 || b < 1 || a > n || b > n)
    throw InvalidArgument("ab_pair: need distinct a, b in [1, N]");
  std::vector<int> v(sigma.values().begin(), sigma.values().end());
  for (int& x : v) {
    const int m = std::abs(x);
    const int sign = x < 0 ? -1 : 1;
    if (m == a) x = sign * b;
    else if (m == b) x = sign * a;
  }
  return SignedPermutation(std::move(v));
}

}  // namespace halfline
