#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "halfline/contour_quad.hpp"

using namespace halfline;

namespace {

cplx circle_rule(const CircleContour& c, int m, auto&& f) {
  cplx acc = 0.0;
  for (const auto& nd : circle_nodes(c, m)) acc += nd.weight * f(nd.node);
  return acc;
}

double line_rule(const LineGrid& g, auto&& f) {
  double acc = 0.0;
  for (const auto& nd : line_nodes(g)) acc += nd.weight * f(nd.node);
  return acc;
}

}  // namespace

TEST(CircleRule, MonomialsAreExact) {
  const CircleContour c(0.0, 1.7);
  for (int j = -10; j <= 10; ++j) {
    const cplx got = circle_rule(c, 16, [&](cplx x) { return std::pow(x, j); });
    const double scale = std::max(1.0, std::pow(1.7, j + 1));
    EXPECT_NEAR(std::abs(got - (j == -1 ? 1.0 : 0.0)), 0.0, 1e-14 * scale) << "j=" << j;
  }
}

TEST(CircleRule, ResidueOfExpOverXi) {
  for (double r : {0.5, 1.0, 2.0}) {
    // Aliasing error is about R^M / M!.
    const cplx got = circle_rule(CircleContour(0.0, r), 32, [](cplx x) { return std::exp(x) / x; });
    EXPECT_NEAR(std::abs(got - 1.0), 0.0, 1e-12);
  }
  EXPECT_NEAR(std::abs(circle_rule(CircleContour(0.0, 0.5), 16, [](cplx x) { return std::exp(x) / x; }) - 1.0), 0.0,
              1e-15);
  // Off-centre circle enclosing the pole at 1.
  const cplx got = circle_rule(CircleContour(0.8, 0.5), 32, [](cplx x) { return 1.0 / (x - 1.0); });
  EXPECT_NEAR(std::abs(got - 1.0), 0.0, 1e-12);
}

TEST(CircleRule, Validation) {
  EXPECT_THROW(CircleContour(0.0, 0.0), InvalidArgument);
  EXPECT_THROW(CircleContour(0.0, -1.0), InvalidArgument);
  EXPECT_THROW(circle_nodes(CircleContour(0.0, 1.0), 7), InvalidArgument);
}

TEST(LineRule, Gaussian) {
  const double got = line_rule(LineGrid(8.0, 0.1), [](double k) { return std::exp(-k * k); });
  EXPECT_NEAR(got, std::sqrt(std::numbers::pi) / (2.0 * std::numbers::pi), 1e-14);
}

TEST(LineRule, OddIntegrandVanishes) {
  // Nodes and weights are exactly symmetric, so summing mirrored pairs
  // first cancels exactly.
  auto f = [](double k) { return k * std::exp(-k * k) * (1.0 + k * k); };
  const auto nodes = line_nodes(LineGrid(8.0, 0.1));
  double paired = 0.0;
  for (std::size_t m = 0, n = nodes.size(); m < n / 2 + 1; ++m)
    paired += nodes[m].weight * f(nodes[m].node) + nodes[n - 1 - m].weight * f(nodes[n - 1 - m].node);
  EXPECT_EQ(paired, 0.0);
  EXPECT_NEAR(line_rule(LineGrid(8.0, 0.1), f), 0.0, 1e-16);
}

TEST(LineRule, NodesAreSymmetric) {
  const auto nodes = line_nodes(LineGrid(3.0, 0.25));
  ASSERT_EQ(nodes.size(), 25u);
  for (std::size_t m = 0; m < nodes.size(); ++m) EXPECT_EQ(nodes[m].node, -nodes[nodes.size() - 1 - m].node);
  EXPECT_EQ(nodes.front().node, -3.0);
}

TEST(LineRule, HeatKernel) {
  const double tau = 1.0, x = 1.3;
  const LineGrid g(10.0, 0.05);
  std::complex<double> acc = 0.0;
  for (const auto& nd : line_nodes(g)) acc += nd.weight * std::exp(cplx(-tau * nd.node * nd.node, nd.node * x));
  const double expect = std::exp(-x * x / (4.0 * tau)) / std::sqrt(4.0 * std::numbers::pi * tau);
  EXPECT_NEAR(acc.real(), expect, 1e-13);
  EXPECT_NEAR(acc.imag(), 0.0, 1e-15);
}

TEST(LineRule, Validation) {
  EXPECT_THROW(LineGrid(1.0, 0.3), InvalidArgument);
  EXPECT_THROW(LineGrid(1.0, 0.25), InvalidArgument);  // K/h = 4 < 8
  EXPECT_THROW(LineGrid(-1.0, 0.1), InvalidArgument);
  EXPECT_NO_THROW(LineGrid(1.0, 0.125));
}

TEST(RadiiScheme, Validation) {
  EXPECT_NO_THROW(RadiiScheme(0.0, {1.0, 1.1, 1.2}));
  EXPECT_THROW(RadiiScheme(0.0, {}), InvalidArgument);
  EXPECT_THROW(RadiiScheme(0.0, {1.0, 1.0}), InvalidArgument);
  EXPECT_THROW(RadiiScheme(0.0, {1.0, 0.9}), InvalidArgument);
  EXPECT_THROW(RadiiScheme(0.0, {1.0, 1.01}), InvalidArgument);
  EXPECT_NO_THROW(RadiiScheme(0.0, {1.0, 1.01}, 0.01));
  EXPECT_THROW(RadiiScheme(0.0, {0.0, 1.0}), InvalidArgument);
}

TEST(RadiiScheme, ScalingHelpers) {
  const RadiiScheme r(0.5, {2.0, 3.0, 5.0});
  const auto s = r.scaled(1.1);
  EXPECT_DOUBLE_EQ(s.radii()[2], 5.5);
  EXPECT_EQ(s.center(), cplx(0.5));
  const auto g = r.with_gaps_scaled(2.0);
  EXPECT_DOUBLE_EQ(g.radii()[0], 2.0);
  EXPECT_DOUBLE_EQ(g.radii()[1], 4.0);
  EXPECT_DOUBLE_EQ(g.radii()[2], 8.0);
  EXPECT_EQ(r.circle(1).radius, 3.0);
}

TEST(TensorSum, CountsAndOrder) {
  const long n = tensor_sum<long>(3, 5, [](std::span<const int>) { return 1L; });
  EXPECT_EQ(n, 125);
  const long weighted = tensor_sum<long>(2, 4, [](std::span<const int> i) { return long(i[0] * 10 + i[1]); });
  EXPECT_EQ(weighted, 4 * 10 * 6 + 4 * 6);
  EXPECT_THROW(tensor_sum<long>(0, 4, [](std::span<const int>) { return 0L; }), InvalidArgument);
}

TEST(TensorSum, BitIdenticalAcrossThreadCounts) {
  auto f = [](std::span<const int> i) {
    return std::exp(cplx(0.1 * i[0] - 0.37 * i[1], 0.21 * i[2] + 1e-3 * i[0] * i[1]));
  };
  const cplx one = tensor_sum<cplx>(3, 17, f, 1);
  for (int threads : {2, 3, 4, 8, 0}) {
    const cplx many = tensor_sum<cplx>(3, 17, f, threads);
    EXPECT_EQ(one.real(), many.real()) << threads;
    EXPECT_EQ(one.imag(), many.imag()) << threads;
  }
}

TEST(Adaptive, ConvergesOnSmoothIntegrand) {
  QuadOptions o;
  o.tol = 1e-12;
  const std::vector<CircleContour> cs{{0.0, 1.0}, {0.0, 1.5}};
  const auto res = adaptive_eval([](std::span<const cplx> x) { return std::exp(x[0] + 2.0 * x[1]) / (x[0] * x[1] * x[1]); },
                                 cs, o);
  EXPECT_NEAR(std::abs(res.value - 2.0), 0.0, 1e-12);
  EXPECT_LT(res.error_estimate, 1e-12);
  EXPECT_GE(res.levels, 2);
}

TEST(Adaptive, LineIntegral) {
  QuadOptions o;
  o.tol = 1e-12;
  const auto res = adaptive_eval_line([](std::span<const double> k) { return cplx(std::exp(-k[0] * k[0] - k[1] * k[1])); },
                                      2, 8.0, o);
  EXPECT_NEAR(res.value.real(), 0.25 / std::numbers::pi, 1e-13);
}

TEST(Adaptive, RaisesWithLastTwoEstimates) {
  QuadOptions o;
  o.initial_points = 8;
  o.max_points = 64;
  o.tol = 1e-14;
  // Never settles: the level value keeps moving by 1/M.
  try {
    adaptive_refine([](int m) { return cplx(1.0 / m); }, o);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.points(), 64);
    EXPECT_DOUBLE_EQ(e.last().real(), 1.0 / 64);
    EXPECT_DOUBLE_EQ(e.previous().real(), 1.0 / 32);
  }
}

TEST(Adaptive, RejectsNonFinite) {
  QuadOptions o;
  EXPECT_THROW(adaptive_refine([](int) { return cplx(NAN); }, o), ConvergenceError);
}

TEST(Adaptive, OptionValidation) {
  QuadOptions o;
  o.initial_points = 4;
  EXPECT_THROW(o.validate(), InvalidArgument);
  o = {};
  o.max_points = 8;
  EXPECT_THROW(o.validate(), InvalidArgument);
  o = {};
  o.tol = 0.0;
  EXPECT_THROW(o.validate(), InvalidArgument);
}

TEST(AliasGuard, CircleStartClearsTheDegree) {
  QuadOptions o;
  EXPECT_EQ(guarded_start(o, 3).initial_points, 16);
  EXPECT_EQ(guarded_start(o, 8).initial_points, 32);
  EXPECT_EQ(guarded_start(o, 40).initial_points, 128);
  o.alias_guard = false;
  EXPECT_EQ(guarded_start(o, 40).initial_points, 16);
  o = {};
  o.max_points = 64;
  EXPECT_THROW(guarded_start(o, 40), ConvergenceError);
}

TEST(AliasGuard, CircleMonomialNeedsTheGuard) {
  // The residue of z^{-21} e^z is 1/20!; at M = 16 the rule also picks up
  // the z^4 coefficient 1/4!.
  auto f = [](cplx z) { return std::pow(z, -21) * std::exp(z); };
  const CircleContour c(0.0, 1.0);
  auto level = [&](int m) {
    cplx s = 0.0;
    for (const auto& nd : circle_nodes(c, m)) s += nd.weight * f(nd.node);
    return s;
  };
  const double exact = 1.0 / std::tgamma(21.0);
  QuadOptions o;
  o.tol = 1e-12;
  const auto guarded = adaptive_refine(level, guarded_start(o, 21));
  EXPECT_NEAR(guarded.value.real(), exact, 1e-15);
  EXPECT_GT(std::abs(level(16).real() - exact), 1e-3);
}

TEST(AliasGuard, LineStartClearsTheReach) {
  QuadOptions o;
  // 2 cutoff / M <= 2 pi / (2 reach + tail)
  const auto g = guarded_line_start(o, 100.0, 2.0, 0.5);
  const double h = 200.0 / g.initial_points;
  EXPECT_LE(h, 2.0 * std::numbers::pi / 4.5);
  EXPECT_GT(2.0 * h, 2.0 * std::numbers::pi / 4.5);
  EXPECT_EQ(guarded_line_start(o, 1.0, 0.1, 0.1).initial_points, 16);
  o.alias_guard = false;
  EXPECT_EQ(guarded_line_start(o, 100.0, 2.0, 0.5).initial_points, 16);
}

TEST(Adaptive, RoundoffFloorStopsRefinement) {
  // Successive levels move by ~1e-11 on a sum of magnitude 1e5: below
  // the floor 1000 eps 1e5 ~ 2e-8, so refinement stops at the first pair.
  QuadOptions o;
  o.tol = 1e-14;
  const auto r = adaptive_refine([](int m) { return LevelValue{cplx(1.0 + 1e-9 / m), 1e5}; }, o);
  EXPECT_EQ(r.points_used, 32);
  EXPECT_GT(r.roundoff_floor, r.error_estimate);
  EXPECT_NEAR(r.roundoff_floor, kRoundoffUlps * std::numeric_limits<double>::epsilon() * 1e5, 1e-20);
  // Without a magnitude the same levels never meet tol.
  o.max_points = 256;
  EXPECT_THROW(adaptive_refine([](int m) { return cplx(1.0 + 1e-9 / m); }, o), ConvergenceError);
}
