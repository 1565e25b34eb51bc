#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "leafavg/finite_group.hpp"
#include "leafavg/isoparametric.hpp"
#include "leafavg/polynomial_io.hpp"
#include "leafavg/random_polynomial.hpp"
#include "leafavg/torus.hpp"

using namespace leafavg;

namespace {

using Q = Rational;

Matrix<Q> M2(int a, int b, int c, int d) { return Matrix<Q>(2, 2, {Q(a), Q(b), Q(c), Q(d)}); }

Polynomial<Q> P(const char* s, std::size_t dim) { return parse_polynomial<Q>(s, dim); }

// Rotates plane k of x by k-th angle.
std::vector<double> rotate_planes(std::vector<double> x, const std::vector<double>& angles) {
  for (std::size_t k = 0; k < angles.size(); ++k) {
    const double c = std::cos(angles[k]), s = std::sin(angles[k]);
    const double a = x[2 * k], b = x[2 * k + 1];
    x[2 * k] = c * a - s * b;
    x[2 * k + 1] = s * a + c * b;
  }
  return x;
}

}  // namespace

TEST(FiniteGroup, ClosureOrders) {
  EXPECT_EQ(group_closure<Q>({M2(-1, 0, 0, -1)}).order(), 2u);
  EXPECT_EQ(group_closure<Q>({M2(0, -1, 1, 0)}).order(), 4u);
  EXPECT_EQ(group_closure<Q>({M2(-1, 0, 0, 1), M2(0, 1, 1, 0)}).order(), 8u);
  // Signed permutations of three coordinates.
  const Matrix<Q> s(3, 3, {Q(-1), 0, 0, 0, 1, 0, 0, 0, 1});
  const Matrix<Q> t(3, 3, {0, 1, 0, 1, 0, 0, 0, 0, 1});
  const Matrix<Q> c(3, 3, {0, 0, 1, 1, 0, 0, 0, 1, 0});
  EXPECT_EQ(group_closure<Q>({s, t, c}).order(), 48u);
}

TEST(FiniteGroup, RejectsBadGenerators) {
  try {
    group_closure<Q>({M2(2, 0, 0, 1)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonOrthogonalGenerator);
  }
  try {
    group_closure<Q>({M2(0, -1, 1, 0)}, {.max_group_size = 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GroupTooLarge);
  }
}

TEST(FiniteGroup, ReynoldsExamples) {
  const auto c4 = group_closure<Q>({M2(0, -1, 1, 0)});
  EXPECT_EQ(reynolds(c4, P("x1^2", 2)), P("1/2*x1^2 + 1/2*x2^2", 2));
  EXPECT_TRUE(reynolds(c4, P("x1*x2", 2)).is_zero());
  EXPECT_EQ(reynolds(c4, P("x1^3*x2", 2)), P("1/2*x1^3*x2 - 1/2*x1*x2^3", 2));
  const auto minus = group_closure<Q>({M2(-1, 0, 0, -1)});
  EXPECT_TRUE(reynolds(minus, P("x1^3 + x1*x2^2", 2)).is_zero());
  EXPECT_EQ(reynolds(minus, P("x1*x2", 2)), P("x1*x2", 2));
}

TEST(FiniteGroup, ReynoldsMatchesOrbitMeanPointwise) {
  const auto b2 = group_closure<Q>({M2(-1, 0, 0, 1), M2(0, 1, 1, 0)});
  std::mt19937_64 rng(3);
  const auto f = random_homogeneous<Q>(2, 4, 5, rng);
  const auto rf = to_floating(reynolds(b2, f));
  const auto fd = to_floating(f);
  const std::vector<double> x{0.6, -0.8};
  double mean = 0.0;
  for (const auto& g : b2.elements()) mean += fd.eval(g.apply<double>(x));
  EXPECT_NEAR(rf.eval(x), mean / 8.0, 1e-12);
}

TEST(FiniteGroup, SameLeafAndMates) {
  const auto c4 = group_closure<Q>({M2(0, -1, 1, 0)});
  const std::vector<double> p{0.6, 0.8}, q{-0.8, 0.6}, r{0.8, 0.6};
  EXPECT_TRUE(same_leaf(c4, p, q, 1e-12));
  EXPECT_FALSE(same_leaf(c4, p, r, 1e-3));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10; ++i) EXPECT_LT(leaf_distance(c4, p, leaf_mate(c4, p, rng)), 1e-14);
}

TEST(Torus, ReynoldsMatchesCircleQuadrature) {
  const TorusModel hopf({{1}, {1}}, 0);
  std::mt19937_64 rng(11);
  const std::vector<double> x{0.1, -0.5, 0.7, 0.3};
  for (unsigned d : {2u, 3u, 4u}) {
    const auto f = to_floating(random_homogeneous<Q>(4, d, 6, rng));
    const auto rf = reynolds(hopf, f);
    // Equispaced quadrature is exact for trigonometric polynomials of degree < 64.
    double mean = 0.0;
    for (int k = 0; k < 64; ++k) {
      const double th = 2 * std::numbers::pi * k / 64;
      mean += f.eval(rotate_planes(x, {th, th}));
    }
    EXPECT_NEAR(rf.eval(x), mean / 64, 1e-12) << "degree " << d;
  }
}

TEST(Torus, ReynoldsExamples) {
  const TorusModel t2({{1, 0}, {0, 1}}, 0);
  EXPECT_EQ(reynolds(t2, P("x1^2", 4)), P("1/2*x1^2 + 1/2*x2^2", 4));
  EXPECT_TRUE(reynolds(t2, P("x1*x3", 4)).is_zero());
  const TorusModel hopf({{1}, {1}}, 0);
  EXPECT_EQ(reynolds(hopf, P("x1*x3", 4)), P("1/2*x1*x3 + 1/2*x2*x4", 4));
  // Fixed coordinate passes through.
  const TorusModel fixed({{1}}, 1);
  EXPECT_EQ(reynolds(fixed, P("x3^2 + x1*x3", 3)), P("x3^2", 3));
}

TEST(Torus, SameLeafUsesWeightLattice) {
  const TorusModel hopf({{1}, {1}}, 0);
  const std::vector<double> p{0.5, 0.5, 0.5, -0.5};
  EXPECT_TRUE(same_leaf(hopf, p, rotate_planes(p, {1.0, 1.0}), 1e-10));
  EXPECT_FALSE(same_leaf(hopf, p, rotate_planes(p, {1.0, 0.0}), 1e-6));
  const TorusModel t2({{1, 0}, {0, 1}}, 0);
  EXPECT_TRUE(same_leaf(t2, p, rotate_planes(p, {1.0, 0.0}), 1e-10));
  const TorusModel weighted({{1}, {2}}, 0);
  // theta acts as (e^{i th}, e^{2 i th}): phase pair (a, 2a) only.
  EXPECT_TRUE(same_leaf(weighted, p, rotate_planes(p, {0.3, 0.6}), 1e-10));
  EXPECT_FALSE(same_leaf(weighted, p, rotate_planes(p, {0.3, 0.3}), 1e-6));
  std::mt19937_64 rng(2);
  for (int i = 0; i < 10; ++i) EXPECT_LT(leaf_distance(weighted, p, leaf_mate(weighted, p, rng)), 1e-12);
}

TEST(Torus, IntegerLeftKernel) {
  // u^T [[1],[1]] = 0  ->  u = +-(1, -1).
  const auto k = integer_left_kernel({{1}, {1}});
  ASSERT_EQ(k.size(), 1u);
  EXPECT_EQ(std::llabs(k[0][0]), 1);
  EXPECT_EQ(k[0][0] + k[0][1], 0);
  const auto k2 = integer_left_kernel({{1}, {2}});
  ASSERT_EQ(k2.size(), 1u);
  EXPECT_EQ(k2[0][0] + 2 * k2[0][1], 0);
  EXPECT_EQ(std::llabs(k2[0][1]), 1);
  EXPECT_TRUE(integer_left_kernel({{1, 0}, {0, 1}}).empty());
}

TEST(Munzner, AdmitsKnownExamples) {
  EXPECT_EQ(validate_munzner(P("x3", 3), 1).constant, Q(0));
  EXPECT_EQ(validate_munzner(P("x1^2 + x2^2 - x3^2 - x4^2", 4), 2).constant, Q(0));
  EXPECT_EQ(validate_munzner(P("x1^2 - x2^2 - x3^2", 3), 2).constant, Q(-2));
  EXPECT_NO_THROW(validate_munzner(P("x1^3 - 3*x1*x2^2", 2), 3));
  // Cartan's g = 3 example on R^5 has a sqrt(3) coefficient.
  Polynomial<double> f5 = parse_polynomial<double>(
      "x5^3 + 1.5*x5*x1^2 + 1.5*x5*x2^2 - 3*x5*x3^2 - 3*x5*x4^2", 5);
  const double s = 1.5 * std::sqrt(3.0);
  f5 += s * parse_polynomial<double>("x4*x1^2 - x4*x2^2 + 2*x1*x2*x3", 5);
  EXPECT_NO_THROW(validate_munzner(f5, 3, 1e-12));
}

TEST(Munzner, RejectsSabotage) {
  try {
    validate_munzner(P("x1^2", 3), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotCartanMunzner);
    EXPECT_NE(std::string(e.what()).find("x2^2"), std::string::npos);
  }
  EXPECT_THROW(validate_munzner(P("x1^2 + x2", 2), 2), Error);
  EXPECT_THROW(validate_munzner(P("x1*x2", 2), 2), Error);
}

TEST(Isoparametric, LevelsAndMates) {
  const auto m = IsoparametricModel::admit(P("x1^2 + x2^2 - x3^2 - x4^2", 4), 2);
  const double c = std::sqrt(0.5);
  const std::vector<double> p{c, 0, c, 0}, q{0, c, 0, -c}, r{1, 0, 0, 0};
  EXPECT_TRUE(same_leaf(m, p, q, 1e-12));
  EXPECT_FALSE(same_leaf(m, p, r, 1e-3));
  EXPECT_NEAR(leaf_distance(m, p, r), 1.0, 1e-15);
  std::mt19937_64 rng(4);
  const std::vector<double> x{0.5, 0.1, std::sqrt(0.74), 0.0};
  for (int i = 0; i < 10; ++i) {
    const auto y = leaf_mate(m, x, rng);
    EXPECT_NEAR(norm(y), 1.0, 1e-12);
    EXPECT_LT(leaf_distance(m, x, y), 1e-12);
  }
}
