#include <gtest/gtest.h>

#include <random>

#include "leafavg/polynomial.hpp"
#include "leafavg/polynomial_io.hpp"
#include "leafavg/random_polynomial.hpp"

using namespace leafavg;

namespace {

Polynomial<Rational> P(const char* s, std::size_t dim) { return parse_polynomial<Rational>(s, dim); }

}  // namespace

TEST(Polynomial, ArithmeticMatchesHandExpansion) {
  const auto a = P("x1 + x2", 2);
  const auto b = P("x1 - x2", 2);
  EXPECT_EQ(a * b, P("x1^2 - x2^2", 2));
  EXPECT_EQ(a.pow(3), P("x1^3 + 3*x1^2*x2 + 3*x1*x2^2 + x2^3", 2));
  EXPECT_TRUE((a - a).is_zero());
  EXPECT_EQ(Rational(1, 2) * a + Rational(1, 2) * b, P("x1", 2));
}

TEST(Polynomial, ParsePrintRoundTrip) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 30; ++i) {
    const auto p = random_homogeneous<Rational>(4, 1 + i % 5, 6, rng);
    EXPECT_EQ(parse_polynomial<Rational>(to_string(p), 4), p) << to_string(p);
  }
  EXPECT_EQ(P("2/3*x1^2*x3 - 1/5", 3).coefficient(Exponents{2, 0, 1}), Rational(2, 3));
}

TEST(Polynomial, ParseRejectsGarbage) {
  for (const char* bad : {"x1^", "x4", "x1 + * x2", "3x", ""}) {
    try {
      parse_polynomial<Rational>(bad, 3);
      ADD_FAILURE() << "accepted '" << bad << "'";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::ParseError) << bad;
    }
  }
}

TEST(Polynomial, EvaluationAgreesWithCompiledForm) {
  std::mt19937_64 rng(9);
  const auto p = to_floating(random_homogeneous<Rational>(3, 4, 8, rng));
  const CompiledPolynomial c(p);
  const std::vector<double> x{0.3, -1.2, 0.7};
  // Independent evaluation straight from the term map.
  double expected = 0.0;
  for (const auto& [e, coef] : p.terms())
    expected += coef * std::pow(x[0], e[0]) * std::pow(x[1], e[1]) * std::pow(x[2], e[2]);
  EXPECT_NEAR(p.eval(x), expected, 1e-12);
  EXPECT_NEAR(c(x), expected, 1e-12);
}

TEST(Polynomial, CalculusIdentities) {
  const auto f = P("x1^3*x2 - 2*x2*x3^2 + x1", 3);
  EXPECT_EQ(derivative(f, 0), P("3*x1^2*x2 + 1", 3));
  EXPECT_EQ(laplacian(f), P("6*x1*x2 - 4*x2", 3));
  // Euler: sum x_i d_i f = sum_d d f_d.
  EXPECT_EQ(euler_derivative(f), P("4*x1^3*x2 - 6*x2*x3^2 + x1", 3));
  const auto r2 = radius_squared<Rational>(3);
  EXPECT_EQ(gradient_dot(r2, r2), Rational(4) * r2);
  EXPECT_EQ(laplacian(r2), Polynomial<Rational>::constant(3, Rational(6)));
}

TEST(Polynomial, ComposeLinearIsSubstitution) {
  // (x1, x2) -> (x2, -x1).
  const std::vector<Rational> rot{0, 1, -1, 0};
  EXPECT_EQ(compose_linear(P("x1^2*x2 + x2", 2), std::span<const Rational>(rot)), P("-x1*x2^2 - x1", 2));
}

TEST(Polynomial, HomogeneousComponentsAndCoefficientVectors) {
  const auto f = P("x1^2 + 3*x1*x2 + x2 + 7", 2);
  const auto parts = homogeneous_components(f);
  ASSERT_EQ(parts.size(), 3u);
  EXPECT_EQ(parts.at(2), P("x1^2 + 3*x1*x2", 2));
  const auto basis = monomial_basis(2, 2);
  ASSERT_EQ(basis.size(), 3u);
  const auto v = coefficient_vector(parts.at(2), basis);
  EXPECT_EQ(from_coefficients<Rational>(2, basis, v), parts.at(2));
  EXPECT_EQ(monomial_basis(4, 3).size(), 20u);
}

TEST(Polynomial, DimensionMismatchThrows) {
  EXPECT_THROW(P("x1", 2) + P("x1", 3), Error);
}
