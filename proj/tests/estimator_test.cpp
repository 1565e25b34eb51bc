#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "leafavg/isoparametric.hpp"
#include "leafavg/polynomial_io.hpp"

using namespace leafavg;

namespace {

IsoparametricModel model(const char* F, std::size_t dim, unsigned g, std::uint64_t n = 200000) {
  EstimatorParams p;
  p.sample_count = n;
  return IsoparametricModel::admit(parse_polynomial<Rational>(F, dim), g, p);
}

Polynomial<double> P(const char* s, std::size_t dim) { return parse_polynomial<double>(s, dim); }

// Point on S^3 with F = t for F = |z1|^2 - |z2|^2.
std::vector<double> at_level(double t) {
  const double a = std::sqrt((1 + t) / 2), b = std::sqrt((1 - t) / 2);
  return {a * std::cos(0.4), a * std::sin(0.4), b * std::cos(1.9), b * std::sin(1.9)};
}

}  // namespace

TEST(Estimator, ConstantAveragesToOne) {
  const auto m = model("x1^2 + x2^2 - x3^2 - x4^2", 4, 2);
  const auto e = leaf_average_mc(m, Polynomial<double>::constant(4, 1.0), at_level(0.3), 1);
  EXPECT_NEAR(e.value, 1.0, 1e-12);
  EXPECT_GT(e.effective_samples, 1000.0);
}

TEST(Estimator, MatchesTorusLeafAverages) {
  const auto m = model("x1^2 + x2^2 - x3^2 - x4^2", 4, 2);
  for (double t : {-0.6, 0.0, 0.45}) {
    const std::vector<Polynomial<double>> fs{P("x1^2", 4), P("x1^2 + x2^2 - x3^2 - x4^2", 4), P("x1*x3", 4)};
    const auto e = leaf_average_mc(m, fs, at_level(t), 17);
    // Leaf {|z1|^2 = (1+t)/2}: [x1^2] = (1+t)/4, [F] = t, [x1 x3] = 0.
    EXPECT_NEAR(e[0].value, (1 + t) / 4, 4 * e[0].std_error + 1e-3) << t;
    EXPECT_NEAR(e[1].value, t, 4 * e[1].std_error + 1e-3) << t;
    EXPECT_NEAR(e[2].value, 0.0, 4 * e[2].std_error + 1e-3) << t;
    EXPECT_GT(e[0].std_error, 0.0);
    EXPECT_LT(e[0].std_error, 5e-3);
  }
}

TEST(Estimator, MatchesCircleOfLatitude) {
  const auto m = model("x3", 3, 1);
  const double t = 0.35, s = std::sqrt(1 - t * t);
  const std::vector<double> p{s, 0.0, t};
  const auto e = leaf_average_mc(m, P("x1^2", 3), p, 5);
  EXPECT_NEAR(e.value, s * s / 2, 4 * e.std_error + 1e-3);
}

TEST(Estimator, MatchesDihedralOrbitMean) {
  const auto m = model("x1^3 - 3*x1*x2^2", 2, 3, 400000);
  const double th = 0.3;
  const std::vector<double> p{std::cos(th), std::sin(th)};
  // Leaves are orbits of the dihedral group of order 6: angles +-th + 2 pi k / 3.
  const auto f = P("x1^2 + x1*x2 - 2*x2^3", 2);
  double mean = 0.0;
  for (int k = 0; k < 3; ++k)
    for (double sgn : {1.0, -1.0}) {
      const double a = sgn * th + 2 * std::numbers::pi * k / 3;
      mean += f.eval(std::vector<double>{std::cos(a), std::sin(a)});
    }
  mean /= 6;
  const auto e = leaf_average_mc(m, f, p, 23);
  EXPECT_NEAR(e.value, mean, 4 * e.std_error + 5e-3);
}

TEST(Estimator, RejectsBadPoints) {
  const auto m = model("x1^2 + x2^2 - x3^2 - x4^2", 4, 2, 1000);
  const auto f = P("x1^2", 4);
  try {
    leaf_average_mc(m, f, std::vector<double>{1, 0, 0, 0}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NearSingularLeaf);
  }
  try {
    leaf_average_mc(m, f, std::vector<double>{0.5, 0.5, 0.5, 0.6}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OffSphere);
  }
}

TEST(Estimator, TooFewSamplesNearTheLeaf) {
  EstimatorParams p;
  p.sample_count = 500;
  p.min_ess = 1e6;
  const auto m = IsoparametricModel::admit(parse_polynomial<Rational>("x3", 3), 1, p);
  try {
    leaf_average_mc(m, P("x1^2", 3), std::vector<double>{1, 0, 0}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EffectiveSampleTooSmall);
  }
}

TEST(Estimator, DeterministicAndWorkerIndependent) {
  auto m = model("x1^2 + x2^2 - x3^2 - x4^2", 4, 2, 50000);
  const auto f = P("x1^2*x3^2", 4);
  const auto a = leaf_average_mc(m, f, at_level(0.2), 99);
  const auto b = leaf_average_mc(m, f, at_level(0.2), 99);
  m.params().workers = 3;
  const auto c = leaf_average_mc(m, f, at_level(0.2), 99);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_NEAR(a.value, c.value, 1e-14);
  EXPECT_NE(a.value, leaf_average_mc(m, f, at_level(0.2), 100).value);
}
