#include <gtest/gtest.h>

#include <sstream>

#include "leafavg/polynomial_io.hpp"
#include "leafavg/separation.hpp"

using namespace leafavg;

namespace {

using Q = Rational;

std::vector<Polynomial<double>> gens(std::initializer_list<const char*> texts, std::size_t dim) {
  std::vector<Polynomial<double>> out;
  for (const char* t : texts) out.push_back(parse_polynomial<double>(t, dim));
  return out;
}

const auto kHopf = {"x1^2 + x2^2", "x3^2 + x4^2", "x1*x3 + x2*x4", "x1*x4 - x2*x3"};

FiniteGroupModel<Q> b2() {
  return group_closure<Q>({Matrix<Q>(2, 2, {Q(-1), 0, 0, 1}), Matrix<Q>(2, 2, {0, Q(1), Q(1), 0})});
}

IsoparametricModel g2() {
  return IsoparametricModel::admit(parse_polynomial<Q>("x1^2 + x2^2 - x3^2 - x4^2", 4), 2);
}

SeparationOptions opts(std::size_t n = 300) {
  SeparationOptions o;
  o.num_pairs = n;
  o.seed = 77;
  return o;
}

}  // namespace

TEST(Rho, HopfValues) {
  const auto g = gens(kHopf, 4);
  EXPECT_EQ(rho_eval(g, std::vector<double>{1, 0, 0, 0}), (std::vector<double>{1, 0, 0, 0}));
  EXPECT_EQ(rho_eval(g, std::vector<double>{0, 0, 0, 0}), (std::vector<double>{0, 0, 0, 0}));
  // Every generator is quadratic: rho(l x) = l^2 rho(x).
  const std::vector<double> x{0.3, -0.2, 0.9, 0.1}, y{0.6, -0.4, 1.8, 0.2};
  const auto rx = rho_eval(g, x), ry = rho_eval(g, y);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(ry[i], 4 * rx[i], 1e-14);
  // Image of the sphere lies on rho3^2 + rho4^2 = rho1 rho2.
  EXPECT_NEAR(rx[2] * rx[2] + rx[3] * rx[3], rx[0] * rx[1], 1e-15);
  EXPECT_THROW(rho_eval(g, std::vector<double>{1, 0, 0}), Error);
}

TEST(Separation, HopfPasses) {
  const TorusModel hopf({{1}, {1}}, 0);
  const auto c = separation_test(hopf, gens(kHopf, 4), opts(), "hopf");
  EXPECT_TRUE(c.pass);
  EXPECT_EQ(c.failure_count, 0u);
  EXPECT_GT(c.margin_ratio, 10.0);
  EXPECT_GE(c.distinct_pairs, 300u);
  EXPECT_GE(c.same_pairs, 300u);
  EXPECT_FALSE(c.bins.empty());
  std::size_t binned = 0;
  for (const auto& b : c.bins) binned += b.count;
  EXPECT_EQ(binned, c.distinct_pairs);
}

TEST(Separation, RadiusAloneFailsOnTwoTorus) {
  const TorusModel t2({{1, 0}, {0, 1}}, 0);
  const auto c = separation_test(t2, gens({"x1^2 + x2^2 + x3^2 + x4^2"}, 4), opts(), "r2");
  EXPECT_FALSE(c.pass);
  EXPECT_GT(c.failure_count, 300u);
  EXPECT_LE(c.failures.size(), 20u);
  bool found = false;
  for (const auto& f : c.failures)
    if (f.kind == "distinct_collision" && f.p == std::vector<double>{1, 0, 0, 0} &&
        f.q == std::vector<double>{0, 0, 1, 0})
      found = true;
  EXPECT_TRUE(found);
  EXPECT_TRUE(separation_test(t2, gens({"x1^2 + x2^2", "x3^2 + x4^2"}, 4), opts()).pass);
}

TEST(Separation, DroppingAGeneratorIsDetected) {
  const auto g = b2();
  EXPECT_TRUE(separation_test(g, gens({"x1^2 + x2^2", "x1^2*x2^2"}, 2), opts()).pass);
  EXPECT_FALSE(separation_test(g, gens({"x1^2 + x2^2"}, 2), opts()).pass);
  const auto m = g2();
  EXPECT_TRUE(separation_test(m, gens({"x1^2 + x2^2", "x3^2 + x4^2"}, 4), opts()).pass);
  EXPECT_FALSE(separation_test(m, gens({"x1^2 + x2^2 + x3^2 + x4^2"}, 4), opts()).pass);
}

TEST(Separation, SameLeafDiscrepancyForNonBasicGenerator) {
  const TorusModel hopf({{1}, {1}}, 0);
  const auto c = separation_test(hopf, gens({"x1^2"}, 4), opts(50));
  EXPECT_FALSE(c.pass);
  ASSERT_FALSE(c.failures.empty());
  bool same = false;
  for (const auto& f : c.failures) same |= f.kind == "same_leaf_discrepancy";
  EXPECT_TRUE(same);
}

TEST(Separation, DeterministicForSeed) {
  const TorusModel hopf({{1}, {1}}, 0);
  const auto a = separation_test(hopf, gens(kHopf, 4), opts(100));
  const auto b = separation_test(hopf, gens(kHopf, 4), opts(100));
  EXPECT_EQ(a.max_same_discrepancy, b.max_same_discrepancy);
  EXPECT_EQ(a.min_distinct_distance, b.min_distinct_distance);
}

TEST(Separation, ImpossibleDistanceRunsOutOfRejections) {
  const TorusModel hopf({{1}, {1}}, 0);
  auto o = opts(5);
  o.min_leaf_distance = 10.0;
  o.max_rejections = 100;
  try {
    separation_test(hopf, gens(kHopf, 4), o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientDistinctPairs);
  }
}

TEST(Export, ColumnsAndValues) {
  const TorusModel hopf({{1}, {1}}, 0);
  const auto g = gens(kHopf, 4);
  const auto t = quotient_image_export(hopf, g, 25, 3);
  EXPECT_EQ(t.header, (std::vector<std::string>{"x1", "x2", "x3", "x4", "rho1", "rho2", "rho3", "rho4", "radius1",
                                                "radius2"}));
  ASSERT_EQ(t.rows.size(), 25u);
  for (const auto& r : t.rows) {
    EXPECT_NEAR(r[4] + r[5], 1.0, 1e-12);
    EXPECT_NEAR(r[6] * r[6] + r[7] * r[7], r[4] * r[5], 1e-12);
    EXPECT_NEAR(r[8] * r[8], r[4], 1e-12);
  }
  const auto csv = to_csv(t);
  std::istringstream in(csv);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 26u);
  EXPECT_EQ(csv, to_csv(quotient_image_export(hopf, g, 25, 3)));
}

TEST(Export, LevelLabelAndEmptyTable) {
  const auto m = g2();
  const auto t = quotient_image_export(m, gens({"x1^2 + x2^2"}, 4), 10, 1);
  EXPECT_EQ(t.header.back(), "level");
  for (const auto& r : t.rows) EXPECT_NEAR(r[5], 2 * r[4] - 1, 1e-12);
  const auto empty = quotient_image_export(b2(), gens({"x1^2 + x2^2"}, 2), 0, 1);
  EXPECT_EQ(to_csv(empty), "x1,x2,rho1\n");
}
