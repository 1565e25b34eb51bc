#include <gtest/gtest.h>

#include "leafavg/basic_ring.hpp"
#include "leafavg/polynomial_io.hpp"

using namespace leafavg;

namespace {

using Q = Rational;

Polynomial<Q> PQ(const char* s, std::size_t dim) { return parse_polynomial<Q>(s, dim); }

Matrix<Q> M2(int a, int b, int c, int d) { return Matrix<Q>(2, 2, {Q(a), Q(b), Q(c), Q(d)}); }

FiniteGroupModel<Q> c4() { return group_closure<Q>({M2(0, -1, 1, 0)}); }
FiniteGroupModel<Q> b2() { return group_closure<Q>({M2(-1, 0, 0, 1), M2(0, 1, 1, 0)}); }
FiniteGroupModel<Q> antipodal() { return group_closure<Q>({M2(-1, 0, 0, -1)}); }
FiniteGroupModel<Q> b3() {
  const Matrix<Q> s(3, 3, {Q(-1), 0, 0, 0, 1, 0, 0, 0, 1});
  const Matrix<Q> t(3, 3, {0, 1, 0, 1, 0, 0, 0, 0, 1});
  const Matrix<Q> c(3, 3, {0, 0, 1, 1, 0, 0, 0, 1, 0});
  return group_closure<Q>({s, t, c});
}

// Number of ways to write d as a sum of the given generator degrees (free
// invariant rings).
std::size_t free_ring_dimension(const std::vector<unsigned>& degrees, unsigned d) {
  std::vector<std::size_t> ways(d + 1, 0);
  ways[0] = 1;
  for (unsigned g : degrees)
    for (unsigned k = g; k <= d; ++k) ways[k] += ways[k - g];
  return ways[d];
}

// C4 acts on z = x1 + i x2 by i: z^a zbar^b is invariant iff a = b mod 4.
std::size_t c4_dimension(unsigned d) {
  std::size_t n = 0;
  for (unsigned a = 0; a <= d; ++a)
    if ((static_cast<int>(a) - static_cast<int>(d - a)) % 4 == 0) ++n;
  return n;
}

std::vector<std::size_t> ranks(const Averager<Q>& a, std::size_t dim, unsigned cap) {
  std::vector<std::size_t> out;
  for (unsigned d = 1; d <= cap; ++d) out.push_back(basic_subspace(a, dim, d).rank());
  return out;
}

}  // namespace

TEST(BasicSubspace, DimensionsMatchCountingFormulas) {
  const auto gc4 = c4();
  const auto gb2 = b2();
  const auto gb3 = b3();
  const auto gm = antipodal();
  const auto rc4 = ranks(make_averager(gc4), 2, 8);
  const auto rb2 = ranks(make_averager(gb2), 2, 8);
  const auto rb3 = ranks(make_averager(gb3), 3, 6);
  const auto rm = ranks(make_averager(gm), 2, 6);
  for (unsigned d = 1; d <= 8; ++d) {
    EXPECT_EQ(rc4[d - 1], c4_dimension(d)) << d;
    EXPECT_EQ(rb2[d - 1], free_ring_dimension({2, 4}, d)) << d;
    if (d <= 6) {
      EXPECT_EQ(rb3[d - 1], free_ring_dimension({2, 4, 6}, d)) << d;
      EXPECT_EQ(rm[d - 1], d % 2 ? 0u : d + 1) << d;
    }
  }
  EXPECT_EQ(rc4[1], 1u);
}

TEST(BasicSubspace, TorusDimensions) {
  const TorusModel t2({{1, 0}, {0, 1}}, 0);
  const TorusModel hopf({{1}, {1}}, 0);
  const auto rt = ranks(make_averager<Q>(t2), 4, 4);
  const auto rh = ranks(make_averager<Q>(hopf), 4, 4);
  for (unsigned d = 1; d <= 4; ++d) {
    EXPECT_EQ(rt[d - 1], d % 2 ? 0u : d / 2 + 1) << d;
    const std::size_t k = d / 2 + 1;
    EXPECT_EQ(rh[d - 1], d % 2 ? 0u : k * k) << d;
  }
}

TEST(Molien, MatchesCountingFormulas) {
  const auto mc4 = molien_dimensions(c4(), 8);
  const auto mb2 = molien_dimensions(b2(), 8);
  const auto mb3 = molien_dimensions(b3(), 8);
  const auto mm = molien_dimensions(antipodal(), 8);
  ASSERT_EQ(mc4.size(), 9u);
  EXPECT_EQ(mc4[0], 1u);
  for (unsigned d = 0; d <= 8; ++d) {
    EXPECT_EQ(mc4[d], c4_dimension(d)) << d;
    EXPECT_EQ(mb2[d], free_ring_dimension({2, 4}, d)) << d;
    EXPECT_EQ(mb3[d], free_ring_dimension({2, 4, 6}, d)) << d;
    EXPECT_EQ(mm[d], d % 2 ? 0u : d + 1) << d;
  }
}

TEST(Molien, DeterminantAndSeriesInverse) {
  // det(I - t R) for a quarter turn is 1 + t^2.
  const auto c = det_one_minus_tg(M2(0, -1, 1, 0));
  EXPECT_EQ(c, (std::vector<Q>{1, 0, 1}));
  // 1 / (1 - t) = 1 + t + t^2 + ...
  EXPECT_EQ(series_inverse({Q(1), Q(-1)}, 4), (std::vector<Q>{1, 1, 1, 1, 1}));
}

TEST(Generators, KnownRings) {
  const auto gb2 = b2();
  const auto g = discover_generators(make_averager(gb2), 2, 6);
  ASSERT_EQ(g.generators.size(), 2u);
  EXPECT_EQ(g.generators[0], PQ("x1^2 + x2^2", 2));
  EXPECT_EQ(g.generators[1], PQ("x1^2*x2^2", 2));
  EXPECT_TRUE(g.warnings.empty());

  const auto gm = antipodal();
  const auto a = discover_generators(make_averager(gm), 2, 4);
  EXPECT_EQ(a.generators.size(), 3u);
  EXPECT_EQ(a.degrees(), (std::vector<unsigned>{2, 2, 2}));

  const auto gc4 = c4();
  const auto c = discover_generators(make_averager(gc4), 2, 6);
  EXPECT_EQ(c.degrees(), (std::vector<unsigned>{2, 4, 4}));

  const TorusModel hopf({{1}, {1}}, 0);
  const auto h = discover_generators(make_averager<Q>(hopf), 4, 4);
  EXPECT_EQ(h.degrees(), (std::vector<unsigned>{2, 2, 2, 2}));
  // The Hopf map satisfies rho3^2 + rho4^2 = rho1 rho2 after naming.
  const auto r1 = PQ("x1^2 + x2^2", 4), r2 = PQ("x3^2 + x4^2", 4);
  const auto r3 = PQ("x1*x3 + x2*x4", 4), r4 = PQ("x1*x4 - x2*x3", 4);
  EXPECT_EQ(r3 * r3 + r4 * r4, r1 * r2);
  const auto av = make_averager<Q>(hopf);
  EXPECT_TRUE(verify_generation(av, 4, h.generators, 4).ok());
  EXPECT_TRUE(verify_generation(av, 4, {r1, r2, r3, r4}, 4).ok());
}

TEST(Generators, CapWarningWhenNewGeneratorAtCap) {
  const auto gb3 = b3();
  const auto g = discover_generators(make_averager(gb3), 3, 6);
  EXPECT_EQ(g.degrees(), (std::vector<unsigned>{2, 4, 6}));
  ASSERT_EQ(g.warnings.size(), 1u);
  EXPECT_NE(g.warnings[0].find("DegreeCapillary"), std::string::npos);
}

TEST(Generators, PrefixMonotoneInCap) {
  const auto gc4 = c4();
  const auto a = make_averager(gc4);
  const auto small = discover_generators(a, 2, 3);
  const auto large = discover_generators(a, 2, 6);
  ASSERT_LE(small.generators.size(), large.generators.size());
  for (std::size_t i = 0; i < small.generators.size(); ++i) EXPECT_EQ(small.generators[i], large.generators[i]);
}

TEST(Generation, MissingGeneratorIsAGap) {
  const TorusModel t2({{1, 0}, {0, 1}}, 0);
  const auto a = make_averager<Q>(t2);
  const auto rep = verify_generation(a, 4, {radius_squared<Q>(4)}, 4);
  EXPECT_FALSE(rep.ok());
  EXPECT_FALSE(rep.degrees[1].pass);
  try {
    rep.throw_if_failed();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GenerationGap);
  }
  EXPECT_TRUE(verify_generation(a, 4, {PQ("x1^2 + x2^2", 4), PQ("x3^2 + x4^2", 4)}, 4).ok());
}

TEST(Generation, EmptySetIsVacuousWhenNothingToGenerate) {
  const auto gm = antipodal();
  const auto a = make_averager(gm);
  EXPECT_TRUE(verify_generation(a, 2, {}, 1).ok());
  EXPECT_FALSE(verify_generation(a, 2, {}, 2).ok());
}

TEST(Invariance, NonBasicGeneratorFlagged) {
  const auto gc4 = c4();
  const auto a = make_averager(gc4);
  const auto rep = verify_invariance(a, {PQ("x1^2 + x2^2", 2), PQ("x1^2", 2)});
  ASSERT_EQ(rep.pass.size(), 2u);
  EXPECT_TRUE(rep.pass[0]);
  EXPECT_FALSE(rep.pass[1]);
  EXPECT_THROW(rep.throw_if_failed({"a", "b"}), Error);
}

TEST(FloatingRank, AgreesWithExactAndDetectsInstability) {
  const auto g = to_floating(b3());
  const auto a = make_averager(g);
  for (unsigned d = 1; d <= 6; ++d)
    EXPECT_EQ(basic_subspace(a, 3, d).rank(), free_ring_dimension({2, 4, 6}, d)) << d;
  const auto b = basic_subspace(a, 3, 4);
  ASSERT_FALSE(b.span.singular_values.empty());
  const double rel = b.span.singular_values.front() / b.span.reference;
  try {
    basic_subspace(a, 3, 4, {.tol_rank = rel});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RankUnstable);
  }
  EXPECT_EQ(basic_subspace(a, 3, 4, {.tol_rank = 1e2}).rank(), 0u);
}

TEST(FitRing, IsoparametricDegreeTwo) {
  EstimatorParams p;
  p.sample_count = 200000;
  const auto m = IsoparametricModel::admit(PQ("x1^2 + x2^2 - x3^2 - x4^2", 4), 2, p);
  FitOptions o;
  o.seed = 31;
  const auto a = make_averager(m, o);
  const auto g = discover_generators(a, 4, 2, ring_options_for(a.engine));
  EXPECT_EQ(g.basic_dimensions, (std::vector<std::size_t>{0, 2}));
  ASSERT_EQ(g.generators.size(), 2u);
  // Both generators lie in span{r^2, F} = span{x1^2 + x2^2, x3^2 + x4^2}.
  for (const auto& gen : g.generators) {
    EXPECT_EQ(gen.coefficient(Exponents{2, 0, 0, 0}), gen.coefficient(Exponents{0, 2, 0, 0}));
    EXPECT_EQ(gen.coefficient(Exponents{0, 0, 2, 0}), gen.coefficient(Exponents{0, 0, 0, 2}));
    EXPECT_EQ(gen.num_terms() % 2, 0u);
  }
}
