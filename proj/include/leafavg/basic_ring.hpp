#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "leafavg/averaging.hpp"
#include "leafavg/linalg.hpp"
#include "leafavg/polynomial_io.hpp"
#include "leafavg/rationalize.hpp"

namespace leafavg {

struct RingOptions {
  /// Relative singular-value cutoff for floating pipelines. Ignored in rational mode.
  double tol_rank = 1e-8;
  /// Denominator cap used to snap floating generators to exact coefficients.
  long long max_denominator = 1000;
};

/// Default rank tolerance for statistical (fit) engines.
inline constexpr double kFitRankTolerance = 0.1;
inline constexpr long long kFitMaxDenominator = 12;

inline RingOptions ring_options_for(Engine engine) {
  if (engine == Engine::Exact) return {};
  return {kFitRankTolerance, kFitMaxDenominator};
}

/// Basis of B_d over the degree-d monomials. Exact rows are orthogonal under
/// the sphere inner product but unnormalized; floating rows are orthonormal.
template <class S>
struct SubspaceBasis {
  unsigned degree = 0;
  std::vector<Exponents> monomials;
  Rows<S> gram;
  SpanBasis<S> span;
  /// Coefficient vectors of [x^a] for every degree-d monomial x^a.
  Rows<S> averaged;

  std::size_t rank() const noexcept { return span.rank; }
};

namespace detail {

inline void check_rank_stability(const SpanBasis<double>& span, unsigned d) {
  if (span.singular_values.empty()) return;
  const double smax = span.reference;
  if (smax <= 0.0) return;
  for (double s : span.singular_values) {
    const double rel = s / smax;
    if (rel >= span.tolerance / 3.0 && rel <= span.tolerance * 3.0)
      throw Error(ErrorKind::RankUnstable, "degree " + std::to_string(d) + ": relative singular value " +
                                               format_double(rel) + " within a factor 3 of tol_rank " +
                                               format_double(span.tolerance));
  }
}

}  // namespace detail

template <class S>
SubspaceBasis<S> basic_subspace(const Averager<S>& avg, std::size_t dim, unsigned d, const RingOptions& opts = {}) {
  require(d >= 1, ErrorKind::ConfigError, "basic_subspace needs degree >= 1");
  SubspaceBasis<S> out;
  out.degree = d;
  out.monomials = monomial_basis(dim, d);
  out.gram = sphere_gram<S>(out.monomials);
  std::vector<Polynomial<S>> monos;
  for (const auto& e : out.monomials) monos.push_back(Polynomial<S>::monomial(e, S(1)));
  for (const auto& a : avg.batch(monos)) out.averaged.push_back(coefficient_vector(a, out.monomials));
  if constexpr (ScalarTraits<S>::exact) {
    out.span = span_basis(out.averaged, out.gram);
  } else {
    // Averaging is a contraction, so the monomials themselves set the scale:
    // an image of rank 0 must not be measured against its own noise.
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(detail::to_eigen(out.gram, out.gram.size()),
                                                             Eigen::EigenvaluesOnly);
    const double reference = std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
    out.span = span_basis(out.averaged, out.gram, opts.tol_rank, reference);
    detail::check_rank_stability(out.span, d);
  }
  return out;
}

template <class S>
struct GeneratorSet {
  std::vector<Polynomial<S>> generators;
  unsigned degree_cap = 0;
  /// dim B_d and number of new generators, indexed by d - 1.
  std::vector<std::size_t> basic_dimensions;
  std::vector<std::size_t> new_generators;
  std::vector<std::string> warnings;
  // provenance
  std::string model_id;
  std::string engine;
  std::uint64_t seed = 0;
  double tol_rank = 0.0;
  std::vector<double> rank_gaps;  // floating only, indexed by d - 1

  std::vector<unsigned> degrees() const {
    std::vector<unsigned> out;
    for (const auto& g : generators) out.push_back(g.degree().value_or(0));
    return out;
  }
};

namespace detail {

template <class S>
std::size_t support(const std::vector<S>& v) {
  return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](const S& x) {
    return !ScalarTraits<S>::is_zero(x);
  }));
}

/// Is v outside span(rows)? Exact: nonzero residual. Floating: relative
/// residual above tol.
template <class S>
bool extends_span(const Rows<S>& rows, const Rows<S>& gram, const std::vector<S>& v, double tol) {
  if constexpr (ScalarTraits<S>::exact) {
    SpanBasis<S> basis = span_basis(rows, gram);
    return !ScalarTraits<S>::is_zero(residual_squared(basis, gram, v));
  } else {
    const double vv = detail::dot(v, detail::gram_apply(gram, v));
    if (vv <= 0.0) return false;
    const SpanBasis<double> basis = span_basis(rows, gram, 1e-12);
    return std::sqrt(std::max(0.0, residual_squared(basis, gram, v)) / vv) > tol;
  }
}

/// Floating representatives are snapped to small-denominator rationals when the
/// snapped vector still lies in B_d within `tol`.
inline std::vector<double> snap(const std::vector<double>& v, const SubspaceBasis<double>& b, long long max_den,
                                double tol) {
  std::vector<double> s(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) s[i] = nearest_rational(v[i], max_den).convert_to<double>();
  const double ss = detail::dot(s, detail::gram_apply(b.gram, s));
  if (ss <= 0.0) return v;
  const double res = std::sqrt(std::max(0.0, residual_squared(b.span, b.gram, s)) / ss);
  return res <= tol ? s : v;
}

}  // namespace detail

/// Degree-by-degree generator discovery. At each degree the candidates are the
/// reduced row echelon rows of B_d, tried sparsest first; a candidate becomes a
/// generator when it enlarges the span of the products of earlier generators.
template <class S>
GeneratorSet<S> discover_generators(const Averager<S>& avg, std::size_t dim, unsigned cap,
                                    const RingOptions& opts = {}) {
  require(cap >= 1, ErrorKind::ConfigError, "degree cap must be >= 1");
  GeneratorSet<S> out;
  out.degree_cap = cap;
  out.engine = std::string(to_string(avg.engine));
  out.tol_rank = ScalarTraits<S>::exact ? 0.0 : opts.tol_rank;
  for (unsigned d = 1; d <= cap; ++d) {
    const auto b = basic_subspace(avg, dim, d, opts);
    out.basic_dimensions.push_back(b.rank());
    out.rank_gaps.push_back(b.span.gap);
    Rows<S> spanning;
    for (const auto& p : generator_products(out.generators, dim, d))
      if (p.degree() == d) spanning.push_back(coefficient_vector(p, b.monomials));
    Rows<S> candidates;
    if constexpr (ScalarTraits<S>::exact) {
      candidates = rref(b.averaged);
    } else {
      candidates = rref(b.span.rows, nullptr, opts.tol_rank, 1e-12);
    }
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
      return detail::support(candidates[i]) < detail::support(candidates[j]);
    });
    std::size_t added = 0;
    for (std::size_t idx : order) {
      auto v = candidates[idx];
      if constexpr (!ScalarTraits<S>::exact) {
        const double tol = avg.engine == Engine::Exact ? 1e-9 : avg.tolerance;
        v = detail::snap(v, b, opts.max_denominator, tol);
      }
      if (!detail::extends_span(spanning, b.gram, v, opts.tol_rank)) continue;
      spanning.push_back(v);
      out.generators.push_back(from_coefficients<S>(dim, b.monomials, v));
      ++added;
    }
    out.new_generators.push_back(added);
    if (d == cap && added > 0)
      out.warnings.push_back("DegreeCapillary: " + std::to_string(added) +
                             " new generator(s) at the degree cap " + std::to_string(cap) +
                             "; the ring may need a larger cap");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Molien series

/// Coefficients c_0..c_n of det(I - t g) via Faddeev-LeVerrier.
inline std::vector<Rational> det_one_minus_tg(const Matrix<Rational>& g) {
  const std::size_t n = g.rows();
  std::vector<Rational> c(n + 1, Rational(0));
  c[0] = 1;
  Matrix<Rational> m(n, n);
  const auto id = Matrix<Rational>::identity(n);
  for (std::size_t k = 1; k <= n; ++k) {
    Matrix<Rational> next = g * m;
    for (std::size_t i = 0; i < n; ++i) next(i, i) += c[k - 1];
    m = std::move(next);
    const Matrix<Rational> gm = g * m;
    Rational tr = 0;
    for (std::size_t i = 0; i < n; ++i) tr += gm(i, i);
    c[k] = -tr / Rational(static_cast<unsigned>(k));
  }
  (void)id;
  return c;
}

/// 1 / p(t) to order `cap`; p(0) must be nonzero.
inline std::vector<Rational> series_inverse(const std::vector<Rational>& p, unsigned cap) {
  std::vector<Rational> q(cap + 1, Rational(0));
  q[0] = Rational(1) / p[0];
  for (unsigned k = 1; k <= cap; ++k) {
    Rational acc = 0;
    for (unsigned j = 1; j <= k && j < p.size(); ++j) acc += p[j] * q[k - j];
    q[k] = -acc / p[0];
  }
  return q;
}

/// dim of degree-d invariants for d = 0..cap from the Molien series.
inline std::vector<std::size_t> molien_dimensions(const FiniteGroupModel<Rational>& model, unsigned cap) {
  std::vector<Rational> sum(cap + 1, Rational(0));
  for (const auto& g : model.elements()) {
    const auto inv = series_inverse(det_one_minus_tg(g), cap);
    for (unsigned k = 0; k <= cap; ++k) sum[k] += inv[k];
  }
  std::vector<std::size_t> out;
  for (auto& s : sum) {
    s /= Rational(static_cast<unsigned>(model.order()));
    require(denominator(s) == 1 && s >= 0, ErrorKind::IdentityViolation,
            "Molien coefficient is not a non-negative integer: " + s.str());
    out.push_back(static_cast<std::size_t>(numerator(s).convert_to<unsigned long long>()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generation check

struct GenerationDegree {
  unsigned degree = 0;
  std::size_t basic_dimension = 0;
  std::size_t product_dimension = 0;
  double max_residual = 0.0;  // relative sphere-norm residual of averaged monomials
  bool pass = true;
};

struct GenerationReport {
  std::vector<GenerationDegree> degrees;

  bool ok() const {
    return std::all_of(degrees.begin(), degrees.end(), [](const auto& d) { return d.pass; });
  }
  double max_residual() const {
    double m = 0.0;
    for (const auto& d : degrees) m = std::max(m, d.max_residual);
    return m;
  }
  void throw_if_failed() const {
    std::string bad;
    for (const auto& d : degrees)
      if (!d.pass) bad += (bad.empty() ? "" : ", ") + std::to_string(d.degree);
    if (!bad.empty()) throw Error(ErrorKind::GenerationGap, "generator algebra misses B_d at degree(s) " + bad);
  }
};

/// For every d <= cap, projects each averaged monomial onto the degree-d slice
/// of the algebra generated by `gens` and records the worst residual.
template <class S>
GenerationReport verify_generation(const Averager<S>& avg, std::size_t dim, const std::vector<Polynomial<S>>& gens,
                                   unsigned cap, const RingOptions& opts = {}) {
  GenerationReport rep;
  for (const auto& g : gens) {
    require(g.dim() == dim, ErrorKind::DimensionMismatch, "generator dimension differs from model");
    require(g.is_homogeneous() && g.degree().value_or(0) >= 1, ErrorKind::NotHomogeneous,
            "generators must be homogeneous of positive degree: " + to_string(g));
  }
  for (unsigned d = 1; d <= cap; ++d) {
    const auto b = basic_subspace(avg, dim, d, opts);
    Rows<S> products;
    for (const auto& p : generator_products(gens, dim, d)) products.push_back(coefficient_vector(p, b.monomials));
    GenerationDegree row;
    row.degree = d;
    row.basic_dimension = b.rank();
    if constexpr (ScalarTraits<S>::exact) {
      const auto span = span_basis(products, b.gram);
      row.product_dimension = span.rank;
      for (const auto& v : b.averaged) {
        const S vv = detail::dot(v, detail::gram_apply(b.gram, v));
        if (ScalarTraits<S>::is_zero(vv)) continue;
        const S res = residual_squared(span, b.gram, v);
        if (!ScalarTraits<S>::is_zero(res)) row.pass = false;
        row.max_residual = std::max(row.max_residual, std::sqrt(to_double(S(res / vv))));
      }
    } else {
      const auto span = span_basis(products, b.gram, opts.tol_rank);
      row.product_dimension = span.rank;
      // Compare against the numerically significant part of B_d only.
      for (const auto& v : b.span.rows) {
        const double res = residual_squared(span, b.gram, v);  // rows are unit vectors
        row.max_residual = std::max(row.max_residual, std::sqrt(std::max(0.0, res)));
      }
      const double tol = avg.engine == Engine::Exact ? 1e-8 : avg.tolerance * 10.0;
      row.pass = row.max_residual <= tol;
    }
    rep.degrees.push_back(row);
  }
  return rep;
}

/// Every generator must be fixed by averaging.
struct InvarianceReport {
  std::vector<double> residuals;  // relative sphere-norm ||[g] - g|| / ||g||
  std::vector<bool> pass;

  bool ok() const { return std::all_of(pass.begin(), pass.end(), [](bool b) { return b; }); }
  void throw_if_failed(const std::vector<std::string>& names) const {
    for (std::size_t i = 0; i < pass.size(); ++i)
      if (!pass[i])
        throw Error(ErrorKind::IdentityViolation,
                    "generator " + names[i] + " is not basic: residual " + format_double(residuals[i]));
  }
};

template <class S>
InvarianceReport verify_invariance(const Averager<S>& avg, const std::vector<Polynomial<S>>& gens) {
  InvarianceReport rep;
  if (gens.empty()) return rep;
  const auto averaged = avg.batch(gens);
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const Polynomial<S> diff = averaged[i] - gens[i];
    const S dd = sphere_inner(diff, diff);
    const double rel = std::sqrt(to_double(dd)) / std::max(sphere_norm(gens[i]), 1e-300);
    rep.residuals.push_back(rel);
    if constexpr (ScalarTraits<S>::exact) {
      rep.pass.push_back(avg.engine == Engine::Exact ? ScalarTraits<S>::is_zero(dd) : rel <= avg.tolerance);
    } else {
      rep.pass.push_back(rel <= (avg.engine == Engine::Exact ? 1e-9 : avg.tolerance * 3.0));
    }
  }
  return rep;
}

}  // namespace leafavg
