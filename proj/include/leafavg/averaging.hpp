#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "leafavg/finite_group.hpp"
#include "leafavg/isoparametric.hpp"
#include "leafavg/polynomial.hpp"
#include "leafavg/sphere.hpp"
#include "leafavg/torus.hpp"

namespace leafavg {

enum class Engine { Exact, StructuredFit, VandermondeFit };

constexpr std::string_view to_string(Engine e) {
  switch (e) {
    case Engine::Exact: return "exact";
    case Engine::StructuredFit: return "structured_fit";
    case Engine::VandermondeFit: return "vandermonde_fit";
  }
  return "unknown";
}

/// Sphere-norm operator norm of the Laplacian on homogeneous polynomials of
/// degree m in `dim` variables. Delta scales r^{2j} h_{m-2j} (h harmonic) by
/// 2j(2m - 2j + dim - 2), and these pieces are orthogonal on the sphere.
inline double laplacian_gain(std::size_t dim, unsigned m) {
  double g = 0.0;
  for (unsigned j = 1; 2 * j <= m; ++j)
    g = std::max(g, 2.0 * j * (2.0 * m - 2.0 * j + static_cast<double>(dim) - 2.0));
  return g;
}

template <class S>
double laplacian_gain(const Polynomial<S>& f) {
  double g = 0.0;
  for (const auto& [e, c] : f.terms()) g = std::max(g, laplacian_gain(f.dim(), e.degree()));
  return g;
}

struct FitOptions {
  std::size_t points_per_unknown = 2;
  double cond_cap = 1e8;
  std::uint64_t seed = 1;
  int max_resample = 3;
  /// Residual tolerance of the statistical regime.
  double fit_tol = 1e-2;
};

// ---------------------------------------------------------------------------
// Least squares

struct LeastSquaresSolution {
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd covariance;
  double condition = 1.0;
  double residual_rms = 0.0;
};

/// Column-scaled least squares via SVD. `sigma` are the per-row standard
/// errors of b, propagated into the coefficient covariance.
inline LeastSquaresSolution solve_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                                const Eigen::VectorXd& sigma) {
  LeastSquaresSolution out;
  const Eigen::Index n = a.cols();
  Eigen::VectorXd scale(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double c = a.col(j).norm();
    scale(j) = c > 0.0 ? 1.0 / c : 1.0;
  }
  const Eigen::MatrixXd as = a * scale.asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(as, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  out.condition = sv.size() && sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                                       : std::numeric_limits<double>::infinity();
  if (!std::isfinite(out.condition)) return out;
  // pinv = V S^-1 U^T
  const Eigen::MatrixXd pinv = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  out.coefficients = scale.asDiagonal() * (pinv * b);
  const Eigen::MatrixXd ps = scale.asDiagonal() * pinv;
  out.covariance = ps * sigma.cwiseAbs2().asDiagonal() * ps.transpose();
  const Eigen::VectorXd r = a * out.coefficients - b;
  out.residual_rms = b.size() ? std::sqrt(r.squaredNorm() / static_cast<double>(b.size())) : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Fit engine for the isoparametric model

struct FitPoints {
  std::vector<std::vector<double>> points;
  std::uint64_t seed = 0;
};

/// Uniform sphere points away from the singular levels: |F| <= 1 - 2h.
inline FitPoints sample_fit_points(const IsoparametricModel& model, std::size_t count, std::uint64_t seed) {
  FitPoints out{{}, seed};
  SphereSampler sampler(derive_seed(seed, 0xF17));
  const double cut = 1.0 - 2.0 * model.params().bandwidth;
  while (out.points.size() < count) {
    auto x = sampler.sample(model.dim());
    if (std::fabs(model.level(x)) <= cut) out.points.push_back(std::move(x));
  }
  return out;
}

/// estimates[j][i]: leaf average of fs[i] at points[j].
inline std::vector<std::vector<LeafEstimate>> estimate_at_points(const IsoparametricModel& model,
                                                                 std::span<const Polynomial<double>> fs,
                                                                 const FitPoints& pts) {
  std::vector<std::vector<LeafEstimate>> out;
  out.reserve(pts.points.size());
  for (std::size_t j = 0; j < pts.points.size(); ++j)
    out.push_back(leaf_average_mc(model, fs, pts.points[j], derive_seed(pts.seed, 1000 + j)));
  return out;
}

struct FitResult {
  Polynomial<double> average;
  Engine engine = Engine::VandermondeFit;
  unsigned degree = 0;
  std::vector<Polynomial<double>> basis;  // columns of the design
  std::vector<double> coefficients;
  std::vector<double> std_errors;
  Eigen::MatrixXd covariance;
  double condition = 1.0;
  double residual_rms = 0.0;
  std::size_t sample_points = 0;
  std::uint64_t mc_samples = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline FitResult fit_on_basis(const std::vector<Polynomial<double>>& basis, const FitPoints& pts,
                              const std::vector<std::vector<LeafEstimate>>& est, std::size_t which,
                              std::uint64_t mc_samples, double cond_cap) {
  const std::size_t s = pts.points.size();
  Eigen::MatrixXd a(s, basis.size());
  Eigen::VectorXd b(s), sigma(s);
  std::vector<CompiledPolynomial> cols(basis.begin(), basis.end());
  for (std::size_t j = 0; j < s; ++j) {
    for (std::size_t k = 0; k < basis.size(); ++k) a(j, k) = cols[k](pts.points[j]);
    b(j) = est[j][which].value;
    sigma(j) = est[j][which].std_error;
  }
  const auto sol = solve_least_squares(a, b, sigma);
  if (!(sol.condition <= cond_cap))
    throw Error(ErrorKind::IllConditionedFit, "condition estimate " + format_double(sol.condition) + " above cap " +
                                                  format_double(cond_cap));
  FitResult out;
  out.basis = basis;
  out.condition = sol.condition;
  out.residual_rms = sol.residual_rms;
  out.covariance = sol.covariance;
  out.sample_points = s;
  out.mc_samples = mc_samples;
  out.seed = pts.seed;
  out.average = Polynomial<double>(pts.points.empty() ? 0 : pts.points.front().size());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    out.coefficients.push_back(sol.coefficients(static_cast<Eigen::Index>(k)));
    out.std_errors.push_back(std::sqrt(std::max(0.0, sol.covariance(k, k))));
    out.average += sol.coefficients(static_cast<Eigen::Index>(k)) * basis[k];
  }
  return out;
}

inline std::vector<Polynomial<double>> monomial_polys(std::size_t dim, unsigned d) {
  std::vector<Polynomial<double>> out;
  for (auto& e : monomial_basis(dim, d)) out.push_back(Polynomial<double>::monomial(e, 1.0));
  return out;
}

inline unsigned homogeneous_degree(const Polynomial<double>& f) {
  require(f.is_homogeneous(), ErrorKind::NotHomogeneous, "averaging input must be homogeneous: " + to_string(f));
  return f.degree().value_or(0);
}

}  // namespace detail

/// Unstructured (Vandermonde) fits of [f] for a batch of homogeneous
/// polynomials sharing one set of sample points and Monte Carlo draws.
inline std::vector<FitResult> fit_averages(const IsoparametricModel& model, std::span<const Polynomial<double>> fs,
                                           const FitOptions& opts) {
  if (fs.empty()) return {};
  std::size_t unknowns = 1;
  std::vector<unsigned> degrees;
  for (const auto& f : fs) {
    degrees.push_back(detail::homogeneous_degree(f));
    unknowns = std::max(unknowns, monomial_basis(model.dim(), degrees.back()).size());
  }
  for (int attempt = 0;; ++attempt) {
    const std::uint64_t seed = attempt == 0 ? opts.seed : derive_seed(opts.seed, 0xA77E + attempt);
    const auto pts = sample_fit_points(model, opts.points_per_unknown * unknowns, seed);
    const auto est = estimate_at_points(model, fs, pts);
    try {
      std::vector<FitResult> out;
      for (std::size_t i = 0; i < fs.size(); ++i) {
        if (fs[i].is_zero()) {
          FitResult zero;
          zero.average = Polynomial<double>(model.dim());
          zero.sample_points = pts.points.size();
          zero.seed = pts.seed;
          zero.mc_samples = model.params().sample_count;
          out.push_back(std::move(zero));
          continue;
        }
        out.push_back(detail::fit_on_basis(detail::monomial_polys(model.dim(), degrees[i]), pts, est, i,
                                           model.params().sample_count, opts.cond_cap));
        out.back().degree = degrees[i];
      }
      return out;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::IllConditionedFit || attempt >= opts.max_resample) throw;
    }
  }
}

inline FitResult fit_average(const IsoparametricModel& model, const Polynomial<double>& f, const FitOptions& opts) {
  return fit_averages(model, std::span<const Polynomial<double>>(&f, 1), opts).front();
}

/// Exponent patterns e over generator degrees with sum e_i d_i = d.
inline std::vector<std::vector<unsigned>> degree_patterns(const std::vector<unsigned>& degrees, unsigned d) {
  std::vector<std::vector<unsigned>> out;
  std::vector<unsigned> cur(degrees.size(), 0);
  std::function<void(std::size_t, unsigned)> rec = [&](std::size_t i, unsigned left) {
    if (i == degrees.size()) {
      if (left == 0) out.push_back(cur);
      return;
    }
    for (unsigned k = 0; k * degrees[i] <= left; ++k) {
      cur[i] = k;
      rec(i + 1, left - k * degrees[i]);
      if (degrees[i] == 0) break;
    }
    cur[i] = 0;
  };
  rec(0, d);
  return out;
}

/// Products prod g_i^{e_i} of the given generators of total degree d.
template <class S>
std::vector<Polynomial<S>> generator_products(const std::vector<Polynomial<S>>& gens, std::size_t dim, unsigned d,
                                              std::vector<std::vector<unsigned>>* patterns_out = nullptr) {
  std::vector<unsigned> degrees;
  for (const auto& g : gens) degrees.push_back(g.degree().value_or(0));
  auto patterns = degree_patterns(degrees, d);
  std::vector<Polynomial<S>> out;
  for (const auto& pat : patterns) {
    Polynomial<S> prod = Polynomial<S>::constant(dim, S(1));
    for (std::size_t i = 0; i < gens.size(); ++i)
      if (pat[i]) prod = prod * gens[i].pow(pat[i]);
    out.push_back(std::move(prod));
  }
  if (patterns_out) *patterns_out = std::move(patterns);
  return out;
}

struct StructuredFit {
  FitResult fit;  // engine = StructuredFit, basis = generator products
  std::vector<std::vector<unsigned>> patterns;
  std::optional<FitResult> unstructured;
  /// Sphere L2 norm of (structured - unstructured).
  double difference_norm = 0.0;
  /// RMS sphere-norm standard error of the unstructured fit, sqrt(tr(G Cov)).
  double difference_se = 0.0;
};

/// Sphere-L2 standard error of a monomial-basis fit: sqrt(trace(G Cov)).
inline double fit_sphere_se(const FitResult& fit) {
  if (fit.basis.empty()) return 0.0;
  double tr = 0.0;
  for (std::size_t i = 0; i < fit.basis.size(); ++i)
    for (std::size_t j = 0; j < fit.basis.size(); ++j)
      tr += sphere_inner(fit.basis[i], fit.basis[j]) * fit.covariance(j, i);
  return std::sqrt(std::max(0.0, tr));
}

/// Fits [f] inside the degree-m slice of the algebra generated by `gens`.
/// Throws BasisDeficient when the slice cannot explain the leaf estimates.
inline StructuredFit average_structured(const IsoparametricModel& model, const Polynomial<double>& f,
                                        const std::vector<Polynomial<double>>& gens, const FitOptions& opts,
                                        bool compare_unstructured = true) {
  require(!gens.empty(), ErrorKind::BasisDeficient, "empty generator set");
  const unsigned m = detail::homogeneous_degree(f);
  StructuredFit out;
  const auto products = generator_products(gens, model.dim(), m, &out.patterns);
  require(!products.empty(), ErrorKind::BasisDeficient,
          "generator algebra has no elements of degree " + std::to_string(m));
  const std::size_t mono = monomial_basis(model.dim(), m).size();
  const std::size_t count = compare_unstructured ? opts.points_per_unknown * mono
                                                 : std::max<std::size_t>(opts.points_per_unknown * products.size(), 10);
  const auto pts = sample_fit_points(model, count, opts.seed);
  const auto est = estimate_at_points(model, std::span<const Polynomial<double>>(&f, 1), pts);
  out.fit = detail::fit_on_basis(products, pts, est, 0, model.params().sample_count, opts.cond_cap);
  out.fit.engine = Engine::StructuredFit;
  out.fit.degree = m;
  if (out.fit.residual_rms > opts.fit_tol)
    throw Error(ErrorKind::BasisDeficient, "structured residual " + format_double(out.fit.residual_rms) +
                                               " exceeds " + format_double(opts.fit_tol) + " at degree " +
                                               std::to_string(m));
  if (compare_unstructured) {
    out.unstructured = detail::fit_on_basis(detail::monomial_polys(model.dim(), m), pts, est, 0,
                                            model.params().sample_count, opts.cond_cap);
    out.unstructured->degree = m;
    out.difference_norm = sphere_norm(out.fit.average - out.unstructured->average);
    out.difference_se = fit_sphere_se(*out.unstructured);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Averager: uniform batch interface over the engines

/// Batch averaging callable plus the metadata the verification code needs.
/// The fit engine is stateful only through a call counter that derives fresh,
/// reproducible seeds for successive batches.
template <class S>
struct Averager {
  std::function<std::vector<Polynomial<S>>(std::span<const Polynomial<S>>)> batch;
  Engine engine = Engine::Exact;
  double tolerance = 0.0;  // identity tolerance for this engine
  std::string description;

  Polynomial<S> operator()(const Polynomial<S>& f) const {
    return batch(std::span<const Polynomial<S>>(&f, 1)).front();
  }
};

template <class S>
Averager<S> make_averager(const FiniteGroupModel<S>& model) {
  Averager<S> a;
  a.batch = [&model](std::span<const Polynomial<S>> fs) {
    std::vector<Polynomial<S>> out;
    for (const auto& f : fs) out.push_back(reynolds(model, f));
    return out;
  };
  a.tolerance = ScalarTraits<S>::exact ? 0.0 : 1e-10;
  a.description = "finite group reynolds, order " + std::to_string(model.order());
  return a;
}

template <class S>
Averager<S> make_averager(const TorusModel& model) {
  Averager<S> a;
  a.batch = [&model](std::span<const Polynomial<S>> fs) {
    std::vector<Polynomial<S>> out;
    for (const auto& f : fs) out.push_back(reynolds(model, f));
    return out;
  };
  a.tolerance = ScalarTraits<S>::exact ? 0.0 : 1e-10;
  a.description = "torus reynolds, rank " + std::to_string(model.torus_rank());
  return a;
}

inline Averager<double> make_averager(const IsoparametricModel& model, FitOptions opts) {
  Averager<double> a;
  auto counter = std::make_shared<std::uint64_t>(0);
  a.batch = [&model, opts, counter](std::span<const Polynomial<double>> fs) {
    FitOptions o = opts;
    o.seed = derive_seed(opts.seed, (*counter)++);
    std::vector<Polynomial<double>> out;
    for (auto& r : fit_averages(model, fs, o)) out.push_back(std::move(r.average));
    return out;
  };
  a.engine = Engine::VandermondeFit;
  a.tolerance = opts.fit_tol;
  a.description = "coarea Monte Carlo + Vandermonde fit";
  return a;
}

// ---------------------------------------------------------------------------
// Certificates and identity checks

struct Residuals {
  double idempotence = 0.0;
  double leaf_constancy = 0.0;
  double laplacian_commutation = 0.0;
  double contraction_slack = 0.0;
  double selfadjoint_gap = 0.0;
};

struct FitDiagnostics {
  double condition = 1.0;
  double residual_norm = 0.0;
  std::size_t sample_points = 0;
  std::uint64_t mc_samples = 0;
  std::uint64_t seed = 0;
  double bandwidth = 0.0;
};

template <class S>
struct AveragingCertificate {
  Polynomial<S> input;
  Polynomial<S> output;
  Engine engine = Engine::Exact;
  unsigned degree = 0;
  Residuals residuals;
  FitDiagnostics fit;
  std::vector<double> std_errors;  // fit engines: per-coefficient SE of `output`
  /// Bound the residuals are held to: 0 for rational exact engines, otherwise
  /// max(fit_tol, 5 sphere-norm standard errors) scaled by max(1, ||f||).
  double residual_tolerance = 0.0;
  /// Fit errors in [f] pass through the Laplacian: residual_tolerance times
  /// (1 + laplacian_gain).
  double laplacian_tolerance = 0.0;
};

namespace detail {

template <class S>
double norm_of(const Polynomial<S>& p) {
  return sphere_norm(p);
}

/// Deterministic probe (x1 + 2 x2 + ... + n xn)^m used for self-adjointness.
template <class S>
Polynomial<S> probe_polynomial(std::size_t dim, unsigned m) {
  Polynomial<S> l(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    Exponents e(dim);
    e[i] = 1;
    l.add_term(e, S(static_cast<unsigned>(i + 1)));
  }
  return l.pow(m);
}

/// Random rational point with small numerators; exact leaf checks use it.
template <class Rng>
std::vector<Rational> random_rational_point(std::size_t dim, Rng& rng) {
  std::uniform_int_distribution<int> num(-7, 7);
  std::uniform_int_distribution<int> den(1, 5);
  std::vector<Rational> x;
  for (std::size_t i = 0; i < dim; ++i) x.emplace_back(num(rng), den(rng));
  return x;
}

}  // namespace detail

/// max |[f](p) - [f](g p)| over random rational points and group elements; exact.
template <class S>
S leaf_constancy_exact(const FiniteGroupModel<S>& model, const Polynomial<S>& avg, std::uint64_t seed,
                       std::size_t trials = 8) {
  std::mt19937_64 rng(seed);
  S worst(0);
  for (std::size_t t = 0; t < trials; ++t) {
    auto p = detail::random_rational_point(model.dim(), rng);
    std::vector<S> ps(p.begin(), p.end());
    if constexpr (!std::is_same_v<S, Rational>) {
      for (std::size_t i = 0; i < p.size(); ++i) ps[i] = to_double(p[i]);
    }
    const S base = avg.template eval<S>(ps);
    for (const auto& g : model.elements()) {
      const auto q = g.template apply<S>(ps);
      const S d = ScalarTraits<S>::abs(S(avg.template eval<S>(q) - base));
      if (d > worst) worst = d;
    }
  }
  return worst;
}

template <class S>
S leaf_constancy_exact(const TorusModel& model, const Polynomial<S>& avg, std::uint64_t seed,
                       std::size_t trials = 8) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> tnum(-9, 9), tden(1, 7);
  S worst(0);
  for (std::size_t t = 0; t < trials; ++t) {
    auto p = detail::random_rational_point(model.dim(), rng);
    std::vector<Complex<S>> phases;
    for (std::size_t k = 0; k < model.torus_rank(); ++k) {
      const auto u = rational_unit(Rational(tnum(rng), tden(rng)));
      phases.emplace_back(scalar_cast<S>(u.re), scalar_cast<S>(u.im));
    }
    std::vector<S> ps;
    for (const auto& v : p) ps.push_back(scalar_cast<S>(v));
    const auto q = torus_act<S>(model, ps, phases);
    const S d = ScalarTraits<S>::abs(S(avg.template eval<S>(q) - avg.template eval<S>(ps)));
    if (d > worst) worst = d;
  }
  return worst;
}

/// [f] through an exact engine, with every operator residual filled in.
template <class Model, class S>
AveragingCertificate<S> average_exact(const Model& model, const Polynomial<S>& f, std::uint64_t seed = 7) {
  require(f.is_homogeneous(), ErrorKind::NotHomogeneous, "averaging input must be homogeneous: " + to_string(f));
  AveragingCertificate<S> cert;
  cert.input = f;
  cert.engine = Engine::Exact;
  cert.degree = f.degree().value_or(0);
  cert.output = reynolds(model, f);
  const auto again = reynolds(model, cert.output);
  cert.residuals.idempotence = detail::norm_of(Polynomial<S>(again - cert.output));
  cert.residuals.leaf_constancy = to_double(leaf_constancy_exact(model, cert.output, seed));
  cert.residuals.laplacian_commutation =
      detail::norm_of(Polynomial<S>(laplacian(cert.output) - reynolds(model, laplacian(f))));
  cert.residuals.contraction_slack = to_double(S(sphere_inner(f, f) - sphere_inner(cert.output, cert.output)));
  const auto probe = detail::probe_polynomial<S>(f.dim(), cert.degree);
  cert.residuals.selfadjoint_gap =
      std::fabs(to_double(S(sphere_inner(cert.output, probe) - sphere_inner(f, reynolds(model, probe)))));
  cert.residual_tolerance = ScalarTraits<S>::exact ? 0.0 : 1e-10 * std::max(1.0, sphere_norm(f));
  cert.laplacian_tolerance = cert.residual_tolerance * (1.0 + laplacian_gain(f));
  return cert;
}

template <class S>
AveragingCertificate<S> average(const FiniteGroupModel<S>& model, const Polynomial<S>& f, std::uint64_t seed = 7) {
  return average_exact(model, f, seed);
}

template <class S>
AveragingCertificate<S> average(const TorusModel& model, const Polynomial<S>& f, std::uint64_t seed = 7) {
  return average_exact(model, f, seed);
}

/// Fit-engine average on the isoparametric model. Residuals are statistical:
/// [f], [Laplacian f] and the probe share one batch; idempotence refits [f].
inline AveragingCertificate<double> average(const IsoparametricModel& model, const Polynomial<double>& f,
                                            const FitOptions& opts) {
  const unsigned m = detail::homogeneous_degree(f);
  AveragingCertificate<double> cert;
  cert.input = f;
  cert.engine = Engine::VandermondeFit;
  cert.degree = m;
  const auto probe = detail::probe_polynomial<double>(f.dim(), m);
  std::vector<Polynomial<double>> batch{f, probe};
  const bool has_lap = m >= 2;
  if (has_lap) batch.push_back(laplacian(f));
  auto fits = fit_averages(model, batch, opts);
  const auto& main = fits[0];
  cert.output = main.average;
  cert.std_errors = main.std_errors;
  cert.fit = {main.condition, main.residual_rms, main.sample_points, main.mc_samples, main.seed,
              model.params().bandwidth};
  cert.residual_tolerance = std::max(opts.fit_tol, 5.0 * fit_sphere_se(main)) * std::max(1.0, sphere_norm(f));
  cert.laplacian_tolerance = cert.residual_tolerance * (1.0 + laplacian_gain(f));

  FitOptions second = opts;
  second.seed = derive_seed(opts.seed, 0x1DE);
  const auto refit = fit_average(model, cert.output, second);
  cert.residuals.idempotence = sphere_norm(refit.average - cert.output);
  cert.residuals.laplacian_commutation =
      has_lap ? sphere_norm(laplacian(cert.output) - fits[2].average) : sphere_norm(laplacian(cert.output));
  cert.residuals.contraction_slack = sphere_inner(f, f) - sphere_inner(cert.output, cert.output);
  cert.residuals.selfadjoint_gap =
      std::fabs(sphere_inner(cert.output, probe) - sphere_inner(f, fits[1].average));

  std::mt19937_64 rng(derive_seed(opts.seed, 0x1EAF));
  SphereSampler sampler(derive_seed(opts.seed, 0x1EB0));
  CompiledPolynomial out_c(cert.output);
  double worst = 0.0;
  for (int t = 0; t < 16; ++t) {
    auto p = sampler.sample(model.dim());
    auto q = leaf_mate(model, p, rng);
    worst = std::max(worst, std::fabs(out_c(p) - out_c(q)));
  }
  cert.residuals.leaf_constancy = worst;
  return cert;
}

// ---------------------------------------------------------------------------
// Operator identities

struct IdentityCheck {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

struct IdentityReport {
  std::vector<IdentityCheck> checks;
  std::string engine;

  bool ok() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  void throw_if_failed() const {
    for (const auto& c : checks)
      if (!c.pass)
        throw Error(ErrorKind::IdentityViolation,
                    c.name + " residual " + format_double(c.residual) + " > " + format_double(c.tolerance));
  }
};

/// Checks idempotence, self-adjointness, contraction, the module property
/// [[f] g] = [f][g], Laplacian commutation and degree preservation. Exact
/// engines use tolerance 0 in rational mode (residuals are exact rationals).
template <class S>
IdentityReport verify_operator_identities(const Averager<S>& avg, const Polynomial<S>& f, const Polynomial<S>& g) {
  f.check_dim(g);
  IdentityReport rep;
  rep.engine = avg.description;
  const double tol = avg.tolerance;
  auto first = avg.batch(std::vector<Polynomial<S>>{f, g, laplacian(f)});
  const Polynomial<S>& af = first[0];
  const Polynomial<S>& ag = first[1];
  const Polynomial<S>& alap = first[2];
  auto second = avg.batch(std::vector<Polynomial<S>>{af, Polynomial<S>(af * g)});
  const Polynomial<S>& aaf = second[0];
  const Polynomial<S>& abg = second[1];

  auto scale = [&](double base) { return tol * std::max(1.0, base); };
  auto add = [&](std::string name, S exact_sq_or_value, double tolerance, bool is_squared) {
    const double v = to_double(exact_sq_or_value);
    const double residual = is_squared ? std::sqrt(std::max(0.0, v)) : std::fabs(v);
    bool pass;
    if constexpr (ScalarTraits<S>::exact) {
      pass = avg.engine == Engine::Exact ? ScalarTraits<S>::is_zero(exact_sq_or_value) : residual <= tolerance;
    } else {
      pass = residual <= tolerance;
    }
    rep.checks.push_back({std::move(name), residual, tolerance, pass});
  };
  const double nf = sphere_norm(f);
  const double ng = sphere_norm(g);

  const Polynomial<S> d1 = aaf - af;
  add("idempotence", sphere_inner(d1, d1), scale(nf), true);
  add("selfadjointness", S(sphere_inner(af, g) - sphere_inner(f, ag)), scale(nf * ng), false);
  {
    const S slack = sphere_inner(f, f) - sphere_inner(af, af);
    const double s = to_double(slack);
    IdentityCheck c{"contraction", std::max(0.0, -s), scale(nf * nf), true};
    if constexpr (ScalarTraits<S>::exact) {
      c.pass = avg.engine == Engine::Exact ? !(slack < S(0)) : -s <= c.tolerance;
    } else {
      c.pass = -s <= c.tolerance;
    }
    rep.checks.push_back(c);
  }
  const Polynomial<S> d4 = abg - af * ag;
  add("module_property", sphere_inner(d4, d4), scale(nf * ng), true);
  const Polynomial<S> d5 = laplacian(af) - alap;
  add("laplacian_commutation", sphere_inner(d5, d5), scale(nf) * (1.0 + laplacian_gain(f)), true);
  {
    // Components of [f] in degrees that f does not occupy.
    Polynomial<S> stray(f.dim());
    const auto fc = homogeneous_components(f);
    for (const auto& [d, comp] : homogeneous_components(af))
      if (!fc.count(d)) stray += comp;
    add("degree_preservation", sphere_inner(stray, stray), scale(nf), true);
  }
  return rep;
}

}  // namespace leafavg
