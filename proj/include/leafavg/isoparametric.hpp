#pragma once

#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "leafavg/polynomial.hpp"
#include "leafavg/polynomial_io.hpp"
#include "leafavg/sphere.hpp"

namespace leafavg {

template <class S>
struct MunznerCheck {
  S constant{};                  // c with Laplacian(F) = c r^{g-2}
  Polynomial<S> gradient_residual;  // |grad F|^2 - g^2 r^{2g-2}
  Polynomial<S> laplacian_residual; // Laplacian(F) - c r^{g-2}
};

namespace detail {

template <class S>
bool negligible(const Polynomial<S>& p, double tol) {
  if constexpr (ScalarTraits<S>::exact) {
    return p.is_zero();
  } else {
    for (const auto& [e, c] : p.terms())
      if (std::fabs(c) > tol) return false;
    return true;
  }
}

}  // namespace detail

/// Admission test for Cartan-Munzner polynomials: |grad F|^2 = g^2 r^{2g-2}
/// and Laplacian(F) = c r^{g-2}. For odd g (r^{g-2} not polynomial) and g = 1
/// the Laplacian must vanish. Returns c; throws NotCartanMunzner with the
/// offending residual otherwise. `tol` bounds coefficients in floating mode.
template <class S>
MunznerCheck<S> validate_munzner(const Polynomial<S>& F, unsigned g, double tol = 1e-10) {
  require(g >= 1, ErrorKind::NotCartanMunzner, "degree g must be >= 1");
  require(!F.is_zero() && F.is_homogeneous() && *F.degree() == g, ErrorKind::NotHomogeneous,
          "F must be homogeneous of degree " + std::to_string(g));
  const std::size_t n = F.dim();
  const auto r2 = radius_squared<S>(n);
  MunznerCheck<S> out;
  out.gradient_residual = gradient_dot(F, F) - S(g * g) * r2.pow(g - 1);
  if (!detail::negligible(out.gradient_residual, tol))
    throw Error(ErrorKind::NotCartanMunzner,
                "|grad F|^2 - " + std::to_string(g * g) + " r^" + std::to_string(2 * g - 2) + " = " +
                    to_string(out.gradient_residual));
  const auto lap = laplacian(F);
  out.constant = S(0);
  if (g >= 2 && g % 2 == 0) {
    const auto base = r2.pow((g - 2) / 2);
    Exponents lead(n);
    lead[0] = g - 2;
    out.constant = lap.coefficient(lead) / base.coefficient(lead);
    out.laplacian_residual = lap - out.constant * base;
  } else {
    out.laplacian_residual = lap;
  }
  if (!detail::negligible(out.laplacian_residual, tol))
    throw Error(ErrorKind::NotCartanMunzner,
                "Laplacian(F) is not a multiple of r^" + std::to_string(static_cast<int>(g) - 2) + ": residual " +
                    to_string(out.laplacian_residual));
  return out;
}

struct EstimatorParams {
  std::uint64_t sample_count = 1'000'000;
  double bandwidth = 0.05;
  double tol_level = 1e-9;
  double min_ess = 100.0;
  unsigned workers = 1;
  unsigned blocks = 64;
};

/// Level-set foliation of a Cartan-Munzner polynomial restricted to the unit
/// sphere. Leaves are {F = t}; the extreme levels t = +-1 are singular.
class IsoparametricModel {
 public:
  template <class S>
  static IsoparametricModel admit(const Polynomial<S>& F, unsigned g, EstimatorParams params = {}) {
    const auto check = validate_munzner(F, g);
    return IsoparametricModel(to_double_poly(F), g, to_double(check.constant), params);
  }

  std::size_t dim() const noexcept { return F_.dim(); }
  unsigned g() const noexcept { return g_; }
  double munzner_constant() const noexcept { return c_; }
  const Polynomial<double>& F() const noexcept { return F_; }
  const CompiledPolynomial& compiled_F() const noexcept { return Fc_; }
  const EstimatorParams& params() const noexcept { return params_; }
  EstimatorParams& params() noexcept { return params_; }

  double level(std::span<const double> x) const { return Fc_(x); }

  /// |grad_S F| = g sqrt(1 - F^2) on the unit sphere.
  double tangential_gradient_norm(double level) const {
    return g_ * std::sqrt(std::max(0.0, 1.0 - level * level));
  }

 private:
  IsoparametricModel(Polynomial<double> F, unsigned g, double c, EstimatorParams p)
      : F_(std::move(F)), Fc_(F_), g_(g), c_(c), params_(p) {}

  template <class S>
  static Polynomial<double> to_double_poly(const Polynomial<S>& F) {
    return convert<double>(F);
  }

  Polynomial<double> F_;
  CompiledPolynomial Fc_;
  unsigned g_;
  double c_;
  EstimatorParams params_;
};

struct LeafEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double effective_samples = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline void check_on_sphere(std::span<const double> p, std::size_t dim) {
  require(p.size() == dim, ErrorKind::DimensionMismatch, "point dimension differs from model");
  require(std::fabs(norm(p) - 1.0) <= 1e-8, ErrorKind::OffSphere, "point is not on the unit sphere");
}

struct BlockSums {
  double w = 0.0;
  double w2 = 0.0;
  std::vector<double> wf;
};

}  // namespace detail

/// Coarea Monte Carlo estimate of the leaf averages of several polynomials at
/// the leaf through p. Uniform sphere samples x are weighted by
/// |grad_S F(x)| K_h(F(x) - F(p)) with the Epanechnikov kernel K_h. Samples are
/// split into fixed blocks with derived seeds, so the result does not depend on
/// the worker count; the standard error is the delete-one-block jackknife.
inline std::vector<LeafEstimate> leaf_average_mc(const IsoparametricModel& model,
                                                 std::span<const Polynomial<double>> fs,
                                                 std::span<const double> p, std::uint64_t seed) {
  const auto& prm = model.params();
  const std::size_t dim = model.dim();
  detail::check_on_sphere(p, dim);
  for (const auto& f : fs) require(f.dim() == dim, ErrorKind::DimensionMismatch, "polynomial dimension differs from model");
  const double t = model.level(p);
  const double h = prm.bandwidth;
  if (std::fabs(t) >= 1.0 - h)
    throw Error(ErrorKind::NearSingularLeaf, "|F(p)| = " + format_double(std::fabs(t)) + " >= 1 - h");
  require(prm.blocks >= 2, ErrorKind::ConfigError, "estimator needs at least two blocks");

  std::vector<CompiledPolynomial> compiled;
  unsigned max_exp = model.compiled_F().max_exponent();
  for (const auto& f : fs) {
    compiled.emplace_back(f);
    max_exp = std::max(max_exp, compiled.back().max_exponent());
  }
  const std::size_t stride = max_exp + 1;
  const std::size_t nb = prm.blocks;
  std::vector<detail::BlockSums> blocks(nb);

  auto run_block = [&](std::size_t b) {
    auto& out = blocks[b];
    out.wf.assign(fs.size(), 0.0);
    const std::uint64_t count = prm.sample_count / nb + (b < prm.sample_count % nb ? 1 : 0);
    SphereSampler sampler(derive_seed(seed, b));
    std::vector<double> x(dim), pw(dim * stride);
    for (std::uint64_t s = 0; s < count; ++s) {
      sampler.sample(x);
      CompiledPolynomial::fill_powers(x, pw.data(), stride);
      const double level = model.compiled_F().eval_with_powers(pw.data(), stride);
      const double u = (level - t) / h;
      if (std::fabs(u) >= 1.0) continue;
      const double w = model.tangential_gradient_norm(level) * 0.75 * (1.0 - u * u) / h;
      out.w += w;
      out.w2 += w * w;
      for (std::size_t j = 0; j < compiled.size(); ++j) out.wf[j] += w * compiled[j].eval_with_powers(pw.data(), stride);
    }
  };

  const unsigned workers = std::max(1u, prm.workers);
  if (workers == 1) {
    for (std::size_t b = 0; b < nb; ++b) run_block(b);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned wk = 0; wk < workers; ++wk)
      pool.emplace_back([&, wk] {
        for (std::size_t b = wk; b < nb; b += workers) run_block(b);
      });
  }

  double sw = 0.0, sw2 = 0.0;
  std::vector<double> swf(fs.size(), 0.0);
  for (const auto& b : blocks) {
    sw += b.w;
    sw2 += b.w2;
    for (std::size_t j = 0; j < fs.size(); ++j) swf[j] += b.wf[j];
  }
  const double ess = sw2 > 0.0 ? sw * sw / sw2 : 0.0;
  if (ess < prm.min_ess)
    throw Error(ErrorKind::EffectiveSampleTooSmall,
                "effective sample size " + format_double(ess) + " below " + format_double(prm.min_ess));

  std::vector<LeafEstimate> out(fs.size());
  for (std::size_t j = 0; j < fs.size(); ++j) {
    const double est = swf[j] / sw;
    std::vector<double> loo(nb);
    double mean = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      loo[b] = (swf[j] - blocks[b].wf[j]) / (sw - blocks[b].w);
      mean += loo[b];
    }
    mean /= static_cast<double>(nb);
    double var = 0.0;
    for (double v : loo) var += (v - mean) * (v - mean);
    var *= static_cast<double>(nb - 1) / static_cast<double>(nb);
    out[j] = {est, std::sqrt(var), ess, prm.sample_count, seed};
  }
  return out;
}

inline LeafEstimate leaf_average_mc(const IsoparametricModel& model, const Polynomial<double>& f,
                                    std::span<const double> p, std::uint64_t seed) {
  return leaf_average_mc(model, std::span<const Polynomial<double>>(&f, 1), p, seed).front();
}

inline bool same_leaf(const IsoparametricModel& model, std::span<const double> p, std::span<const double> q,
                      double tol_level) {
  detail::check_on_sphere(p, model.dim());
  detail::check_on_sphere(q, model.dim());
  return std::fabs(model.level(p) - model.level(q)) < tol_level;
}

inline double leaf_distance(const IsoparametricModel& model, std::span<const double> p, std::span<const double> q) {
  return std::fabs(model.level(p) - model.level(q));
}

/// Projects x onto the level set {F = t} of the sphere by Newton steps along
/// the tangential gradient. Returns false if it fails to converge.
inline bool project_to_level(const IsoparametricModel& model, std::vector<double>& x, double t,
                             double tol = 1e-14, int max_iter = 100) {
  const auto grad = gradient(model.F());
  std::vector<CompiledPolynomial> gc(grad.begin(), grad.end());
  for (int it = 0; it < max_iter; ++it) {
    const double f = model.level(x);
    const double defect = t - f;
    if (std::fabs(defect) < tol) return true;
    std::vector<double> gs(x.size());
    double radial = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      gs[i] = gc[i](x);
      radial += gs[i] * x[i];
    }
    double g2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      gs[i] -= radial * x[i];
      g2 += gs[i] * gs[i];
    }
    if (g2 < 1e-20) return false;
    double step = defect / g2;
    // Damp long steps; they leave the local chart.
    const double len = std::fabs(step) * std::sqrt(g2);
    if (len > 0.2) step *= 0.2 / len;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += step * gs[i];
    const double nx = norm(x);
    for (double& v : x) v /= nx;
  }
  return std::fabs(model.level(x) - t) < 1e4 * tol;
}

/// An independent point on the leaf through p: a fresh uniform sample pushed
/// onto the level F = F(p). Retries from new samples if Newton stalls.
template <class Rng>
std::vector<double> leaf_mate(const IsoparametricModel& model, std::span<const double> p, Rng& rng) {
  const double t = model.level(p);
  std::normal_distribution<double> normal;
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<double> x(model.dim());
    double n2 = 0.0;
    for (double& v : x) {
      v = normal(rng);
      n2 += v * v;
    }
    for (double& v : x) v /= std::sqrt(n2);
    if (project_to_level(model, x, t)) return x;
  }
  return {p.begin(), p.end()};
}

}  // namespace leafavg
