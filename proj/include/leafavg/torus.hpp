#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <tuple>
#include <vector>

#include "leafavg/polynomial.hpp"
#include "leafavg/sphere.hpp"

namespace leafavg {

/// Orbit foliation of a torus T^T acting on R^{2m + n_fix} = C^m x R^{n_fix}.
/// Plane k is the coordinate pair (x_{2k}, x_{2k+1}) read as z_k = x + i y; it
/// rotates by <w_k, theta>, where w_k is row k of the weight matrix. The last
/// n_fix coordinates are fixed.
class TorusModel {
 public:
  TorusModel(std::vector<std::vector<long long>> weights, std::size_t n_fix)
      : weights_(std::move(weights)), n_fix_(n_fix) {
    require(!weights_.empty(), ErrorKind::ConfigError, "torus needs at least one complex plane");
    rank_ = weights_.front().size();
    require(rank_ >= 1, ErrorKind::ConfigError, "weight matrix needs at least one column");
    for (const auto& row : weights_)
      require(row.size() == rank_, ErrorKind::ConfigError, "weight matrix rows have different lengths");
  }

  std::size_t planes() const noexcept { return weights_.size(); }
  std::size_t fixed() const noexcept { return n_fix_; }
  std::size_t torus_rank() const noexcept { return rank_; }
  std::size_t dim() const noexcept { return 2 * weights_.size() + n_fix_; }
  const std::vector<std::vector<long long>>& weights() const noexcept { return weights_; }

 private:
  std::vector<std::vector<long long>> weights_;
  std::size_t n_fix_;
  std::size_t rank_ = 0;
};

namespace detail {

/// x^a y^b = sum_p c_p z^p zbar^{a+b-p}; returns c indexed by p.
template <class S>
std::vector<Complex<S>> complexify_plane(unsigned a, unsigned b) {
  using C = Complex<S>;
  const S half = S(1) / S(2);
  std::vector<C> poly{C(S(1))};
  auto mul = [&](const C& c_zbar, const C& c_z) {
    std::vector<C> out(poly.size() + 1, C(S(0)));
    for (std::size_t p = 0; p < poly.size(); ++p) {
      out[p] += poly[p] * c_zbar;
      out[p + 1] += poly[p] * c_z;
    }
    poly = std::move(out);
  };
  for (unsigned k = 0; k < a; ++k) mul(C(half), C(half));                    // (z + zbar)/2
  for (unsigned k = 0; k < b; ++k) mul(C(S(0), half), C(S(0), S(-half)));    // (z - zbar)/(2i)
  return poly;
}

/// (x + i y)^p (x - i y)^q in the coordinates of plane k of a dim-variable ring.
template <class S>
Polynomial<Complex<S>> realify_plane(std::size_t dim, std::size_t plane, unsigned p, unsigned q) {
  using C = Complex<S>;
  Exponents ex(dim), ey(dim);
  ex[2 * plane] = 1;
  ey[2 * plane + 1] = 1;
  Polynomial<C> z(dim), zbar(dim);
  z.add_term(ex, C(S(1)));
  z.add_term(ey, C(S(0), S(1)));
  zbar.add_term(ex, C(S(1)));
  zbar.add_term(ey, C(S(0), S(-1)));
  return z.pow(p) * zbar.pow(q);
}

}  // namespace detail

/// Torus average: complexify, keep z^a zbar^b with W^T(a - b) = 0, realify.
template <class S>
Polynomial<S> reynolds(const TorusModel& model, const Polynomial<S>& f) {
  using C = Complex<S>;
  const std::size_t dim = model.dim();
  require(f.dim() == dim, ErrorKind::DimensionMismatch, "polynomial and torus model dimensions differ");
  const std::size_t m = model.planes();
  const std::size_t rank = model.torus_rank();
  std::map<std::tuple<std::size_t, unsigned, unsigned>, Polynomial<C>> cache;
  auto realified = [&](std::size_t k, unsigned p, unsigned q) -> const Polynomial<C>& {
    auto key = std::make_tuple(k, p, q);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, detail::realify_plane<S>(dim, k, p, q)).first;
    return it->second;
  };

  Polynomial<C> acc(dim);
  for (const auto& [e, c] : f.terms()) {
    std::vector<std::vector<C>> expansions(m);
    for (std::size_t k = 0; k < m; ++k) expansions[k] = detail::complexify_plane<S>(e[2 * k], e[2 * k + 1]);
    Exponents fixed_part(dim);
    for (std::size_t i = 2 * m; i < dim; ++i) fixed_part[i] = e[i];

    std::vector<long long> weight(rank, 0);
    std::vector<unsigned> chosen(m, 0);
    auto dfs = [&](auto&& self, std::size_t k, const C& coef) -> void {
      if (ScalarTraits<C>::is_zero(coef)) return;
      if (k == m) {
        for (long long w : weight)
          if (w != 0) return;
        Polynomial<C> term = Polynomial<C>::monomial(fixed_part, coef * C(c));
        for (std::size_t j = 0; j < m; ++j) {
          const unsigned total = e[2 * j] + e[2 * j + 1];
          if (total) term = term * realified(j, chosen[j], total - chosen[j]);
        }
        acc += term;
        return;
      }
      const unsigned total = e[2 * k] + e[2 * k + 1];
      for (unsigned p = 0; p <= total; ++p) {
        const long long charge = static_cast<long long>(p) - static_cast<long long>(total - p);
        for (std::size_t t = 0; t < rank; ++t) weight[t] += charge * model.weights()[k][t];
        chosen[k] = p;
        self(self, k + 1, coef * expansions[k][p]);
        for (std::size_t t = 0; t < rank; ++t) weight[t] -= charge * model.weights()[k][t];
      }
    };
    dfs(dfs, 0, C(S(1)));
  }
  Polynomial<S> out(dim);
  for (const auto& [e, c] : acc.terms()) out.add_term(e, c.re);
  return out;
}

/// Applies the torus element with unit phases u_j (one per torus parameter):
/// plane k is multiplied by prod_j u_j^{w_kj}. Works exactly with rational
/// unit complex numbers.
template <class S>
std::vector<S> torus_act(const TorusModel& model, std::span<const S> x, std::span<const Complex<S>> phases) {
  require(x.size() == model.dim(), ErrorKind::DimensionMismatch, "point dimension differs from torus model");
  require(phases.size() == model.torus_rank(), ErrorKind::DimensionMismatch, "one phase per torus parameter");
  std::vector<S> out(x.begin(), x.end());
  for (std::size_t k = 0; k < model.planes(); ++k) {
    Complex<S> u(S(1));
    for (std::size_t t = 0; t < phases.size(); ++t) {
      const long long w = model.weights()[k][t];
      const Complex<S> base = w >= 0 ? phases[t] : phases[t].conj();
      for (long long r = 0; r < std::llabs(w); ++r) u = u * base;
    }
    const Complex<S> z = Complex<S>(x[2 * k], x[2 * k + 1]) * u;
    out[2 * k] = z.re;
    out[2 * k + 1] = z.im;
  }
  return out;
}

/// Basis of the integer left kernel {u : u^T A = 0} of an integer matrix,
/// via unimodular row reduction; the basis spans the full (saturated) lattice.
inline std::vector<std::vector<long long>> integer_left_kernel(std::vector<std::vector<long long>> a) {
  const std::size_t rows = a.size();
  if (rows == 0) return {};
  const std::size_t cols = a.front().size();
  std::vector<std::vector<long long>> u(rows, std::vector<long long>(rows, 0));
  for (std::size_t i = 0; i < rows; ++i) u[i][i] = 1;
  auto row_sub = [&](std::size_t dst, std::size_t src, long long q) {
    for (std::size_t j = 0; j < cols; ++j) a[dst][j] -= q * a[src][j];
    for (std::size_t j = 0; j < rows; ++j) u[dst][j] -= q * u[src][j];
  };
  std::size_t lead = 0;
  for (std::size_t c = 0; c < cols && lead < rows; ++c) {
    while (true) {
      std::size_t piv = rows;
      for (std::size_t i = lead; i < rows; ++i)
        if (a[i][c] != 0 && (piv == rows || std::llabs(a[i][c]) < std::llabs(a[piv][c]))) piv = i;
      if (piv == rows) break;
      std::swap(a[lead], a[piv]);
      std::swap(u[lead], u[piv]);
      bool done = true;
      for (std::size_t i = lead + 1; i < rows; ++i) {
        if (a[i][c] == 0) continue;
        row_sub(i, lead, a[i][c] / a[lead][c]);
        if (a[i][c] != 0) done = false;
      }
      if (done) {
        ++lead;
        break;
      }
    }
  }
  return {u.begin() + static_cast<std::ptrdiff_t>(lead), u.end()};
}

namespace detail {

inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a;
}

struct TorusComparison {
  double radial = 0.0;  // radii and fixed-coordinate mismatch
  double phase = 0.0;   // worst lattice phase defect, scaled to a length
};

inline TorusComparison compare_torus(const TorusModel& model, std::span<const double> p, std::span<const double> q,
                                     double tol) {
  require(p.size() == model.dim() && q.size() == model.dim(), ErrorKind::DimensionMismatch,
          "point dimension differs from torus model");
  TorusComparison out;
  double r2 = 0.0;
  std::vector<std::size_t> active;
  std::vector<double> phi;
  double rmin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < model.planes(); ++k) {
    const double rp = std::hypot(p[2 * k], p[2 * k + 1]);
    const double rq = std::hypot(q[2 * k], q[2 * k + 1]);
    r2 += (rp - rq) * (rp - rq);
    if (std::min(rp, rq) >= tol) {
      active.push_back(k);
      phi.push_back(std::atan2(q[2 * k + 1], q[2 * k]) - std::atan2(p[2 * k + 1], p[2 * k]));
      rmin = std::min(rmin, std::min(rp, rq));
    }
  }
  for (std::size_t i = 2 * model.planes(); i < model.dim(); ++i) r2 += (p[i] - q[i]) * (p[i] - q[i]);
  out.radial = std::sqrt(r2);
  if (active.empty()) return out;
  std::vector<std::vector<long long>> sub;
  for (std::size_t k : active) sub.push_back(model.weights()[k]);
  for (const auto& u : integer_left_kernel(sub)) {
    double s = 0.0;
    double l1 = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      s += static_cast<double>(u[i]) * phi[i];
      l1 += std::fabs(static_cast<double>(u[i]));
    }
    out.phase = std::max(out.phase, std::fabs(wrap_angle(s)) * rmin / std::max(l1, 1.0));
  }
  return out;
}

}  // namespace detail

/// Same orbit: equal plane radii and fixed coordinates, and the phase
/// differences of the nonzero planes lie in the image of the torus.
inline bool same_leaf(const TorusModel& model, std::span<const double> p, std::span<const double> q, double tol) {
  const auto cmp = detail::compare_torus(model, p, q, tol);
  return cmp.radial < tol && cmp.phase < tol;
}

inline double leaf_distance(const TorusModel& model, std::span<const double> p, std::span<const double> q) {
  const auto cmp = detail::compare_torus(model, p, q, 1e-12);
  return std::max(cmp.radial, cmp.phase);
}

template <class Rng>
std::vector<double> leaf_mate(const TorusModel& model, std::span<const double> p, Rng& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::vector<Complex<double>> phases;
  for (std::size_t t = 0; t < model.torus_rank(); ++t) {
    const double th = angle(rng);
    phases.emplace_back(std::cos(th), std::sin(th));
  }
  return torus_act<double>(model, p, phases);
}

/// Rational point on the unit circle ((1 - t^2), 2t) / (1 + t^2).
inline Complex<Rational> rational_unit(const Rational& t) {
  const Rational d = Rational(1) + t * t;
  return {(Rational(1) - t * t) / d, Rational(2) * t / d};
}

}  // namespace leafavg
