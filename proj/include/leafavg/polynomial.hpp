#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "leafavg/error.hpp"
#include "leafavg/scalar.hpp"

namespace leafavg {

/// Exponent vector of a monomial x^a in n+1 ambient coordinates.
class Exponents {
 public:
  using value_type = unsigned;

  Exponents() = default;
  explicit Exponents(std::size_t dim) : e_(dim, 0u) {}
  Exponents(std::initializer_list<unsigned> e) : e_(e) {}
  explicit Exponents(std::vector<unsigned> e) : e_(std::move(e)) {}

  std::size_t size() const noexcept { return e_.size(); }
  unsigned operator[](std::size_t i) const { return e_[i]; }
  unsigned& operator[](std::size_t i) { return e_[i]; }
  auto begin() const noexcept { return e_.begin(); }
  auto end() const noexcept { return e_.end(); }

  unsigned degree() const noexcept { return std::accumulate(e_.begin(), e_.end(), 0u); }

  friend Exponents operator+(const Exponents& a, const Exponents& b) {
    Exponents out(a);
    for (std::size_t i = 0; i < a.size(); ++i) out.e_[i] += b.e_[i];
    return out;
  }
  friend bool operator==(const Exponents&, const Exponents&) = default;

  const std::vector<unsigned>& values() const noexcept { return e_; }

 private:
  std::vector<unsigned> e_;
};

/// Graded lexicographic order, largest first: higher total degree first, then
/// lexicographically larger exponent vectors (x1^2 before x1*x2 before x2^2).
struct GrlexGreater {
  bool operator()(const Exponents& a, const Exponents& b) const {
    const unsigned da = a.degree();
    const unsigned db = b.degree();
    if (da != db) return da > db;
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
  }
};

/// All exponent vectors of total degree d in `dim` variables, in graded
/// lexicographic order. The count is C(dim + d - 1, d).
inline std::vector<Exponents> monomial_basis(std::size_t dim, unsigned d) {
  std::vector<Exponents> out;
  if (dim == 0) {
    if (d == 0) out.emplace_back(0);
    return out;
  }
  Exponents cur(dim);
  std::function<void(std::size_t, unsigned)> rec = [&](std::size_t i, unsigned left) {
    if (i + 1 == dim) {
      cur[i] = left;
      out.push_back(cur);
      return;
    }
    for (unsigned k = left + 1; k-- > 0;) {
      cur[i] = k;
      rec(i + 1, left - k);
    }
    cur[i] = 0;
  };
  rec(0, d);
  return out;
}

template <class S>
class Polynomial {
 public:
  using Scalar = S;
  using TermMap = std::map<Exponents, S, GrlexGreater>;

  explicit Polynomial(std::size_t dim = 0) : dim_(dim) {}

  static Polynomial constant(std::size_t dim, S c) {
    Polynomial p(dim);
    p.add_term(Exponents(dim), std::move(c));
    return p;
  }
  static Polynomial variable(std::size_t dim, std::size_t i) {
    require(i < dim, ErrorKind::DimensionMismatch, "variable index out of range");
    Exponents e(dim);
    e[i] = 1;
    return monomial(std::move(e), S(1));
  }
  static Polynomial monomial(Exponents e, S c = S(1)) {
    Polynomial p(e.size());
    p.add_term(std::move(e), std::move(c));
    return p;
  }

  std::size_t dim() const noexcept { return dim_; }
  const TermMap& terms() const noexcept { return terms_; }
  std::size_t num_terms() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }

  S coefficient(const Exponents& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? S(0) : it->second;
  }

  /// Total degree; nullopt for the zero polynomial.
  std::optional<unsigned> degree() const {
    if (terms_.empty()) return std::nullopt;
    return terms_.begin()->first.degree();
  }

  /// True when every term has the same total degree (the zero polynomial counts).
  bool is_homogeneous() const {
    if (terms_.empty()) return true;
    const unsigned d = terms_.begin()->first.degree();
    return terms_.rbegin()->first.degree() == d;
  }

  void add_term(const Exponents& e, const S& c) {
    require(e.size() == dim_, ErrorKind::DimensionMismatch, "exponent length differs from ambient dimension");
    if (ScalarTraits<S>::is_zero(c)) return;
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (!inserted) {
      it->second += c;
      if (ScalarTraits<S>::is_zero(it->second)) terms_.erase(it);
    }
  }

  Polynomial& operator+=(const Polynomial& q) {
    check_dim(q);
    for (const auto& [e, c] : q.terms_) add_term(e, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& q) {
    check_dim(q);
    for (const auto& [e, c] : q.terms_) add_term(e, -c);
    return *this;
  }
  Polynomial& operator*=(const S& s) {
    if (ScalarTraits<S>::is_zero(s)) {
      terms_.clear();
      return *this;
    }
    for (auto& [e, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator-(Polynomial a) {
    for (auto& [e, c] : a.terms_) c = -c;
    return a;
  }
  friend Polynomial operator*(Polynomial a, const S& s) { return a *= s; }
  friend Polynomial operator*(const S& s, Polynomial a) { return a *= s; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check_dim(b);
    Polynomial out(a.dim_);
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) out.add_term(ea + eb, ca * cb);
    return out;
  }
  Polynomial& operator*=(const Polynomial& b) { return *this = *this * b; }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.dim_ == b.dim_ && a.terms_ == b.terms_;
  }

  Polynomial pow(unsigned k) const {
    Polynomial out = constant(dim_, S(1));
    Polynomial base = *this;
    while (k) {
      if (k & 1u) out *= base;
      k >>= 1u;
      if (k) base *= base;
    }
    return out;
  }

  /// Evaluates at x in any scalar type T constructible from S (S itself or double).
  template <class T = S>
  T eval(std::span<const T> x) const {
    require(x.size() == dim_, ErrorKind::DimensionMismatch,
            "point has " + std::to_string(x.size()) + " coordinates, polynomial has " + std::to_string(dim_));
    T acc(0);
    for (const auto& [e, c] : terms_) {
      T term = scalar_cast<T>(c);
      for (std::size_t i = 0; i < dim_; ++i)
        for (unsigned k = 0; k < e[i]; ++k) term *= x[i];
      acc += term;
    }
    return acc;
  }
  template <class T = S>
  T eval(const std::vector<T>& x) const {
    return eval<T>(std::span<const T>(x));
  }

  void check_dim(const Polynomial& q) const {
    require(dim_ == q.dim_, ErrorKind::DimensionMismatch,
            "ambient dimensions " + std::to_string(dim_) + " and " + std::to_string(q.dim_) + " differ");
  }

 private:
  std::size_t dim_;
  TermMap terms_;
};

template <class To, class From>
Polynomial<To> convert(const Polynomial<From>& p) {
  Polynomial<To> out(p.dim());
  for (const auto& [e, c] : p.terms()) out.add_term(e, scalar_cast<To>(c));
  return out;
}

inline Polynomial<double> to_floating(const Polynomial<Rational>& p) { return convert<double>(p); }

template <class S>
Polynomial<S> derivative(const Polynomial<S>& p, std::size_t i) {
  require(i < p.dim(), ErrorKind::DimensionMismatch, "derivative index out of range");
  Polynomial<S> out(p.dim());
  for (const auto& [e, c] : p.terms()) {
    if (e[i] == 0) continue;
    Exponents f = e;
    f[i] -= 1;
    out.add_term(f, c * S(e[i]));
  }
  return out;
}

template <class S>
std::vector<Polynomial<S>> gradient(const Polynomial<S>& p) {
  std::vector<Polynomial<S>> out;
  out.reserve(p.dim());
  for (std::size_t i = 0; i < p.dim(); ++i) out.push_back(derivative(p, i));
  return out;
}

template <class S>
Polynomial<S> laplacian(const Polynomial<S>& p) {
  Polynomial<S> out(p.dim());
  for (const auto& [e, c] : p.terms()) {
    for (std::size_t i = 0; i < p.dim(); ++i) {
      if (e[i] < 2) continue;
      Exponents f = e;
      f[i] -= 2;
      out.add_term(f, c * S(e[i] * (e[i] - 1)));
    }
  }
  return out;
}

/// <grad p, grad q>.
template <class S>
Polynomial<S> gradient_dot(const Polynomial<S>& p, const Polynomial<S>& q) {
  p.check_dim(q);
  Polynomial<S> out(p.dim());
  for (std::size_t i = 0; i < p.dim(); ++i) out += derivative(p, i) * derivative(q, i);
  return out;
}

/// Euler field E = sum x_i d_i applied to p; E(p) = m p on degree-m components.
template <class S>
Polynomial<S> euler_derivative(const Polynomial<S>& p) {
  Polynomial<S> out(p.dim());
  for (const auto& [e, c] : p.terms()) out.add_term(e, c * S(e.degree()));
  return out;
}

/// r^2 = x1^2 + ... + xn^2.
template <class S>
Polynomial<S> radius_squared(std::size_t dim) {
  Polynomial<S> out(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    Exponents e(dim);
    e[i] = 2;
    out.add_term(e, S(1));
  }
  return out;
}

template <class S>
std::map<unsigned, Polynomial<S>> homogeneous_components(const Polynomial<S>& p) {
  std::map<unsigned, Polynomial<S>> out;
  for (const auto& [e, c] : p.terms()) {
    auto [it, _] = out.try_emplace(e.degree(), p.dim());
    it->second.add_term(e, c);
  }
  return out;
}

/// Coefficients of p over a monomial list (missing monomials read as 0).
template <class S>
std::vector<S> coefficient_vector(const Polynomial<S>& p, const std::vector<Exponents>& basis) {
  std::vector<S> out;
  out.reserve(basis.size());
  for (const auto& e : basis) out.push_back(p.coefficient(e));
  return out;
}

template <class S>
Polynomial<S> from_coefficients(std::size_t dim, const std::vector<Exponents>& basis, std::span<const S> coeffs) {
  require(basis.size() == coeffs.size(), ErrorKind::DimensionMismatch, "coefficient count differs from basis size");
  Polynomial<S> out(dim);
  for (std::size_t i = 0; i < basis.size(); ++i) out.add_term(basis[i], coeffs[i]);
  return out;
}

/// Substitutes x -> M x, i.e. returns the polynomial x |-> p(M x). `matrix`
/// is row-major dim x dim.
template <class S>
Polynomial<S> compose_linear(const Polynomial<S>& p, std::span<const S> matrix) {
  const std::size_t n = p.dim();
  require(matrix.size() == n * n, ErrorKind::DimensionMismatch, "matrix size does not match polynomial dimension");
  std::vector<Polynomial<S>> forms;
  forms.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Polynomial<S> l(n);
    for (std::size_t j = 0; j < n; ++j) {
      Exponents e(n);
      e[j] = 1;
      l.add_term(e, matrix[i * n + j]);
    }
    forms.push_back(std::move(l));
  }
  // powers[i][k] = forms[i]^k, grown lazily.
  std::vector<std::vector<Polynomial<S>>> powers(n);
  for (std::size_t i = 0; i < n; ++i) powers[i].push_back(Polynomial<S>::constant(n, S(1)));
  auto power = [&](std::size_t i, unsigned k) -> const Polynomial<S>& {
    while (powers[i].size() <= k) powers[i].push_back(powers[i].back() * forms[i]);
    return powers[i][k];
  };
  Polynomial<S> out(n);
  for (const auto& [e, c] : p.terms()) {
    Polynomial<S> term = Polynomial<S>::constant(n, c);
    for (std::size_t i = 0; i < n; ++i)
      if (e[i]) term = term * power(i, e[i]);
    out += term;
  }
  return out;
}

/// Flattened double-precision evaluator for hot loops (Monte Carlo).
class CompiledPolynomial {
 public:
  CompiledPolynomial() = default;
  template <class S>
  explicit CompiledPolynomial(const Polynomial<S>& p) : dim_(p.dim()) {
    for (const auto& [e, c] : p.terms()) {
      coeffs_.push_back(to_double(c));
      for (std::size_t i = 0; i < dim_; ++i) {
        exps_.push_back(e[i]);
        max_exp_ = std::max(max_exp_, e[i]);
      }
    }
  }

  std::size_t dim() const noexcept { return dim_; }
  unsigned max_exponent() const noexcept { return max_exp_; }

  /// `powers` holds x_i^k at index i * (stride) + k, stride >= max_exponent()+1.
  double eval_with_powers(const double* powers, std::size_t stride) const {
    double acc = 0.0;
    const unsigned* e = exps_.data();
    for (double c : coeffs_) {
      double t = c;
      for (std::size_t i = 0; i < dim_; ++i, ++e)
        if (*e) t *= powers[i * stride + *e];
      acc += t;
    }
    return acc;
  }

  double operator()(std::span<const double> x) const {
    const std::size_t stride = max_exp_ + 1;
    std::vector<double> pw(dim_ * stride);
    fill_powers(x, pw.data(), stride);
    return eval_with_powers(pw.data(), stride);
  }

  static void fill_powers(std::span<const double> x, double* out, std::size_t stride) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      double v = 1.0;
      out[i * stride] = 1.0;
      for (std::size_t k = 1; k < stride; ++k) {
        v *= x[i];
        out[i * stride + k] = v;
      }
    }
  }

 private:
  std::size_t dim_ = 0;
  unsigned max_exp_ = 0;
  std::vector<double> coeffs_;
  std::vector<unsigned> exps_;
};

}  // namespace leafavg
