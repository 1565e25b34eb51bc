#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <random>
#include <vector>

#include "leafavg/polynomial.hpp"

namespace leafavg {

/// Normalized sphere moment  mean_{S^n} x^a  for a in N^{n+1}:
///   prod (a_i - 1)!! / (N (N+2) ... (N + |a| - 2)),  N = n + 1,
/// when every a_i is even, and 0 otherwise.
template <class S>
S sphere_moment(const Exponents& a) {
  const std::size_t dim = a.size();
  S num(1);
  unsigned total = 0;
  for (unsigned ai : a) {
    if (ai % 2) return S(0);
    for (unsigned k = 1; k < ai; k += 2) num *= S(k);
    total += ai;
  }
  S den(1);
  for (unsigned k = 0; k < total / 2; ++k) den *= S(static_cast<unsigned>(dim + 2 * k));
  return num / den;
}

/// Memoizing moment table for one ambient dimension. Lookups are safe from
/// concurrent readers; the cache is filled idempotently.
template <class S>
class SphereMomentTable {
 public:
  explicit SphereMomentTable(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }

  S operator()(const Exponents& a) const {
    require(a.size() == dim_, ErrorKind::DimensionMismatch, "moment exponent length mismatch");
    for (unsigned ai : a)
      if (ai % 2) return S(0);
    std::lock_guard lock(mutex_);
    auto it = cache_.find(a);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(a, sphere_moment<S>(a)).first->second;
  }

 private:
  std::size_t dim_;
  mutable std::mutex mutex_;
  mutable std::map<Exponents, S, GrlexGreater> cache_;
};

/// Mean of p over the unit sphere with the normalized (probability) measure.
template <class S>
S sphere_mean(const Polynomial<S>& p) {
  S acc(0);
  for (const auto& [e, c] : p.terms()) {
    S m = sphere_moment<S>(e);
    if (!ScalarTraits<S>::is_zero(m)) acc += c * m;
  }
  return acc;
}

/// L^2 pairing mean(p q) on the unit sphere.
template <class S>
S sphere_inner(const Polynomial<S>& p, const Polynomial<S>& q) {
  p.check_dim(q);
  S acc(0);
  for (const auto& [ea, ca] : p.terms())
    for (const auto& [eb, cb] : q.terms()) {
      S m = sphere_moment<S>(ea + eb);
      if (!ScalarTraits<S>::is_zero(m)) acc += ca * cb * m;
    }
  return acc;
}

template <class S>
double sphere_norm(const Polynomial<S>& p) {
  return std::sqrt(std::max(0.0, to_double(sphere_inner(p, p))));
}

/// Gram matrix of the sphere inner product over a monomial list.
template <class S>
std::vector<std::vector<S>> sphere_gram(const std::vector<Exponents>& basis) {
  std::vector<std::vector<S>> g(basis.size(), std::vector<S>(basis.size(), S(0)));
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = i; j < basis.size(); ++j) g[i][j] = g[j][i] = sphere_moment<S>(basis[i] + basis[j]);
  return g;
}

/// splitmix64 finalizer: decorrelates derived seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

/// Deterministic uniform sampler on the unit sphere (normalized Gaussian).
class SphereSampler {
 public:
  explicit SphereSampler(std::uint64_t seed) : engine_(seed) {}

  void sample(std::span<double> out) {
    double n2 = 0.0;
    do {
      n2 = 0.0;
      for (double& v : out) {
        v = normal_(engine_);
        n2 += v * v;
      }
    } while (n2 == 0.0);
    const double inv = 1.0 / std::sqrt(n2);
    for (double& v : out) v *= inv;
  }

  std::vector<double> sample(std::size_t dim) {
    std::vector<double> x(dim);
    sample(x);
    return x;
  }

  double uniform() { return uniform_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

inline std::vector<double> sample_sphere(std::size_t dim, std::uint64_t seed) {
  SphereSampler sampler(seed);
  return sampler.sample(dim);
}

inline double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace leafavg
