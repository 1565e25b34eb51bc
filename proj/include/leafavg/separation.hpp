#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "leafavg/finite_group.hpp"
#include "leafavg/isoparametric.hpp"
#include "leafavg/polynomial.hpp"
#include "leafavg/sphere.hpp"
#include "leafavg/torus.hpp"

namespace leafavg {

/// rho(x) = (rho_1(x), ..., rho_k(x)).
inline std::vector<double> rho_eval(const std::vector<CompiledPolynomial>& gens, std::span<const double> x) {
  std::vector<double> out;
  out.reserve(gens.size());
  for (const auto& g : gens) {
    require(g.dim() == x.size(), ErrorKind::DimensionMismatch, "point dimension differs from generators");
    out.push_back(g(x));
  }
  return out;
}

inline std::vector<double> rho_eval(const std::vector<Polynomial<double>>& gens, std::span<const double> x) {
  return rho_eval(std::vector<CompiledPolynomial>(gens.begin(), gens.end()), x);
}

struct SeparationOptions {
  std::size_t num_pairs = 1000;
  /// Same-leaf tolerance, also the collision threshold for distinct pairs.
  double tol_same = 1e-8;
  /// Distinct pairs must be at least this far apart in leaf distance.
  double min_leaf_distance = 1e-6;
  double margin_min = 10.0;
  std::uint64_t seed = 1;
  std::size_t max_failures_stored = 20;
  std::size_t max_rejections = 100000;
  /// Adds pairs of signed basis vectors to the sample.
  bool probe_basis_pairs = true;
};

struct PairRecord {
  std::vector<double> p, q;
  double leaf_distance = 0.0;
  double rho_distance = 0.0;
  std::string kind;  // "same_leaf_discrepancy" or "distinct_collision"
};

struct DistanceBin {
  int decade = 0;  // leaf distance in [10^decade, 10^(decade+1))
  std::size_t count = 0;
  double min_rho_distance = std::numeric_limits<double>::infinity();
};

struct SeparationCertificate {
  std::string generator_set;
  std::size_t num_generators = 0;
  std::size_t same_pairs = 0;
  double max_same_discrepancy = 0.0;
  std::size_t distinct_pairs = 0;
  double min_distinct_distance = std::numeric_limits<double>::infinity();
  double margin_ratio = std::numeric_limits<double>::infinity();
  std::size_t failure_count = 0;
  std::vector<PairRecord> failures;  // first max_failures_stored
  std::vector<DistanceBin> bins;
  SeparationOptions options;
  std::string same_leaf_construction;
  bool pass = false;
};

namespace detail {

inline const char* mate_construction(const IsoparametricModel&) {
  return "level projection: random sphere point moved onto the level of p by Newton steps along the tangential "
         "gradient; leaf membership is the F-level predicate";
}
inline const char* mate_construction(const TorusModel&) { return "random torus phases"; }
template <class S>
const char* mate_construction(const FiniteGroupModel<S>&) {
  return "random group element";
}

inline int decade_of(double x) { return x > 0.0 ? static_cast<int>(std::floor(std::log10(x))) : -300; }

}  // namespace detail

/// Samples same-leaf and distinct-leaf pairs and checks that rho is constant on
/// the former and separates the latter. Failures are recorded, not thrown.
template <class Model>
SeparationCertificate separation_test(const Model& model, const std::vector<Polynomial<double>>& gens,
                                      const SeparationOptions& opts, std::string gens_id = "") {
  require(opts.num_pairs >= 1, ErrorKind::ConfigError, "num_pairs must be >= 1");
  const std::size_t dim = model.dim();
  for (const auto& g : gens)
    require(g.dim() == dim, ErrorKind::DimensionMismatch, "generator dimension differs from model");
  const std::vector<CompiledPolynomial> rho(gens.begin(), gens.end());
  SeparationCertificate cert;
  cert.generator_set = std::move(gens_id);
  cert.num_generators = gens.size();
  cert.options = opts;
  cert.same_leaf_construction = detail::mate_construction(model);
  std::map<int, DistanceBin> bins;

  auto rho_distance = [&](std::span<const double> p, std::span<const double> q) {
    return distance(rho_eval(rho, p), rho_eval(rho, q));
  };
  auto record = [&](std::vector<double> p, std::vector<double> q, double ld, double rd, const char* kind) {
    ++cert.failure_count;
    if (cert.failures.size() < opts.max_failures_stored)
      cert.failures.push_back({std::move(p), std::move(q), ld, rd, kind});
  };
  auto add_same = [&](std::vector<double> p, std::vector<double> q) {
    const double rd = rho_distance(p, q);
    ++cert.same_pairs;
    cert.max_same_discrepancy = std::max(cert.max_same_discrepancy, rd);
    if (rd > opts.tol_same) {
      const double ld = leaf_distance(model, p, q);
      record(std::move(p), std::move(q), ld, rd, "same_leaf_discrepancy");
    }
  };
  auto add_distinct = [&](std::vector<double> p, std::vector<double> q, double ld) {
    const double rd = rho_distance(p, q);
    ++cert.distinct_pairs;
    cert.min_distinct_distance = std::min(cert.min_distinct_distance, rd);
    auto& bin = bins[detail::decade_of(ld)];
    bin.decade = detail::decade_of(ld);
    ++bin.count;
    bin.min_rho_distance = std::min(bin.min_rho_distance, rd);
    if (rd <= opts.tol_same) record(std::move(p), std::move(q), ld, rd, "distinct_collision");
  };

  // Basis-vector probes first, so their failures are among the stored ones.
  if (opts.probe_basis_pairs) {
    auto unit = [&](std::size_t i, double s) {
      std::vector<double> e(dim, 0.0);
      e[i] = s;
      return e;
    };
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = i; j < dim; ++j)
        for (double s : {1.0, -1.0}) {
          if (i == j && s > 0) continue;
          auto p = unit(i, 1.0);
          auto q = unit(j, s);
          const double ld = leaf_distance(model, p, q);
          if (ld < opts.tol_same)
            add_same(std::move(p), std::move(q));
          else if (ld >= opts.min_leaf_distance)
            add_distinct(std::move(p), std::move(q), ld);
        }
  }
  for (std::size_t i = 0; i < opts.num_pairs; ++i) {
    std::mt19937_64 rng(derive_seed(opts.seed, 2 * i));
    SphereSampler sampler(derive_seed(opts.seed, 2 * i + 1));
    auto p = sampler.sample(dim);
    auto q = leaf_mate(model, p, rng);
    add_same(std::move(p), std::move(q));
  }
  std::size_t rejections = 0;
  for (std::size_t i = 0; i < opts.num_pairs; ++i) {
    SphereSampler sampler(derive_seed(opts.seed, 0x5E9A0000ULL + i));
    while (true) {
      auto p = sampler.sample(dim);
      auto q = sampler.sample(dim);
      const double ld = leaf_distance(model, p, q);
      if (ld >= opts.min_leaf_distance) {
        add_distinct(std::move(p), std::move(q), ld);
        break;
      }
      if (++rejections > opts.max_rejections)
        throw Error(ErrorKind::InsufficientDistinctPairs, "could not sample distinct-leaf pairs after " +
                                                              std::to_string(opts.max_rejections) + " rejections");
    }
  }
  for (auto& [d, b] : bins) cert.bins.push_back(b);
  if (cert.max_same_discrepancy > 0.0)
    cert.margin_ratio = cert.min_distinct_distance / cert.max_same_discrepancy;
  else
    cert.margin_ratio = cert.min_distinct_distance > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  cert.pass = cert.failure_count == 0 && cert.margin_ratio > opts.margin_min;
  return cert;
}

// ---------------------------------------------------------------------------
// Quotient image export

struct QuotientTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

namespace detail {

inline std::vector<std::string> label_names(const IsoparametricModel&) { return {"level"}; }
inline std::vector<double> labels(const IsoparametricModel& m, std::span<const double> x) { return {m.level(x)}; }

inline std::vector<std::string> label_names(const TorusModel& m) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < m.planes(); ++k) out.push_back("radius" + std::to_string(k + 1));
  return out;
}
inline std::vector<double> labels(const TorusModel& m, std::span<const double> x) {
  std::vector<double> out;
  for (std::size_t k = 0; k < m.planes(); ++k) out.push_back(std::hypot(x[2 * k], x[2 * k + 1]));
  return out;
}

template <class S>
std::vector<std::string> label_names(const FiniteGroupModel<S>&) {
  return {};
}
template <class S>
std::vector<double> labels(const FiniteGroupModel<S>&, std::span<const double>) {
  return {};
}

}  // namespace detail

/// Sphere samples with their rho-image and leaf labels (where the model has
/// cheap leaf invariants). Deterministic given the seed.
template <class Model>
QuotientTable quotient_image_export(const Model& model, const std::vector<Polynomial<double>>& gens,
                                    std::size_t num_samples, std::uint64_t seed) {
  QuotientTable t;
  const std::size_t dim = model.dim();
  for (std::size_t i = 0; i < dim; ++i) t.header.push_back("x" + std::to_string(i + 1));
  for (std::size_t i = 0; i < gens.size(); ++i) t.header.push_back("rho" + std::to_string(i + 1));
  for (auto& n : detail::label_names(model)) t.header.push_back(n);
  const std::vector<CompiledPolynomial> rho(gens.begin(), gens.end());
  SphereSampler sampler(seed);
  for (std::size_t s = 0; s < num_samples; ++s) {
    auto x = sampler.sample(dim);
    std::vector<double> row = x;
    for (double v : rho_eval(rho, x)) row.push_back(v);
    for (double v : detail::labels(model, x)) row.push_back(v);
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// CSV with a header row and fixed 15-decimal values.
inline std::string to_csv(const QuotientTable& t) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + t.header[i];
  out += '\n';
  char buf[64];
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.15f", row[i] == 0.0 ? 0.0 : row[i]);
      if (i) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace leafavg
