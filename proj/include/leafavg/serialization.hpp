#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>

#include "leafavg/averaging.hpp"
#include "leafavg/basic_ring.hpp"
#include "leafavg/config.hpp"
#include "leafavg/separation.hpp"

namespace leafavg {

/// Non-finite doubles become strings: JSON has no infinity.
inline Json json_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

inline Json json_numbers(const std::vector<double>& xs) {
  Json out = Json::array();
  for (double x : xs) out.push_back(json_number(x));
  return out;
}

template <class S>
Json json_polys(const std::vector<Polynomial<S>>& ps) {
  Json out = Json::array();
  for (const auto& p : ps) out.push_back(to_string(p));
  return out;
}

inline Json to_json(const LoadedModel& m) {
  Json j;
  j["id"] = m.id;
  j["kind"] = m.kind;
  j["dim"] = m.dim();
  j["scalar"] = m.mode == ScalarMode::ExactRational ? "rational" : "float";
  std::visit(
      [&](const auto& model) {
        using M = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<M, TorusModel>) {
          j["weights"] = model.weights();
          j["n_fix"] = model.fixed();
        } else if constexpr (std::is_same_v<M, IsoparametricModel>) {
          j["F"] = to_string(model.F());
          j["g"] = model.g();
          j["munzner_constant"] = json_number(model.munzner_constant());
          const auto& p = model.params();
          j["estimator"] = {{"N", p.sample_count},    {"h", p.bandwidth},     {"tol_level", p.tol_level},
                            {"min_ess", p.min_ess},   {"workers", p.workers}, {"blocks", p.blocks}};
        } else {
          j["order"] = model.order();
        }
      },
      m.model);
  return j;
}

inline Json to_json(const Residuals& r) {
  return {{"idempotence", json_number(r.idempotence)},
          {"leaf_constancy", json_number(r.leaf_constancy)},
          {"laplacian_commutation", json_number(r.laplacian_commutation)},
          {"contraction_slack", json_number(r.contraction_slack)},
          {"selfadjoint_gap", json_number(r.selfadjoint_gap)}};
}

inline Json to_json(const FitDiagnostics& f) {
  return {{"condition", json_number(f.condition)}, {"residual_norm", json_number(f.residual_norm)},
          {"sample_points", f.sample_points},      {"mc_samples", f.mc_samples},
          {"seed", f.seed},                        {"bandwidth", f.bandwidth}};
}

template <class S>
Json to_json(const AveragingCertificate<S>& c) {
  Json j;
  j["input"] = to_string(c.input);
  j["output"] = to_string(c.output);
  j["engine"] = std::string(to_string(c.engine));
  j["degree"] = c.degree;
  j["residuals"] = to_json(c.residuals);
  j["residual_tolerance"] = json_number(c.residual_tolerance);
  j["laplacian_tolerance"] = json_number(c.laplacian_tolerance);
  if (c.engine != Engine::Exact) {
    j["fit"] = to_json(c.fit);
    j["std_errors"] = json_numbers(c.std_errors);
  }
  return j;
}

inline Json to_json(const StructuredFit& s, const std::vector<Polynomial<double>>& gens) {
  Json j;
  j["generators"] = json_polys(gens);
  Json terms = Json::array();
  for (std::size_t k = 0; k < s.patterns.size(); ++k)
    terms.push_back({{"exponents", s.patterns[k]},
                     {"coefficient", json_number(s.fit.coefficients[k])},
                     {"std_error", json_number(s.fit.std_errors[k])}});
  j["terms"] = terms;
  j["average"] = to_string(s.fit.average);
  j["residual_rms"] = json_number(s.fit.residual_rms);
  j["condition"] = json_number(s.fit.condition);
  j["sample_points"] = s.fit.sample_points;
  j["mc_samples"] = s.fit.mc_samples;
  j["seed"] = s.fit.seed;
  if (s.unstructured) {
    j["unstructured_average"] = to_string(s.unstructured->average);
    j["difference_norm"] = json_number(s.difference_norm);
    j["difference_std_error"] = json_number(s.difference_se);
    j["agrees_within_2se"] = s.difference_norm <= 2.0 * s.difference_se;
  }
  return j;
}

inline Json to_json(const IdentityReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name},
                      {"residual", json_number(c.residual)},
                      {"tolerance", json_number(c.tolerance)},
                      {"pass", c.pass}});
  return {{"engine", r.engine}, {"checks", checks}, {"pass", r.ok()}};
}

inline Json to_json(const GenerationReport& r) {
  Json rows = Json::array();
  for (const auto& d : r.degrees)
    rows.push_back({{"degree", d.degree},
                    {"basic_dimension", d.basic_dimension},
                    {"product_dimension", d.product_dimension},
                    {"max_residual", json_number(d.max_residual)},
                    {"pass", d.pass}});
  return rows;
}

template <class S>
Json to_json(const GeneratorSet<S>& g, const LoadedModel& model) {
  Json j;
  j["task"] = "generators";
  j["model"] = to_json(model);
  j["dim"] = model.dim();
  j["scalar"] = ScalarTraits<S>::exact ? "rational" : "float";
  j["engine"] = g.engine;
  j["degree_cap"] = g.degree_cap;
  j["tol_rank"] = json_number(g.tol_rank);
  j["seed"] = g.seed;
  j["generators"] = json_polys(g.generators);
  j["degrees"] = g.degrees();
  j["basic_dimensions"] = g.basic_dimensions;
  j["new_generators"] = g.new_generators;
  if constexpr (!ScalarTraits<S>::exact) j["rank_gaps"] = json_numbers(g.rank_gaps);
  j["warnings"] = g.warnings;
  return j;
}

inline Json to_json(const SeparationCertificate& c) {
  Json j;
  j["generator_set"] = c.generator_set;
  j["num_generators"] = c.num_generators;
  j["same_pairs"] = c.same_pairs;
  j["max_same_discrepancy"] = json_number(c.max_same_discrepancy);
  j["distinct_pairs"] = c.distinct_pairs;
  j["min_distinct_distance"] = json_number(c.min_distinct_distance);
  j["margin_ratio"] = json_number(c.margin_ratio);
  j["margin_min"] = json_number(c.options.margin_min);
  j["failure_count"] = c.failure_count;
  Json fails = Json::array();
  for (const auto& f : c.failures)
    fails.push_back({{"kind", f.kind},
                     {"p", json_numbers(f.p)},
                     {"q", json_numbers(f.q)},
                     {"leaf_distance", json_number(f.leaf_distance)},
                     {"rho_distance", json_number(f.rho_distance)}});
  j["failures"] = fails;
  Json bins = Json::array();
  for (const auto& b : c.bins)
    bins.push_back({{"leaf_distance_decade", b.decade},
                    {"count", b.count},
                    {"min_rho_distance", json_number(b.min_rho_distance)}});
  j["distinct_bins"] = bins;
  j["num_pairs"] = c.options.num_pairs;
  j["tol_same"] = json_number(c.options.tol_same);
  j["min_leaf_distance"] = json_number(c.options.min_leaf_distance);
  j["seed"] = c.options.seed;
  j["same_leaf_construction"] = c.same_leaf_construction;
  j["pass"] = c.pass;
  return j;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::ConfigError, "cannot write " + path.string());
  out << text;
}

inline void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace leafavg
