#pragma once

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "leafavg/averaging.hpp"
#include "leafavg/finite_group.hpp"
#include "leafavg/isoparametric.hpp"
#include "leafavg/polynomial_io.hpp"
#include "leafavg/torus.hpp"

namespace leafavg {

using Json = nlohmann::ordered_json;

using AnyModel = std::variant<FiniteGroupModel<Rational>, FiniteGroupModel<double>, TorusModel, IsoparametricModel>;

struct LoadedModel {
  std::string id;
  std::string kind;
  ScalarMode mode = ScalarMode::ExactRational;
  AnyModel model = TorusModel({{1}}, 0);

  std::size_t dim() const {
    return std::visit([](const auto& m) { return m.dim(); }, model);
  }
};

/// Task parameters; every field has a default except the seed, which stochastic
/// tasks require.
struct RunConfig {
  std::filesystem::path source;
  LoadedModel model;
  std::optional<std::uint64_t> seed;

  std::vector<std::string> avg_inputs;  // polynomials in text format
  std::vector<std::string> structured_generators;

  unsigned degree_cap = 4;
  std::optional<double> tol_rank;

  std::size_t identity_trials = 5;

  std::size_t num_pairs = 1000;
  double tol_same = 1e-8;
  double margin_min = 10.0;

  std::size_t export_samples = 200;

  FitOptions fit;
};

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorKind::ConfigError, where + ": missing field '" + key + "'");
  return j.at(key);
}

template <class T>
T get_as(const Json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, where + ": " + e.what());
  }
}

template <class T>
T get_or(const Json& j, const char* key, T fallback, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return get_as<T>(j.at(key), where + "." + key);
}

template <class S>
S json_scalar(const Json& v, const std::string& where) {
  if (v.is_string()) return parse_scalar<S>(v.get<std::string>());
  if (v.is_number_integer()) return parse_scalar<S>(std::to_string(v.get<long long>()));
  if (v.is_number()) return parse_scalar<S>(v.dump());
  throw Error(ErrorKind::ConfigError, where + ": expected a number or a \"p/q\" string");
}

template <class S>
std::vector<Matrix<S>> json_matrices(const Json& list, std::size_t dim, const std::string& where) {
  if (!list.is_array()) throw Error(ErrorKind::ConfigError, where + ": expected a list of matrices");
  std::vector<Matrix<S>> out;
  for (std::size_t k = 0; k < list.size(); ++k) {
    const std::string at = where + "[" + std::to_string(k) + "]";
    const Json& m = list[k];
    if (!m.is_array() || m.size() != dim * dim)
      throw Error(ErrorKind::DimensionMismatch,
                  at + ": expected " + std::to_string(dim * dim) + " row-major entries");
    std::vector<S> data;
    for (std::size_t i = 0; i < m.size(); ++i) data.push_back(json_scalar<S>(m[i], at));
    out.emplace_back(dim, dim, std::move(data));
  }
  return out;
}

inline ScalarMode parse_mode(const std::string& s, const std::string& where) {
  if (s == "rational") return ScalarMode::ExactRational;
  if (s == "float") return ScalarMode::Floating;
  throw Error(ErrorKind::ConfigError, where + ": scalar must be \"rational\" or \"float\"");
}

inline EstimatorParams parse_estimator(const Json& j, const std::string& where) {
  EstimatorParams p;
  p.sample_count = get_or<std::uint64_t>(j, "N", p.sample_count, where);
  p.bandwidth = get_or<double>(j, "h", p.bandwidth, where);
  p.tol_level = get_or<double>(j, "tol_level", p.tol_level, where);
  p.min_ess = get_or<double>(j, "min_ess", p.min_ess, where);
  p.workers = get_or<unsigned>(j, "workers", p.workers, where);
  if (p.sample_count == 0 || !(p.bandwidth > 0.0 && p.bandwidth < 1.0) || p.workers == 0)
    throw Error(ErrorKind::ConfigError, where + ": need N >= 1, 0 < h < 1, workers >= 1");
  return p;
}

}  // namespace detail

inline LoadedModel load_model(const Json& j) {
  const std::string where = "model";
  LoadedModel out{detail::get_or<std::string>(j, "id", "model", where),
                  detail::get_as<std::string>(detail::field(j, "kind", where), "model.kind"),
                  ScalarMode::ExactRational,
                  TorusModel({{1}}, 0)};
  if (out.kind == "finite_group") {
    const auto dim = detail::get_as<std::size_t>(detail::field(j, "dim", where), "model.dim");
    out.mode = detail::parse_mode(detail::get_or<std::string>(j, "scalar", "rational", where), "model.scalar");
    ClosureOptions opts;
    opts.max_group_size = detail::get_or<std::size_t>(j, "max_group_size", opts.max_group_size, where);
    opts.tol_dedup = detail::get_or<double>(j, "tol_dedup", opts.tol_dedup, where);
    const Json& gens = detail::field(j, "generators", where);
    if (out.mode == ScalarMode::ExactRational)
      out.model = group_closure(detail::json_matrices<Rational>(gens, dim, "model.generators"), opts);
    else
      out.model = group_closure(detail::json_matrices<double>(gens, dim, "model.generators"), opts);
  } else if (out.kind == "torus") {
    out.mode = detail::parse_mode(detail::get_or<std::string>(j, "scalar", "rational", where), "model.scalar");
    out.model = TorusModel(
        detail::get_as<std::vector<std::vector<long long>>>(detail::field(j, "weights", where), "model.weights"),
        detail::get_or<std::size_t>(j, "n_fix", 0, where));
  } else if (out.kind == "isoparametric") {
    out.mode = ScalarMode::Floating;
    const auto dim = detail::get_as<std::size_t>(detail::field(j, "dim", where), "model.dim");
    const auto g = detail::get_as<unsigned>(detail::field(j, "g", where), "model.g");
    const auto text = detail::get_as<std::string>(detail::field(j, "F", where), "model.F");
    // Admission is symbolic and exact: parse rationally, then validate.
    const auto exact = parse_polynomial<Rational>(text, dim);
    validate_munzner(exact, g);
    const auto params = detail::parse_estimator(j.contains("estimator") ? j.at("estimator") : Json::object(),
                                                "model.estimator");
    out.model = IsoparametricModel::admit(to_floating(exact), g, params);
  } else {
    throw Error(ErrorKind::ConfigError,
                "model.kind: unknown kind '" + out.kind + "' (finite_group | torus | isoparametric)");
  }
  return out;
}

inline Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw Error(ErrorKind::ParseError,
                origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON");
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline RunConfig parse_run_config(const std::string& text, const std::string& origin = "<config>") {
  const Json j = parse_json_text(text, origin);
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, origin + ": top level must be an object");
  RunConfig cfg;
  cfg.model = load_model(detail::field(j, "model", origin));
  if (j.contains("seed")) cfg.seed = detail::get_as<std::uint64_t>(j.at("seed"), "seed");

  const Json none = Json::object();
  const Json& tasks = j.contains("tasks") ? j.at("tasks") : none;
  auto section = [&](const char* name) -> const Json& { return tasks.contains(name) ? tasks.at(name) : none; };

  const Json& avg = section("avg");
  cfg.avg_inputs = detail::get_or<std::vector<std::string>>(avg, "f", {}, "tasks.avg");
  cfg.structured_generators = detail::get_or<std::vector<std::string>>(avg, "structured_generators", {}, "tasks.avg");
  const std::size_t dim = cfg.model.dim();
  for (const auto& f : cfg.avg_inputs) parse_polynomial<Rational>(f, dim);
  for (const auto& f : cfg.structured_generators) parse_polynomial<Rational>(f, dim);

  const Json& fit = section("fit");
  cfg.fit.points_per_unknown = detail::get_or<std::size_t>(fit, "points_per_unknown", cfg.fit.points_per_unknown, "tasks.fit");
  cfg.fit.cond_cap = detail::get_or<double>(fit, "cond_cap", cfg.fit.cond_cap, "tasks.fit");
  cfg.fit.fit_tol = detail::get_or<double>(fit, "fit_tol", cfg.fit.fit_tol, "tasks.fit");
  cfg.fit.max_resample = detail::get_or<int>(fit, "max_resample", cfg.fit.max_resample, "tasks.fit");

  const Json& gens = section("generators");
  cfg.degree_cap = detail::get_or<unsigned>(gens, "degree_cap", cfg.degree_cap, "tasks.generators");
  if (gens.contains("tol_rank")) cfg.tol_rank = detail::get_as<double>(gens.at("tol_rank"), "tasks.generators.tol_rank");
  if (cfg.degree_cap < 1) throw Error(ErrorKind::ConfigError, "tasks.generators.degree_cap must be >= 1");

  const Json& verify = section("verify");
  cfg.identity_trials = detail::get_or<std::size_t>(verify, "identity_trials", cfg.identity_trials, "tasks.verify");

  const Json& sep = section("separate");
  cfg.num_pairs = detail::get_or<std::size_t>(sep, "num_pairs", cfg.num_pairs, "tasks.separate");
  cfg.tol_same = detail::get_or<double>(sep, "tol_same", cfg.tol_same, "tasks.separate");
  cfg.margin_min = detail::get_or<double>(sep, "margin_min", cfg.margin_min, "tasks.separate");

  const Json& exp = section("export");
  cfg.export_samples = detail::get_or<std::size_t>(exp, "num_samples", cfg.export_samples, "tasks.export");
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  auto cfg = parse_run_config(read_file(path), path.string());
  cfg.source = path;
  return cfg;
}

}  // namespace leafavg
