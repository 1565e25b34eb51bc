#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <type_traits>

#include "leafavg/random_polynomial.hpp"
#include "leafavg/serialization.hpp"

namespace leafavg {

enum class ExitCode : int { Pass = 0, Error = 1, CertificateFailure = 2 };

struct RunOptions {
  std::string task;
  std::filesystem::path config;
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> generators;
  std::optional<double> tol_rank;
};

struct TaskOutcome {
  bool pass = true;
  std::string summary;
};

namespace detail {

template <class S>
using ScalarTag = std::type_identity<S>;

/// Calls fn(model, ScalarTag<S>) with the scalar type the model computes in.
template <class F>
decltype(auto) dispatch(const LoadedModel& lm, F&& fn) {
  return std::visit(
      [&](const auto& m) -> decltype(auto) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, TorusModel>) {
          if (lm.mode == ScalarMode::ExactRational) return fn(m, ScalarTag<Rational>{});
          return fn(m, ScalarTag<double>{});
        } else if constexpr (std::is_same_v<M, IsoparametricModel>) {
          return fn(m, ScalarTag<double>{});
        } else {
          return fn(m, ScalarTag<typename M::Scalar>{});
        }
      },
      lm.model);
}

template <class S, class M>
Averager<S> averager_for(const M& model, const FitOptions& fit) {
  if constexpr (std::is_same_v<M, IsoparametricModel>) {
    return make_averager(model, fit);
  } else if constexpr (std::is_same_v<M, TorusModel>) {
    return make_averager<S>(model);
  } else {
    return make_averager(model);
  }
}

template <class M>
constexpr bool is_iso = std::is_same_v<M, IsoparametricModel>;

inline std::uint64_t require_seed(const RunConfig& cfg, const RunOptions& opts, const std::string& task) {
  if (opts.seed) return *opts.seed;
  if (cfg.seed) return *cfg.seed;
  throw Error(ErrorKind::ConfigError, "task '" + task + "' is stochastic and needs a seed (config 'seed' or --seed)");
}

inline std::uint64_t seed_or_default(const RunConfig& cfg, const RunOptions& opts) {
  return opts.seed ? *opts.seed : cfg.seed.value_or(0);
}

inline RingOptions ring_options(Engine engine, const RunConfig& cfg, const RunOptions& opts) {
  RingOptions r = ring_options_for(engine);
  if (cfg.tol_rank) r.tol_rank = *cfg.tol_rank;
  if (opts.tol_rank) r.tol_rank = *opts.tol_rank;
  return r;
}

inline FitOptions fit_options(const RunConfig& cfg, std::uint64_t seed) {
  FitOptions f = cfg.fit;
  f.seed = seed;
  return f;
}

template <class S>
struct LoadedGenerators {
  std::vector<Polynomial<S>> polys;
  std::string id;
};

/// Generators from a file written by the `generators` task, or discovered now.
template <class S, class M>
LoadedGenerators<S> obtain_generators(const M& model, const Averager<S>& avg, const RunConfig& cfg,
                                      const RunOptions& opts) {
  LoadedGenerators<S> out;
  if (opts.generators) {
    const Json j = parse_json_text(read_file(*opts.generators), opts.generators->string());
    const auto texts = detail::get_as<std::vector<std::string>>(detail::field(j, "generators", "generators file"),
                                                               "generators file: generators");
    for (const auto& t : texts) out.polys.push_back(parse_polynomial<S>(t, model.dim()));
    out.id = opts.generators->filename().string();
  } else {
    out.polys = discover_generators(avg, model.dim(), cfg.degree_cap, ring_options(avg.engine, cfg, opts)).generators;
    out.id = "discovered:" + cfg.model.id + ":D" + std::to_string(cfg.degree_cap);
  }
  return out;
}

template <class S>
std::vector<Polynomial<double>> as_floating(const std::vector<Polynomial<S>>& ps) {
  std::vector<Polynomial<double>> out;
  for (const auto& p : ps) out.push_back(convert<double>(p));
  return out;
}

// ---------------------------------------------------------------------------

template <class S>
bool certificate_passes(const AveragingCertificate<S>& c) {
  const auto& r = c.residuals;
  const double t = c.residual_tolerance;
  return r.idempotence <= t && r.leaf_constancy <= t && r.laplacian_commutation <= c.laplacian_tolerance &&
         r.selfadjoint_gap <= t && r.contraction_slack >= -t;
}

inline TaskOutcome task_avg(const RunConfig& cfg, const RunOptions& opts, Json& report) {
  return dispatch(cfg.model, [&](const auto& model, auto tag) {
    using S = typename decltype(tag)::type;
    using M = std::decay_t<decltype(model)>;
    Json certs = Json::array();
    bool pass = true;
    std::size_t agree = 0, structured = 0;
    if constexpr (is_iso<M>) {
      const std::uint64_t seed = require_seed(cfg, opts, "avg");
      report["seed"] = seed;
      std::vector<Polynomial<double>> gens;
      for (const auto& t : cfg.structured_generators) gens.push_back(parse_polynomial<double>(t, model.dim()));
      if (gens.empty()) gens = {radius_squared<double>(model.dim()), model.F()};
      for (std::size_t i = 0; i < cfg.avg_inputs.size(); ++i) {
        const auto f = parse_polynomial<double>(cfg.avg_inputs[i], model.dim());
        const auto fit = fit_options(cfg, derive_seed(seed, i));
        const auto cert = average(model, f, fit);
        Json j = to_json(cert);
        bool ok = certificate_passes(cert);
        try {
          auto sf = average_structured(model, f, gens, fit);
          j["structured"] = to_json(sf, gens);
          ++structured;
          if (sf.difference_norm <= 2.0 * sf.difference_se) ++agree;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::BasisDeficient) throw;
          j["structured"] = {{"error", e.what()}};
          ok = false;
        }
        j["pass"] = ok;
        pass = pass && ok;
        certs.push_back(std::move(j));
      }
    } else {
      for (const auto& text : cfg.avg_inputs) {
        const auto cert = average(model, parse_polynomial<S>(text, model.dim()));
        Json j = to_json(cert);
        bool ok = certificate_passes(cert);
        j["pass"] = ok;
        pass = pass && ok;
        certs.push_back(std::move(j));
      }
    }
    report["certificates"] = certs;
    report["pass"] = pass;
    std::string summary = std::to_string(certs.size()) + " certificate(s)";
    if (structured) summary += ", structured/unstructured agree " + std::to_string(agree) + "/" + std::to_string(structured);
    return TaskOutcome{pass, summary};
  });
}

inline TaskOutcome task_generators(const RunConfig& cfg, const RunOptions& opts, Json& report) {
  return dispatch(cfg.model, [&](const auto& model, auto tag) {
    using S = typename decltype(tag)::type;
    using M = std::decay_t<decltype(model)>;
    const std::uint64_t seed = is_iso<M> ? require_seed(cfg, opts, "generators") : seed_or_default(cfg, opts);
    const auto avg = averager_for<S>(model, fit_options(cfg, seed));
    auto gens = discover_generators(avg, model.dim(), cfg.degree_cap, ring_options(avg.engine, cfg, opts));
    gens.model_id = cfg.model.id;
    gens.seed = seed;
    report = to_json(gens, cfg.model);
    bool pass = true;
    const auto inv = verify_invariance(avg, gens.generators);
    report["invariance_residuals"] = json_numbers(inv.residuals);
    pass = pass && inv.ok();
    if constexpr (std::is_same_v<M, FiniteGroupModel<Rational>>) {
      auto molien = molien_dimensions(model, cfg.degree_cap);
      molien.erase(molien.begin());  // degree 0
      report["molien_dimensions"] = molien;
      report["molien_match"] = molien == gens.basic_dimensions;
      pass = pass && molien == gens.basic_dimensions;
    }
    report["pass"] = pass;
    std::string degs;
    for (unsigned d : gens.degrees()) degs += (degs.empty() ? "" : ",") + std::to_string(d);
    return TaskOutcome{pass, std::to_string(gens.generators.size()) + " generator(s), degrees [" + degs + "]"};
  });
}

inline TaskOutcome task_verify(const RunConfig& cfg, const RunOptions& opts, Json& report) {
  return dispatch(cfg.model, [&](const auto& model, auto tag) {
    using S = typename decltype(tag)::type;
    using M = std::decay_t<decltype(model)>;
    const std::uint64_t seed = require_seed(cfg, opts, "verify");
    report["seed"] = seed;
    const auto avg = averager_for<S>(model, fit_options(cfg, seed));
    const auto gens = obtain_generators(model, avg, cfg, opts);
    Json errors = Json::array();
    report["generator_set"] = gens.id;
    report["generators"] = json_polys(gens.polys);

    const auto inv = verify_invariance(avg, gens.polys);
    Json invj = Json::array();
    for (std::size_t i = 0; i < gens.polys.size(); ++i)
      invj.push_back({{"generator", to_string(gens.polys[i])},
                      {"residual", json_number(inv.residuals[i])},
                      {"pass", static_cast<bool>(inv.pass[i])}});
    report["invariance"] = invj;
    if (!inv.ok()) {
      std::vector<std::string> names;
      for (const auto& g : gens.polys) names.push_back(to_string(g));
      try {
        inv.throw_if_failed(names);
      } catch (const Error& e) {
        errors.push_back(e.what());
      }
    }

    const auto ring = ring_options(avg.engine, cfg, opts);
    const auto gen = verify_generation(avg, model.dim(), gens.polys, cfg.degree_cap, ring);
    report["generation"] = to_json(gen);
    if (!gen.ok()) {
      try {
        gen.throw_if_failed();
      } catch (const Error& e) {
        errors.push_back(e.what());
      }
    }

    Json ids = Json::array();
    std::mt19937_64 rng(derive_seed(seed, 0x1D));
    const unsigned max_deg = is_iso<M> ? 2u : std::min(cfg.degree_cap, 4u);
    bool ids_ok = true;
    for (std::size_t t = 0; t < cfg.identity_trials; ++t) {
      std::uniform_int_distribution<unsigned> deg(1, max_deg);
      const auto f = random_homogeneous<S>(model.dim(), deg(rng), 4, rng);
      const auto g = random_homogeneous<S>(model.dim(), deg(rng), 4, rng);
      const auto rep = verify_operator_identities(avg, f, g);
      Json j = to_json(rep);
      j["f"] = to_string(f);
      j["g"] = to_string(g);
      ids.push_back(std::move(j));
      if (!rep.ok()) {
        ids_ok = false;
        try {
          rep.throw_if_failed();
        } catch (const Error& e) {
          errors.push_back(e.what());
        }
      }
    }
    report["identities"] = ids;
    report["errors"] = errors;
    const bool pass = inv.ok() && gen.ok() && ids_ok;
    report["pass"] = pass;
    return TaskOutcome{pass, std::to_string(gens.polys.size()) + " generator(s), " + std::to_string(errors.size()) +
                                 " error(s)"};
  });
}

inline TaskOutcome task_separate(const RunConfig& cfg, const RunOptions& opts, Json& report) {
  return dispatch(cfg.model, [&](const auto& model, auto tag) {
    using S = typename decltype(tag)::type;
    const std::uint64_t seed = require_seed(cfg, opts, "separate");
    const auto avg = averager_for<S>(model, fit_options(cfg, seed));
    const auto gens = obtain_generators(model, avg, cfg, opts);
    SeparationOptions so;
    so.num_pairs = cfg.num_pairs;
    so.tol_same = cfg.tol_same;
    so.margin_min = cfg.margin_min;
    so.seed = seed;
    const auto cert = separation_test(model, as_floating(gens.polys), so, gens.id);
    report = to_json(cert);
    report["generators"] = json_polys(gens.polys);
    return TaskOutcome{cert.pass, "margin ratio " + json_number(cert.margin_ratio).dump() + ", " +
                                      std::to_string(cert.failure_count) + " failure(s)"};
  });
}

inline TaskOutcome task_export(const RunConfig& cfg, const RunOptions& opts, std::string& csv) {
  return dispatch(cfg.model, [&](const auto& model, auto tag) {
    using S = typename decltype(tag)::type;
    const std::uint64_t seed = require_seed(cfg, opts, "export");
    const auto avg = averager_for<S>(model, fit_options(cfg, seed));
    const auto gens = obtain_generators(model, avg, cfg, opts);
    const auto table = quotient_image_export(model, as_floating(gens.polys), cfg.export_samples, seed);
    csv = to_csv(table);
    return TaskOutcome{true, std::to_string(table.rows.size()) + " row(s)"};
  });
}

inline bool is_certificate_error(ErrorKind k) {
  return k == ErrorKind::IdentityViolation || k == ErrorKind::GenerationGap || k == ErrorKind::RankUnstable ||
         k == ErrorKind::BasisDeficient;
}

}  // namespace detail

/// Runs one task and writes its artifact into opts.out_dir.
inline ExitCode run(const RunOptions& opts, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    const RunConfig cfg = load_run_config(opts.config);
    Json report;
    report["task"] = opts.task;
    report["model"] = to_json(cfg.model);
    TaskOutcome outcome;
    std::filesystem::path artifact;
    if (opts.task == "avg") {
      outcome = detail::task_avg(cfg, opts, report);
      artifact = opts.out_dir / "average_certificate.json";
      write_json(artifact, report);
    } else if (opts.task == "generators") {
      outcome = detail::task_generators(cfg, opts, report);
      artifact = opts.out_dir / "generators.json";
      write_json(artifact, report);
    } else if (opts.task == "verify") {
      outcome = detail::task_verify(cfg, opts, report);
      artifact = opts.out_dir / "verify_report.json";
      write_json(artifact, report);
    } else if (opts.task == "separate") {
      outcome = detail::task_separate(cfg, opts, report);
      Json full;
      full["task"] = "separate";
      full["model"] = to_json(cfg.model);
      for (auto& [k, v] : report.items()) full[k] = v;
      artifact = opts.out_dir / "separation_certificate.json";
      write_json(artifact, full);
    } else if (opts.task == "export") {
      std::string csv;
      outcome = detail::task_export(cfg, opts, csv);
      artifact = opts.out_dir / "quotient_image.csv";
      write_text(artifact, csv);
    } else {
      throw Error(ErrorKind::ConfigError, "unknown task '" + opts.task + "'");
    }
    out << opts.task << " " << cfg.model.id << ": " << (outcome.pass ? "PASS" : "FAIL") << " (" << outcome.summary
        << ") -> " << artifact.string() << "\n";
    return outcome.pass ? ExitCode::Pass : ExitCode::CertificateFailure;
  } catch (const Error& e) {
    err << "leafavg " << opts.task << ": " << e.what() << "\n";
    return detail::is_certificate_error(e.kind()) ? ExitCode::CertificateFailure : ExitCode::Error;
  } catch (const std::exception& e) {
    err << "leafavg " << opts.task << ": " << e.what() << "\n";
    return ExitCode::Error;
  }
}

}  // namespace leafavg
