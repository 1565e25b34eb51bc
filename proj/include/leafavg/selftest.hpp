#pragma once

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "leafavg/runner.hpp"

namespace leafavg {

struct SelftestOptions {
  std::filesystem::path config_dir;
  /// Overrides the rank tolerance of the floating rank checks.
  std::optional<double> tol_rank;
  std::uint64_t seed = 20240601;
  std::size_t separation_pairs = 200;
};

enum class CheckState { Pass, Fail, Skipped };

struct SelftestRow {
  std::string config;
  std::map<std::string, CheckState> checks;
  std::vector<std::string> notes;
};

inline const std::vector<std::string>& selftest_columns() {
  static const std::vector<std::string> cols{"molien",     "float_rank", "generators", "generation",
                                             "identities", "separation"};
  return cols;
}

namespace detail {

template <class F>
void check(SelftestRow& row, const std::string& name, F&& fn) {
  try {
    row.checks[name] = fn() ? CheckState::Pass : CheckState::Fail;
  } catch (const Error& e) {
    row.checks[name] = CheckState::Fail;
    row.notes.push_back(name + ": " + e.what());
  }
}

/// Floating rank of B_d against an exact reference, d = 1..cap.
template <class M>
bool floating_rank_matches(const M& floating_model, const std::vector<std::size_t>& exact_dims, unsigned cap,
                           double tol_rank) {
  const auto avg = make_averager<double>(floating_model);
  RingOptions r;
  r.tol_rank = tol_rank;
  for (unsigned d = 1; d <= cap; ++d)
    if (basic_subspace(avg, floating_model.dim(), d, r).rank() != exact_dims[d - 1]) return false;
  return true;
}

}  // namespace detail

inline SelftestRow selftest_config(const std::filesystem::path& path, const SelftestOptions& opts) {
  SelftestRow row;
  row.config = path.filename().string();
  for (const auto& c : selftest_columns()) row.checks[c] = CheckState::Skipped;
  const RunConfig cfg = load_run_config(path);
  const double float_tol = opts.tol_rank.value_or(RingOptions{}.tol_rank);
  detail::dispatch(cfg.model, [&](const auto& model, auto tag) {
    using S = typename decltype(tag)::type;
    using M = std::decay_t<decltype(model)>;
    const std::uint64_t seed = cfg.seed.value_or(opts.seed);
    const auto avg = detail::averager_for<S>(model, detail::fit_options(cfg, seed));
    RingOptions ring = ring_options_for(avg.engine);
    if (cfg.tol_rank) ring.tol_rank = *cfg.tol_rank;
    if (opts.tol_rank && avg.engine != Engine::Exact) ring.tol_rank = *opts.tol_rank;

    std::optional<GeneratorSet<S>> gens;
    detail::check(row, "generators", [&] {
      gens = discover_generators(avg, model.dim(), cfg.degree_cap, ring);
      return verify_invariance(avg, gens->generators).ok();
    });

    if constexpr (std::is_same_v<M, FiniteGroupModel<Rational>>) {
      const unsigned cap = 8;
      auto molien = molien_dimensions(model, cap);
      molien.erase(molien.begin());
      detail::check(row, "molien", [&] {
        for (unsigned d = 1; d <= cap; ++d)
          if (basic_subspace(avg, model.dim(), d).rank() != molien[d - 1]) return false;
        return true;
      });
      detail::check(row, "float_rank", [&] {
        return detail::floating_rank_matches(to_floating(model), molien, std::min(cap, 4u), float_tol);
      });
    } else if constexpr (std::is_same_v<M, TorusModel>) {
      detail::check(row, "float_rank", [&] {
        const auto exact = make_averager<Rational>(model);
        std::vector<std::size_t> dims;
        for (unsigned d = 1; d <= 4; ++d) dims.push_back(basic_subspace(exact, model.dim(), d).rank());
        return detail::floating_rank_matches(model, dims, 4, float_tol);
      });
    }

    if (gens) {
      detail::check(row, "generation", [&] {
        return verify_generation(avg, model.dim(), gens->generators, cfg.degree_cap, ring).ok();
      });
      detail::check(row, "separation", [&] {
        SeparationOptions so;
        so.num_pairs = std::min(cfg.num_pairs, opts.separation_pairs);
        so.tol_same = cfg.tol_same;
        so.margin_min = cfg.margin_min;
        so.seed = seed;
        return separation_test(model, detail::as_floating(gens->generators), so).pass;
      });
    }

    detail::check(row, "identities", [&] {
      std::mt19937_64 rng(derive_seed(seed, 0x5E1F));
      const unsigned max_deg = detail::is_iso<M> ? 2u : 4u;
      const std::size_t trials = detail::is_iso<M> ? 1 : 3;
      for (std::size_t t = 0; t < trials; ++t) {
        std::uniform_int_distribution<unsigned> deg(1, max_deg);
        const auto f = random_homogeneous<S>(model.dim(), deg(rng), 4, rng);
        const auto g = random_homogeneous<S>(model.dim(), deg(rng), 4, rng);
        if (!verify_operator_identities(avg, f, g).ok()) return false;
      }
      return true;
    });
    return 0;
  });
  return row;
}

/// Runs the property suite on every bundled config and prints a pass/fail
/// matrix. Exit 1 when the configs cannot be found or loaded, 2 on any failed
/// check.
inline ExitCode selftest(const SelftestOptions& opts, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::filesystem::path> configs;
  std::error_code ec;
  if (!std::filesystem::is_directory(opts.config_dir, ec)) {
    err << "leafavg selftest: config directory not found: " << opts.config_dir.string() << "\n";
    return ExitCode::Error;
  }
  for (const auto& entry : std::filesystem::directory_iterator(opts.config_dir))
    if (entry.path().extension() == ".json") configs.push_back(entry.path());
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) {
    err << "leafavg selftest: no configs in " << opts.config_dir.string() << "\n";
    return ExitCode::Error;
  }
  std::vector<SelftestRow> rows;
  for (const auto& path : configs) {
    try {
      rows.push_back(selftest_config(path, opts));
    } catch (const std::exception& e) {
      err << "leafavg selftest: " << path.filename().string() << ": " << e.what() << "\n";
      return ExitCode::Error;
    }
  }
  bool all = true;
  out << std::left << std::setw(24) << "config";
  for (const auto& c : selftest_columns()) out << std::setw(12) << c;
  out << "\n";
  for (const auto& row : rows) {
    out << std::setw(24) << row.config;
    for (const auto& c : selftest_columns()) {
      const auto s = row.checks.at(c);
      all = all && s != CheckState::Fail;
      out << std::setw(12) << (s == CheckState::Pass ? "pass" : s == CheckState::Fail ? "FAIL" : "-");
    }
    out << "\n";
    for (const auto& n : row.notes) out << "  note: " << n << "\n";
  }
  out << "selftest: " << (all ? "PASS" : "FAIL") << "\n";
  return all ? ExitCode::Pass : ExitCode::CertificateFailure;
}

}  // namespace leafavg
