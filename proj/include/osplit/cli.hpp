#pragma once

// Command implementations behind the `osplit` tool. Each command takes a
// fully resolved RunConfig and returns the paths it wrote.

#include <osplit/dataset.hpp>
#include <osplit/error.hpp>
#include <osplit/parallel.hpp>
#include <osplit/report.hpp>
#include <osplit/rng.hpp>
#include <osplit/simbench.hpp>
#include <osplit/splitopt.hpp>

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace osplit::cli {

namespace fs = std::filesystem;

enum class Command { Analyze, Optimize, Simulate, Bench, PowerCurve };

inline std::string_view to_string(Command c) {
  switch (c) {
    case Command::Analyze: return "analyze";
    case Command::Optimize: return "optimize";
    case Command::Simulate: return "simulate";
    case Command::Bench: return "bench";
    case Command::PowerCurve: return "power-curve";
  }
  return "?";
}

struct RunConfig {
  Command command = Command::Optimize;
  std::optional<fs::path> input_path;
  std::vector<double> gamma_list = {1.0};
  double alpha = 0.05;
  Method method = Method::FdrRank;
  std::optional<double> zeta;
  PlasmodeConfig plasmode;
  double grid_step = 0.01;
  fs::path output_dir = ".";
  std::uint64_t master_seed = 0;
  unsigned threads = 1;
  std::size_t exact_limit = kDefaultExactLimit;
  FdrAnalysisRule fdr_rule = FdrAnalysisRule::BenjaminiHochberg;
  /// analyze: optimize summary to take zeta* from when --zeta is absent.
  std::optional<fs::path> summary_path;
  /// simulate
  DGPConfig dgp;
  std::size_t n_pairs = 200;
  /// bench
  BenchScenario scenario;
};

/// Overlays keys present in `j` onto `cfg`. Unknown keys are rejected so a
/// typo does not silently fall back to a default.
inline void apply_config_json(RunConfig& cfg, const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigInvalid, "config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "input") cfg.input_path = v.get<std::string>();
    else if (key == "gamma") cfg.gamma_list = v.is_array() ? v.get<std::vector<double>>()
                                                          : std::vector<double>{v.get<double>()};
    else if (key == "alpha") cfg.alpha = v.get<double>();
    else if (key == "method") cfg.method = parse_method(v.get<std::string>());
    else if (key == "zeta") cfg.zeta = v.get<double>();
    else if (key == "eta") cfg.plasmode.eta = v.get<double>();
    else if (key == "effect_lo") cfg.plasmode.effect_lo = v.get<double>();
    else if (key == "effect_hi") cfg.plasmode.effect_hi = v.get<double>();
    else if (key == "replications") cfg.plasmode.n_replications = v.get<std::size_t>();
    else if (key == "grid_step") cfg.grid_step = v.get<double>();
    else if (key == "seed") cfg.master_seed = v.get<std::uint64_t>();
    else if (key == "out") cfg.output_dir = v.get<std::string>();
    else if (key == "threads") cfg.threads = v.get<unsigned>();
    else if (key == "exact_limit") cfg.exact_limit = v.get<std::size_t>();
    else if (key == "fdr_rule")
      cfg.fdr_rule = v.get<std::string>() == "holm" ? FdrAnalysisRule::Holm
                                                    : FdrAnalysisRule::BenjaminiHochberg;
    else if (key == "summary") cfg.summary_path = v.get<std::string>();
    else if (key == "n_units") cfg.dgp.n_units = v.get<std::size_t>();
    else if (key == "n_covariates") cfg.dgp.n_covariates = v.get<std::size_t>();
    else if (key == "n_outcomes") cfg.dgp.n_outcomes = v.get<std::size_t>();
    else if (key == "pairs") cfg.n_pairs = v.get<std::size_t>();
    else if (key == "assignment_mode") cfg.dgp.assignment_mode = parse_assignment_mode(v.get<std::string>());
    else if (key == "outcome_correlation") cfg.dgp.outcome_correlation = v.get<double>();
    else if (key == "command") {
    } else {
      throw Error(ErrorCode::ConfigInvalid, "unknown config key '" + key + "'");
    }
  }
}

inline BenchScenario scenario_from_json(const json& j, BenchScenario sc = {}) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigInvalid, "scenario must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "gammas") sc.gammas = v.get<std::vector<double>>();
    else if (key == "pairs") sc.pairs = v.get<std::vector<std::size_t>>();
    else if (key == "n_outcomes") sc.n_outcomes = v.get<std::size_t>();
    else if (key == "replications") sc.replications = v.get<std::size_t>();
    else if (key == "methods") {
      sc.methods.clear();
      for (const auto& m : v) sc.methods.push_back(parse_bench_method(m.get<std::string>()));
    } else if (key == "n_units") sc.n_units = v.get<std::size_t>();
    else if (key == "n_covariates") sc.n_covariates = v.get<std::size_t>();
    else if (key == "eta") sc.eta = v.get<double>();
    else if (key == "outcome_correlation") sc.outcome_correlation = v.get<double>();
    else if (key == "assignment_mode") sc.assignment_mode = parse_assignment_mode(v.get<std::string>());
    else if (key == "alpha") sc.alpha = v.get<double>();
    else if (key == "grid_step") sc.grid_step = v.get<double>();
    else if (key == "seed") sc.seed = v.get<std::uint64_t>();
    else throw Error(ErrorCode::ConfigInvalid, "unknown scenario key '" + key + "'");
  }
  return sc;
}

inline json read_json_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + p.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, "'" + p.string() + "': " + e.what());
  }
}

inline std::string gamma_tag(double g) { return "gamma" + csv::format_double(g); }

namespace detail {

inline void validate_common(const RunConfig& cfg) {
  if (cfg.gamma_list.empty()) throw Error(ErrorCode::ConfigInvalid, "empty gamma list");
  for (double g : cfg.gamma_list) SensParams(g, cfg.alpha);
  if (cfg.threads == 0) throw Error(ErrorCode::ConfigInvalid, "threads must be >= 1");
}

inline MatchedPairDataset load_input(const RunConfig& cfg) {
  if (!cfg.input_path) throw Error(ErrorCode::ConfigInvalid, "--input is required");
  return load_matched_csv(*cfg.input_path);
}

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + dir.string() + "': " + ec.message());
}

inline TestOptions test_options(const RunConfig& cfg) {
  TestOptions o;
  o.exact_limit = cfg.exact_limit;
  o.fdr_rule = cfg.fdr_rule;
  o.threads = cfg.threads;
  return o;
}

inline PlasmodeConfig plasmode_config(const RunConfig& cfg) {
  PlasmodeConfig p = cfg.plasmode;
  p.seed = derive_seed(cfg.master_seed, "plasmode");
  return p;
}

/// Same plasmodes and split seeds for every Gamma.
inline std::vector<PowerCurve> curves_per_gamma(const RunConfig& cfg, const MatchedPairDataset& d) {
  const auto pcfg = plasmode_config(cfg);
  const auto opts = test_options(cfg);
  std::vector<PowerCurve> curves;
  for (double g : cfg.gamma_list)
    curves.push_back(optimize_fraction(d, pcfg, default_grid(cfg.grid_step), SensParams(g, cfg.alpha),
                                       cfg.method, opts));
  return curves;
}

}  // namespace detail

/// Power curve per Gamma: power_curve_gamma{G}.csv files and optimize_summary.json.
inline std::vector<fs::path> cmd_optimize(const RunConfig& cfg) {
  detail::validate_common(cfg);
  const auto d = detail::load_input(cfg);
  const auto curves = detail::curves_per_gamma(cfg, d);
  detail::ensure_dir(cfg.output_dir);
  std::vector<fs::path> written;
  json summary{{"method", std::string(to_string(cfg.method))},
               {"alpha", cfg.alpha},
               {"seed", cfg.master_seed},
               {"n_pairs", d.n_pairs()},
               {"n_outcomes", d.n_outcomes()},
               {"plasmode",
                {{"replications", cfg.plasmode.n_replications},
                 {"eta", cfg.plasmode.eta},
                 {"effect_lo", cfg.plasmode.effect_lo},
                 {"effect_hi", cfg.plasmode.effect_hi}}},
               {"curves", json::array()}};
  for (const auto& c : curves) {
    const auto path = cfg.output_dir / ("power_curve_" + gamma_tag(c.gamma) + ".csv");
    write_file_atomic(path, power_curve_csv(c));
    written.push_back(path);
    summary["curves"].push_back(to_json(c));
  }
  const auto sp = cfg.output_dir / "optimize_summary.json";
  write_file_atomic(sp, summary.dump(2) + "\n");
  written.push_back(sp);
  return written;
}

/// Observed-data split test per Gamma with one shared split seed: report_gamma{G}.json and
/// rejection_matrix.csv (outcomes x Gamma, 1 = rejected).
inline std::vector<fs::path> cmd_analyze(const RunConfig& cfg) {
  detail::validate_common(cfg);
  const auto d = detail::load_input(cfg);
  std::optional<json> summary;
  if (!cfg.zeta) {
    if (!cfg.summary_path)
      throw Error(ErrorCode::ConfigInvalid, "analyze needs --zeta or --summary");
    summary = read_json_file(*cfg.summary_path);
  }
  const std::uint64_t split_seed = derive_seed(cfg.master_seed, "analyze");
  const auto opts = detail::test_options(cfg);
  detail::ensure_dir(cfg.output_dir);
  std::vector<fs::path> written;
  std::vector<RejectionReport> reports;
  for (double g : cfg.gamma_list) {
    PowerCurve curve;
    curve.method = cfg.method;
    if (summary) {
      bool found = false;
      for (const auto& cj : summary->at("curves")) {
        if (cj.at("gamma").get<double>() == g) {
          curve = power_curve_from_json(cj);
          found = true;
        }
      }
      if (!found)
        throw Error(ErrorCode::ConfigInvalid,
                    "summary has no curve for gamma=" + csv::format_double(g));
    }
    auto rep = two_stage_analyze(d, curve, SensParams(g, cfg.alpha), cfg.zeta, split_seed, opts);
    const auto path = cfg.output_dir / ("report_" + gamma_tag(g) + ".json");
    write_file_atomic(path, to_json(rep).dump(2) + "\n");
    written.push_back(path);
    reports.push_back(std::move(rep));
  }
  std::ostringstream m;
  m << "outcome,name";
  for (double g : cfg.gamma_list) m << ',' << gamma_tag(g);
  m << '\n';
  for (std::size_t k = 0; k < d.n_outcomes(); ++k) {
    m << (k + 1) << ',' << csv::quote(d.outcome_names()[k]);
    for (const auto& r : reports)
      m << ',' << (std::find(r.rejected.begin(), r.rejected.end(), k) != r.rejected.end() ? 1 : 0);
    m << '\n';
  }
  const auto mp = cfg.output_dir / "rejection_matrix.csv";
  write_file_atomic(mp, m.str());
  written.push_back(mp);
  return written;
}

/// Simulated population, matched: simulated_pairs.csv plus simulated_truth.json.
inline std::vector<fs::path> cmd_simulate(const RunConfig& cfg) {
  DGPConfig dgp = cfg.dgp;
  dgp.gamma = cfg.gamma_list.empty() ? 1.0 : cfg.gamma_list.front();
  dgp.eta = cfg.plasmode.eta;
  dgp.seed = derive_seed(cfg.master_seed, "simulate-population");
  const auto pop = generate_population(dgp);
  const auto d = match_pairs(pop, cfg.n_pairs, derive_seed(cfg.master_seed, "simulate-match"));
  detail::ensure_dir(cfg.output_dir);
  const auto dp = cfg.output_dir / "simulated_pairs.csv";
  save_matched_csv(dp, d);
  json truth{{"affected", osplit::detail::one_based(pop.affected)},
             {"tau", pop.effect_draws},
             {"coefficients", pop.coefficients},
             {"gamma", dgp.gamma},
             {"assignment_mode", std::string(to_string(dgp.assignment_mode))}};
  const auto tp = cfg.output_dir / "simulated_truth.json";
  write_file_atomic(tp, truth.dump(2) + "\n");
  return {dp, tp};
}

/// Scenario table: benchmark.csv. Rows are streamed to a temp file that is
/// renamed into place whether or not the run completes.
inline std::vector<fs::path> cmd_bench(const RunConfig& cfg) {
  BenchScenario sc = cfg.scenario;
  sc.threads = cfg.threads;
  detail::ensure_dir(cfg.output_dir);
  const auto path = cfg.output_dir / "benchmark.csv";
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + tmp.string() + "'");
    try {
      run_benchmark(sc, out);
    } catch (...) {
      out.close();
      fs::rename(tmp, path);
      throw;
    }
  }
  fs::rename(tmp, path);
  return {path};
}

/// Plot-ready power_curves.csv: one row per zeta, one power column per Gamma.
inline std::vector<fs::path> cmd_power_curve(const RunConfig& cfg) {
  detail::validate_common(cfg);
  const auto d = detail::load_input(cfg);
  const auto curves = detail::curves_per_gamma(cfg, d);
  detail::ensure_dir(cfg.output_dir);
  std::ostringstream os;
  os << "zeta";
  for (const auto& c : curves) os << ",power_" << gamma_tag(c.gamma);
  os << '\n';
  for (std::size_t g = 0; g < curves.front().grid.size(); ++g) {
    os << csv::format_double(curves.front().grid[g]);
    for (const auto& c : curves) os << ',' << csv::format_double(c.power[g]);
    os << '\n';
  }
  const auto path = cfg.output_dir / "power_curves.csv";
  write_file_atomic(path, os.str());
  return {path};
}

inline std::vector<fs::path> run(const RunConfig& cfg) {
  switch (cfg.command) {
    case Command::Analyze: return cmd_analyze(cfg);
    case Command::Optimize: return cmd_optimize(cfg);
    case Command::Simulate: return cmd_simulate(cfg);
    case Command::Bench: return cmd_bench(cfg);
    case Command::PowerCurve: return cmd_power_curve(cfg);
  }
  return {};
}

/// 2 for I/O failures, 3 for everything the input or configuration got wrong.
inline int exit_code_for(const Error& e) { return e.code() == ErrorCode::Io ? 2 : 3; }

inline std::string error_json(std::string_view code, std::string_view message) {
  return json{{"error", std::string(code)}, {"message", std::string(message)}}.dump();
}

}  // namespace osplit::cli
