#pragma once

// Simulation study: population generator, greedy 1:1 covariate matching and
// the scenario harness that tabulates power and recommended fractions.

#include <osplit/dataset.hpp>
#include <osplit/error.hpp>
#include <osplit/multitest.hpp>
#include <osplit/parallel.hpp>
#include <osplit/rng.hpp>
#include <osplit/senswilcox.hpp>
#include <osplit/splitopt.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <ostream>
#include <string>
#include <vector>

namespace osplit {

enum class AssignmentMode {
  /// Z ~ Bernoulli(Gamma / (1 + Gamma^2)) for every unit, independent of U.
  MarginalBernoulli,
  /// Within each matched pair the unit with larger U is treated with
  /// probability Gamma / (1 + Gamma).
  PairBiased,
};

inline std::string_view to_string(AssignmentMode m) {
  return m == AssignmentMode::MarginalBernoulli ? "MARGINAL_BERNOULLI" : "PAIR_BIASED";
}

inline AssignmentMode parse_assignment_mode(std::string_view s) {
  if (s == "MARGINAL_BERNOULLI" || s == "marginal" || s == "marginal_bernoulli" ||
      s == "marginal-bernoulli")
    return AssignmentMode::MarginalBernoulli;
  if (s == "PAIR_BIASED" || s == "pair" || s == "pair_biased" || s == "pair-biased")
    return AssignmentMode::PairBiased;
  throw Error(ErrorCode::ConfigInvalid, "unknown assignment mode '" + std::string(s) + "'");
}

struct DGPConfig {
  std::size_t n_units = 5000;
  std::size_t n_covariates = 5;
  std::size_t n_outcomes = 10;
  double eta = 0.10;
  double gamma = 1.0;
  AssignmentMode assignment_mode = AssignmentMode::PairBiased;
  double outcome_correlation = 0.3;
  std::uint64_t seed = 0;
};

/// Unit-level data, row-major: covariates N x D, baseline/responses N x K.
struct RawPopulation {
  std::size_t n_units = 0;
  std::size_t n_covariates = 0;
  std::size_t n_outcomes = 0;
  std::vector<double> covariates;
  std::vector<double> confounder;
  std::vector<std::uint8_t> treatment;
  std::vector<double> baseline;   // control potential outcomes X*alpha + eps
  std::vector<double> responses;  // observed under `treatment`
  std::vector<std::size_t> affected;
  std::vector<double> effect_draws;  // tau, aligned with `affected`
  std::vector<double> coefficients;  // alpha, length D
  double gamma = 1.0;
  AssignmentMode assignment_mode = AssignmentMode::PairBiased;
};

inline void validate(const DGPConfig& cfg) {
  if (cfg.n_units < 2 || cfg.n_units % 2 != 0)
    throw Error(ErrorCode::ConfigInvalid, "N must be even and >= 2");
  if (cfg.n_covariates == 0 || cfg.n_outcomes == 0)
    throw Error(ErrorCode::ConfigInvalid, "D and K must be >= 1");
  if (!(cfg.eta > 0.0 && cfg.eta < 1.0) || affected_count(cfg.n_outcomes, cfg.eta) == 0)
    throw Error(ErrorCode::ConfigInvalid, "eta must give floor(eta*K) >= 1");
  if (!(cfg.gamma >= 1.0)) throw Error(ErrorCode::ConfigInvalid, "gamma must be >= 1");
  if (!(cfg.outcome_correlation >= 0.0 && cfg.outcome_correlation < 1.0))
    throw Error(ErrorCode::ConfigInvalid, "outcome correlation must lie in [0,1)");
}

inline RawPopulation generate_population(const DGPConfig& cfg) {
  validate(cfg);
  const std::size_t N = cfg.n_units, D = cfg.n_covariates, K = cfg.n_outcomes;
  Rng rng(derive_seed(cfg.seed, "population"));
  RawPopulation pop;
  pop.n_units = N;
  pop.n_covariates = D;
  pop.n_outcomes = K;
  pop.gamma = cfg.gamma;
  pop.assignment_mode = cfg.assignment_mode;

  pop.coefficients.resize(D);
  for (double& a : pop.coefficients) a = normal(rng, 1.0, 1.0);

  std::vector<std::size_t> outcomes(K);
  std::iota(outcomes.begin(), outcomes.end(), std::size_t{0});
  shuffle(outcomes, rng);
  pop.affected.assign(outcomes.begin(),
                      outcomes.begin() + static_cast<std::ptrdiff_t>(affected_count(K, cfg.eta)));
  std::sort(pop.affected.begin(), pop.affected.end());
  pop.effect_draws.resize(pop.affected.size());
  for (double& t : pop.effect_draws) t = normal(rng, 1.0, 1.0);

  pop.covariates.resize(N * D);
  for (double& x : pop.covariates) x = uniform(rng, 0.0, 5.0);
  pop.confounder.resize(N);
  for (double& u : pop.confounder) u = standard_normal(rng);

  const double p_treat = cfg.assignment_mode == AssignmentMode::MarginalBernoulli
                             ? cfg.gamma / (1.0 + cfg.gamma * cfg.gamma)
                             : 0.5;
  pop.treatment.resize(N);
  for (auto& z : pop.treatment) z = bernoulli(rng, p_treat) ? 1 : 0;

  const double lambda = cfg.outcome_correlation;
  const double idio = std::sqrt(1.0 - lambda * lambda);
  pop.baseline.resize(N * K);
  for (std::size_t n = 0; n < N; ++n) {
    double xa = 0.0;
    for (std::size_t d = 0; d < D; ++d) xa += pop.covariates[n * D + d] * pop.coefficients[d];
    const double factor = standard_normal(rng);
    for (std::size_t k = 0; k < K; ++k)
      pop.baseline[n * K + k] = xa + lambda * factor + idio * standard_normal(rng);
  }
  pop.responses = pop.baseline;
  for (std::size_t n = 0; n < N; ++n) {
    if (!pop.treatment[n]) continue;
    for (std::size_t a = 0; a < pop.affected.size(); ++a)
      pop.responses[n * K + pop.affected[a]] += pop.effect_draws[a];
  }
  return pop;
}

/// Greedy 1:1 nearest-neighbour matching without replacement on covariates
/// scaled by their pooled SD. Treated units are visited in seeded random
/// order; a random subset of `target_pairs` of the matches is returned.
///
/// Unit 1 of each pair is the treated unit of the population. Under
/// PAIR_BIASED the within-pair assignment is then redrawn from U and the
/// responses rebuilt from the baseline.
inline MatchedPairDataset match_pairs(const RawPopulation& pop, std::size_t target_pairs,
                                      std::uint64_t seed) {
  const std::size_t N = pop.n_units, D = pop.n_covariates, K = pop.n_outcomes;
  std::vector<std::size_t> treated, controls;
  for (std::size_t n = 0; n < N; ++n) (pop.treatment[n] ? treated : controls).push_back(n);
  if (target_pairs == 0) throw Error(ErrorCode::ConfigInvalid, "need at least one pair");
  if (treated.size() < target_pairs || controls.size() < target_pairs)
    throw Error(ErrorCode::InsufficientUnits,
                std::to_string(treated.size()) + " treated / " + std::to_string(controls.size()) +
                    " control units for " + std::to_string(target_pairs) + " pairs");

  std::vector<double> scale(D, 1.0);
  for (std::size_t d = 0; d < D; ++d) {
    double mean = 0.0, ss = 0.0;
    for (std::size_t n = 0; n < N; ++n) mean += pop.covariates[n * D + d];
    mean /= static_cast<double>(N);
    for (std::size_t n = 0; n < N; ++n) {
      const double e = pop.covariates[n * D + d] - mean;
      ss += e * e;
    }
    const double sd = N > 1 ? std::sqrt(ss / static_cast<double>(N - 1)) : 0.0;
    scale[d] = sd > 0.0 ? 1.0 / sd : 1.0;
  }
  std::vector<double> ctrl_x(controls.size() * D);
  for (std::size_t c = 0; c < controls.size(); ++c)
    for (std::size_t d = 0; d < D; ++d)
      ctrl_x[c * D + d] = pop.covariates[controls[c] * D + d] * scale[d];

  Rng rng(derive_seed(seed, "match"));
  shuffle(treated, rng);
  std::vector<char> used(controls.size(), 0);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(std::min(treated.size(), controls.size()));
  std::vector<double> tx(D);
  for (std::size_t t : treated) {
    if (pairs.size() == controls.size()) break;
    for (std::size_t d = 0; d < D; ++d) tx[d] = pop.covariates[t * D + d] * scale[d];
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_c = controls.size();
    for (std::size_t c = 0; c < controls.size(); ++c) {
      if (used[c]) continue;
      double dist = 0.0;
      const double* cx = ctrl_x.data() + c * D;
      for (std::size_t d = 0; d < D && dist < best; ++d) {
        const double e = tx[d] - cx[d];
        dist += e * e;
      }
      if (dist < best) {
        best = dist;
        best_c = c;
      }
    }
    used[best_c] = 1;
    pairs.emplace_back(t, controls[best_c]);
  }
  shuffle(pairs, rng);
  pairs.resize(target_pairs);

  const double kappa = pop.gamma / (1.0 + pop.gamma);
  std::vector<double> resp(target_pairs * 2 * K), cov(target_pairs * 2 * D);
  std::vector<std::uint8_t> z(target_pairs * 2);
  for (std::size_t i = 0; i < target_pairs; ++i) {
    const std::size_t units[2] = {pairs[i].first, pairs[i].second};
    if (pop.assignment_mode == AssignmentMode::PairBiased) {
      const std::size_t hi_u = pop.confounder[units[0]] >= pop.confounder[units[1]] ? 0 : 1;
      const std::size_t t = bernoulli(rng, kappa) ? hi_u : 1 - hi_u;
      z[2 * i + t] = 1;
      z[2 * i + 1 - t] = 0;
      for (std::size_t j = 0; j < 2; ++j) {
        for (std::size_t k = 0; k < K; ++k)
          resp[(2 * i + j) * K + k] = pop.baseline[units[j] * K + k];
        if (z[2 * i + j])
          for (std::size_t a = 0; a < pop.affected.size(); ++a)
            resp[(2 * i + j) * K + pop.affected[a]] += pop.effect_draws[a];
      }
    } else {
      z[2 * i] = 1;
      z[2 * i + 1] = 0;
      for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t k = 0; k < K; ++k)
          resp[(2 * i + j) * K + k] = pop.responses[units[j] * K + k];
    }
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t d = 0; d < D; ++d)
        cov[(2 * i + j) * D + d] = pop.covariates[units[j] * D + d];
  }
  return MatchedPairDataset(target_pairs, K, std::move(resp), std::move(z), {}, {}, D,
                            std::move(cov));
}

// ---------------------------------------------------------------------------
// Benchmark harness
// ---------------------------------------------------------------------------

/// Method labels of the harness: the three split methods plus Bonferroni on
/// the full data.
enum class BenchMethod { Bonferroni, Naive, FwerSelection, FdrRank };

inline std::string_view to_string(BenchMethod m) {
  switch (m) {
    case BenchMethod::Bonferroni: return "bonferroni";
    case BenchMethod::Naive: return "naive";
    case BenchMethod::FwerSelection: return "fwer";
    case BenchMethod::FdrRank: return "fdr";
  }
  return "?";
}

inline BenchMethod parse_bench_method(std::string_view s) {
  if (s == "bonferroni" || s == "BONFERRONI") return BenchMethod::Bonferroni;
  switch (parse_method(s)) {
    case Method::Naive: return BenchMethod::Naive;
    case Method::FwerSelection: return BenchMethod::FwerSelection;
    case Method::FdrRank: return BenchMethod::FdrRank;
  }
  return BenchMethod::Bonferroni;
}

struct BenchScenario {
  std::vector<double> gammas = {1.0};
  std::vector<std::size_t> pairs = {200};
  std::size_t n_outcomes = 100;
  std::size_t replications = 100;
  std::vector<BenchMethod> methods = {BenchMethod::Bonferroni, BenchMethod::Naive,
                                      BenchMethod::FwerSelection, BenchMethod::FdrRank};
  std::size_t n_units = 5000;
  std::size_t n_covariates = 5;
  double eta = 0.10;
  double outcome_correlation = 0.3;
  AssignmentMode assignment_mode = AssignmentMode::PairBiased;
  double alpha = 0.05;
  double grid_step = 0.01;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct BenchRow {
  BenchMethod method = BenchMethod::Bonferroni;
  double gamma = 1.0;
  std::size_t n_pairs = 0;
  std::size_t n_outcomes = 0;
  std::size_t replications = 0;
  double power = 0.0;
  std::optional<double> zeta_star;
  std::optional<double> near_lo;
  std::optional<double> near_hi;
  std::optional<PowerCurve> curve;  // split methods only
};

inline const char* kBenchHeader =
    "method,gamma,I,K,replications,power,zeta_star,near_optimal_lo,near_optimal_hi";

inline void write_bench_row(std::ostream& out, const BenchRow& r) {
  auto opt = [](const std::optional<double>& v) {
    return v ? csv::format_double(*v) : std::string();
  };
  out << to_string(r.method) << ',' << csv::format_double(r.gamma) << ',' << r.n_pairs << ','
      << r.n_outcomes << ',' << r.replications << ',' << csv::format_double(r.power) << ','
      << opt(r.zeta_star) << ',' << opt(r.near_lo) << ',' << opt(r.near_hi) << '\n';
}

/// Simulated replicates of one (Gamma, I) cell, each labelled with its
/// affected outcomes.
inline std::vector<PlasmodeDataset> simulate_cell(const BenchScenario& sc, double gamma,
                                                  std::size_t n_pairs, std::uint64_t cell_seed) {
  std::vector<PlasmodeDataset> reps(sc.replications);
  parallel_for(sc.replications, sc.threads, [&](std::size_t r) {
    DGPConfig cfg;
    cfg.n_units = sc.n_units;
    cfg.n_covariates = sc.n_covariates;
    cfg.n_outcomes = sc.n_outcomes;
    cfg.eta = sc.eta;
    cfg.gamma = gamma;
    cfg.assignment_mode = sc.assignment_mode;
    cfg.outcome_correlation = sc.outcome_correlation;
    cfg.seed = derive_seed(cell_seed, "population", r);
    const auto pop = generate_population(cfg);
    reps[r].data = match_pairs(pop, n_pairs, derive_seed(cell_seed, "matching", r));
    reps[r].truth = pop.affected;
  });
  return reps;
}

/// Full-data Bonferroni power: mean fraction of affected outcomes with
/// p <= alpha / K.
inline double bonferroni_power(std::span<const PlasmodeDataset> reps, const SensParams& params,
                               const TestOptions& opts = {}) {
  std::vector<double> frac(reps.size());
  parallel_for(reps.size(), opts.threads, [&](std::size_t r) {
    const auto& d = reps[r].data;
    std::vector<double> p(d.n_outcomes());
    for (std::size_t k = 0; k < d.n_outcomes(); ++k)
      p[k] = gamma_pvalue(pair_differences(d, k), params, opts.exact_limit);
    frac[r] = detail::true_positive_fraction(bonferroni_reject(PValueSet(std::move(p)),
                                                               params.alpha()),
                                             reps[r].truth);
  });
  double s = 0.0;
  for (double f : frac) s += f;
  return reps.empty() ? 0.0 : s / static_cast<double>(reps.size());
}

inline std::uint64_t bench_cell_seed(std::uint64_t master, std::size_t gamma_index,
                                     std::size_t pairs_index) {
  return derive_seed(derive_seed(master, "cell-gamma", gamma_index), "cell-pairs", pairs_index);
}

/// Runs every (Gamma, I, method) cell and streams CSV rows to `out`. On
/// failure a FAILED marker row is flushed before the error propagates.
inline std::vector<BenchRow> run_benchmark(const BenchScenario& sc, std::ostream& out) {
  out << kBenchHeader << '\n';
  std::vector<BenchRow> rows;
  if (sc.replications == 0) {
    out.flush();
    return rows;
  }
  if (sc.gammas.empty() || sc.pairs.empty() || sc.methods.empty())
    throw Error(ErrorCode::ConfigInvalid, "scenario needs gammas, pairs and methods");
  TestOptions opts;
  opts.threads = sc.threads;
  try {
    for (std::size_t gi = 0; gi < sc.gammas.size(); ++gi) {
      const SensParams params(sc.gammas[gi], sc.alpha);
      for (std::size_t ii = 0; ii < sc.pairs.size(); ++ii) {
        const std::uint64_t cell = bench_cell_seed(sc.seed, gi, ii);
        const auto reps = simulate_cell(sc, sc.gammas[gi], sc.pairs[ii], cell);
        for (BenchMethod m : sc.methods) {
          BenchRow row;
          row.method = m;
          row.gamma = sc.gammas[gi];
          row.n_pairs = sc.pairs[ii];
          row.n_outcomes = sc.n_outcomes;
          row.replications = sc.replications;
          if (m == BenchMethod::Bonferroni) {
            row.power = bonferroni_power(reps, params, opts);
          } else {
            const Method sm = m == BenchMethod::Naive           ? Method::Naive
                              : m == BenchMethod::FwerSelection ? Method::FwerSelection
                                                                : Method::FdrRank;
            auto curve = optimize_fraction(reps, default_grid(sc.grid_step), params, sm,
                                           derive_seed(cell, "split"), opts);
            const auto best = std::find(curve.grid.begin(), curve.grid.end(), curve.zeta_star);
            row.power = curve.power[static_cast<std::size_t>(best - curve.grid.begin())];
            row.zeta_star = curve.zeta_star;
            row.near_lo = curve.near_optimal.front();
            row.near_hi = curve.near_optimal.back();
            row.curve = std::move(curve);
          }
          write_bench_row(out, row);
          out.flush();
          rows.push_back(std::move(row));
        }
      }
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    out << "FAILED,,,,,,,," << csv::quote(msg) << '\n';
    out.flush();
    throw;
  }
  return rows;
}

}  // namespace osplit
