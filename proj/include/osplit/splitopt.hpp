#pragma once

// Sample-split multiple testing: plasmode generation, the planning/analysis
// pipeline, empirical power over a grid of analysis fractions, and the choice
// of the power-maximising fraction.

#include <osplit/dataset.hpp>
#include <osplit/error.hpp>
#include <osplit/multitest.hpp>
#include <osplit/parallel.hpp>
#include <osplit/rng.hpp>
#include <osplit/senswilcox.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace osplit {

enum class Method { FwerSelection, FdrRank, Naive };

/// Rule applied to the analysis p-values of the FDR path.
enum class FdrAnalysisRule { BenjaminiHochberg, Holm };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::FwerSelection: return "FWER_SELECTION";
    case Method::FdrRank: return "FDR_RANK";
    case Method::Naive: return "NAIVE";
  }
  return "?";
}

/// Accepts the CLI spellings (fwer, fdr, naive) and the enum names.
inline Method parse_method(std::string_view s) {
  if (s == "fwer" || s == "FWER_SELECTION") return Method::FwerSelection;
  if (s == "fdr" || s == "FDR_RANK") return Method::FdrRank;
  if (s == "naive" || s == "NAIVE") return Method::Naive;
  throw Error(ErrorCode::ConfigInvalid, "unknown method '" + std::string(s) + "'");
}

struct TestOptions {
  std::size_t exact_limit = kDefaultExactLimit;
  FdrAnalysisRule fdr_rule = FdrAnalysisRule::BenjaminiHochberg;
  unsigned threads = 1;
};

struct PlasmodeConfig {
  std::size_t n_replications = 1000;
  double eta = 0.10;
  double effect_lo = 0.2;  // in units of the outcome's control SD
  double effect_hi = 0.5;
  std::uint64_t seed = 0;
};

/// A dataset with known affected outcomes. For plasmodes `effects` holds the
/// injected delta, [pair][outcome]; it may be empty for other sources.
struct PlasmodeDataset {
  MatchedPairDataset data;
  std::vector<std::size_t> truth;
  std::vector<double> effects;
};

struct RejectionReport {
  std::vector<std::size_t> rejected;
  std::vector<std::size_t> selected;
  PValueSet planning_pvalues;
  PValueSet analysis_pvalues;  // selected outcomes only
  double zeta = 0.0;
  double gamma = 1.0;
  double alpha = 0.05;
  Method method = Method::FdrRank;
  std::uint64_t seed = 0;
  std::size_t n_planning = 0;
  std::size_t n_analysis = 0;
  std::size_t planning_cutoff = 0;  // s, l* or 1 (naive)
  std::size_t analysis_cutoff = 0;  // number rejected at the analysis stage
  std::vector<std::string> outcome_names;
};

struct PowerCurve {
  std::vector<double> grid;
  std::vector<double> power;
  double zeta_star = 0.0;
  std::vector<double> near_optimal;
  Method method = Method::FdrRank;
  double gamma = 1.0;
  double alpha = 0.05;
  std::size_t m_used = 0;
};

inline constexpr double kNearOptimalRatio = 0.95;

// ---------------------------------------------------------------------------
// Grid helpers
// ---------------------------------------------------------------------------

/// {step, 2*step, ...} strictly inside (0, 1), rounded to 1e-10.
inline std::vector<double> default_grid(double step = 0.01) {
  if (!(step > 0.0 && step < 1.0))
    throw Error(ErrorCode::ConfigInvalid, "grid step must lie in (0,1)");
  std::vector<double> g;
  for (std::size_t i = 1;; ++i) {
    const double z = std::round(static_cast<double>(i) * step * 1e10) / 1e10;
    if (z >= 1.0 - 1e-12) break;
    g.push_back(z);
  }
  return g;
}

/// Drops fractions that would leave the planning or analysis part empty.
inline std::vector<double> prune_grid(std::span<const double> grid, std::size_t n_pairs) {
  std::vector<double> out;
  for (double z : grid)
    if (split_feasible(n_pairs, z)) out.push_back(z);
  return out;
}

// ---------------------------------------------------------------------------
// Split engine
// ---------------------------------------------------------------------------

namespace detail {

/// Differences of every outcome with |V| presorted once, so the signed-rank
/// statistic of any sub-sample is a single linear pass.
class DifferencePanel {
 public:
  explicit DifferencePanel(const MatchedPairDataset& d)
      : n_(d.n_pairs()), k_(d.n_outcomes()), diffs_(n_ * k_), order_(n_ * k_),
        group_end_(n_ * k_) {
    std::vector<std::uint32_t> idx(n_);
    for (std::size_t k = 0; k < k_; ++k) {
      const auto v = pair_differences(d, k);
      std::copy(v.begin(), v.end(), diffs_.begin() + static_cast<std::ptrdiff_t>(k * n_));
      for (std::size_t i = 0; i < n_; ++i) idx[i] = static_cast<std::uint32_t>(i);
      std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
        return std::abs(v[a]) < std::abs(v[b]);
      });
      std::uint32_t* ord = order_.data() + k * n_;
      std::copy(idx.begin(), idx.end(), ord);
      std::uint32_t* ge = group_end_.data() + k * n_;
      for (std::size_t lo = 0; lo < n_;) {
        std::size_t hi = lo + 1;
        while (hi < n_ && std::abs(v[ord[hi]]) == std::abs(v[ord[lo]])) ++hi;
        for (std::size_t t = lo; t < hi; ++t) ge[t] = static_cast<std::uint32_t>(hi);
        lo = hi;
      }
    }
  }

  std::size_t n_pairs() const noexcept { return n_; }
  std::size_t n_outcomes() const noexcept { return k_; }

  /// Signed-rank statistic of outcome k restricted to pairs with
  /// part[i] == which. Ranks and signs are filled only when `full` is set.
  SignedRankResult statistic(std::size_t k, const std::vector<std::uint8_t>& part,
                             std::uint8_t which, std::size_t n_members, bool full) const {
    SignedRankResult r;
    r.n_pairs = n_members;
    if (full) {
      r.ranks.reserve(n_members);
      r.signs.reserve(n_members);
    }
    const double* v = diffs_.data() + k * n_;
    const std::uint32_t* ord = order_.data() + k * n_;
    const std::uint32_t* ge = group_end_.data() + k * n_;
    double rank_base = 0.0;
    for (std::size_t lo = 0; lo < n_;) {
      const std::size_t hi = ge[lo];
      double count = 0.0, weight = 0.0;
      for (std::size_t t = lo; t < hi; ++t) {
        const std::uint32_t i = ord[t];
        if (part[i] != which) continue;
        count += 1.0;
        weight += v[i] > 0.0 ? 1.0 : (v[i] == 0.0 ? 0.5 : 0.0);
      }
      if (count > 0.0) {
        const double avg = rank_base + 0.5 * (count + 1.0);
        r.statistic += avg * weight;
        if (full) {
          for (std::size_t t = lo; t < hi; ++t) {
            const std::uint32_t i = ord[t];
            if (part[i] != which) continue;
            r.ranks.push_back(avg);
            r.signs.push_back(v[i] > 0.0 ? 1.0 : (v[i] == 0.0 ? 0.5 : 0.0));
          }
        }
        rank_base += count;
      }
      lo = hi;
    }
    return r;
  }

  double pvalue(std::size_t k, const std::vector<std::uint8_t>& part, std::uint8_t which,
                std::size_t n_members, const SensParams& params, std::size_t exact_limit) const {
    const bool exact = n_members <= exact_limit;
    const auto sr = statistic(k, part, which, n_members, exact);
    return exact ? gamma_pvalue_exact(sr, params, exact_limit)
                 : gamma_pvalue_normal(sr.statistic, n_members, params);
  }

 private:
  std::size_t n_;
  std::size_t k_;
  std::vector<double> diffs_;
  std::vector<std::uint32_t> order_;
  std::vector<std::uint32_t> group_end_;
};

inline constexpr std::uint8_t kPlanning = 0;
inline constexpr std::uint8_t kAnalysis = 1;

inline std::vector<std::uint8_t> partition_mask(std::span<const std::size_t> perm,
                                                std::size_t n_plan) {
  std::vector<std::uint8_t> part(perm.size(), kAnalysis);
  for (std::size_t t = 0; t < n_plan; ++t) part[perm[t]] = kPlanning;
  return part;
}

/// Steps 2 and 3 for one partition.
inline RejectionReport split_test(const DifferencePanel& panel,
                                  const std::vector<std::uint8_t>& part, std::size_t n_plan,
                                  const SensParams& params, Method method,
                                  const TestOptions& opts) {
  const std::size_t K = panel.n_outcomes();
  const std::size_t n_anal = panel.n_pairs() - n_plan;
  const double alpha = params.alpha();

  std::vector<double> plan_p(K);
  for (std::size_t k = 0; k < K; ++k)
    plan_p[k] = panel.pvalue(k, part, kPlanning, n_plan, params, opts.exact_limit);

  RejectionReport rep;
  rep.planning_pvalues = PValueSet(std::move(plan_p));
  rep.n_planning = n_plan;
  rep.n_analysis = n_anal;
  rep.gamma = params.gamma();
  rep.alpha = alpha;
  rep.method = method;

  switch (method) {
    case Method::FwerSelection:
      rep.selected = bonferroni_reject(rep.planning_pvalues, alpha);
      break;
    case Method::FdrRank:
      rep.selected = bh_reject(rep.planning_pvalues, alpha).rejected;
      break;
    case Method::Naive:
      rep.selected = {detail::ascending_order(rep.planning_pvalues).front()};
      break;
  }
  rep.planning_cutoff = rep.selected.size();
  if (rep.selected.empty()) {
    rep.analysis_pvalues = PValueSet(std::vector<std::size_t>{}, std::vector<double>{});
    return rep;
  }

  std::vector<double> anal_p;
  anal_p.reserve(rep.selected.size());
  for (std::size_t k : rep.selected)
    anal_p.push_back(panel.pvalue(k, part, kAnalysis, n_anal, params, opts.exact_limit));
  rep.analysis_pvalues = PValueSet(rep.selected, std::move(anal_p));

  const double s = static_cast<double>(rep.selected.size());
  switch (method) {
    case Method::FwerSelection:
      for (std::size_t t = 0; t < rep.selected.size(); ++t)
        if (rep.analysis_pvalues.values[t] <= alpha / s) rep.rejected.push_back(rep.selected[t]);
      break;
    case Method::FdrRank:
      rep.rejected = opts.fdr_rule == FdrAnalysisRule::Holm
                         ? holm_reject(rep.analysis_pvalues, alpha)
                         : bh_reject(rep.analysis_pvalues, alpha).rejected;
      break;
    case Method::Naive:
      if (rep.analysis_pvalues.values.front() <= alpha) rep.rejected = rep.selected;
      break;
  }
  rep.analysis_cutoff = rep.rejected.size();
  return rep;
}

inline double true_positive_fraction(std::span<const std::size_t> rejected,
                                     std::span<const std::size_t> truth) {
  if (truth.empty()) throw Error(ErrorCode::DegenerateEta, "replicate has no affected outcomes");
  std::size_t hits = 0;
  for (std::size_t k : rejected)
    if (std::find(truth.begin(), truth.end(), k) != truth.end()) ++hits;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace detail

/// Per-replication split seed shared by every grid point (common random
/// numbers).
inline std::uint64_t replication_split_seed(std::uint64_t master, std::size_t replication) {
  return derive_seed(master, "split", replication);
}

inline RejectionReport run_split_test(const MatchedPairDataset& d, double zeta,
                                      const SensParams& params, Method method, std::uint64_t seed,
                                      const TestOptions& opts = {}) {
  if (!split_feasible(d.n_pairs(), zeta))
    throw Error(ErrorCode::DegenerateSplit, "zeta=" + std::to_string(zeta) + " with I=" +
                                                std::to_string(d.n_pairs()) +
                                                " leaves an empty part");
  const detail::DifferencePanel panel(d);
  const auto perm = split_permutation(d.n_pairs(), seed);
  const std::size_t n_plan = planning_size(d.n_pairs(), zeta);
  auto rep = detail::split_test(panel, detail::partition_mask(perm, n_plan), n_plan, params,
                                method, opts);
  rep.zeta = zeta;
  rep.seed = seed;
  rep.outcome_names = d.outcome_names();
  return rep;
}

// ---------------------------------------------------------------------------
// Plasmodes
// ---------------------------------------------------------------------------

inline std::size_t affected_count(std::size_t n_outcomes, double eta) {
  return static_cast<std::size_t>(std::floor(eta * static_cast<double>(n_outcomes) + 1e-9));
}

/// Sample SD (n-1 denominator) of each outcome over the control units.
inline std::vector<double> control_sd(const MatchedPairDataset& d) {
  const std::size_t I = d.n_pairs(), K = d.n_outcomes();
  std::vector<double> sd(K, 0.0);
  if (I < 2) return sd;
  for (std::size_t k = 0; k < K; ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < I; ++i) mean += d.response(i, 1 - d.treated_unit(i), k);
    mean /= static_cast<double>(I);
    double ss = 0.0;
    for (std::size_t i = 0; i < I; ++i) {
      const double e = d.response(i, 1 - d.treated_unit(i), k) - mean;
      ss += e * e;
    }
    sd[k] = std::sqrt(ss / static_cast<double>(I - 1));
  }
  return sd;
}

inline void validate(const PlasmodeConfig& cfg, std::size_t n_outcomes) {
  if (!(cfg.eta > 0.0 && cfg.eta < 1.0))
    throw Error(ErrorCode::DegenerateEta, "eta must lie in (0,1)");
  if (affected_count(n_outcomes, cfg.eta) == 0)
    throw Error(ErrorCode::DegenerateEta, "floor(eta*K) = 0 for eta=" + std::to_string(cfg.eta) +
                                              ", K=" + std::to_string(n_outcomes));
  if (!(cfg.effect_lo >= 0.0) || !(cfg.effect_hi >= cfg.effect_lo))
    throw Error(ErrorCode::ConfigInvalid, "need 0 <= effect_lo <= effect_hi");
  if (cfg.n_replications == 0) throw Error(ErrorCode::ConfigInvalid, "need M >= 1");
}

namespace detail {

/// Plasmode from precomputed control SDs; see generate_plasmode.
inline PlasmodeDataset make_plasmode(const MatchedPairDataset& d, const std::vector<double>& sd,
                                     const PlasmodeConfig& cfg, std::size_t replication) {
  const std::size_t I = d.n_pairs(), K = d.n_outcomes();
  const std::size_t n_affected = affected_count(K, cfg.eta);
  Rng rng(derive_seed(cfg.seed, "plasmode", replication));

  std::vector<std::size_t> eligible;
  for (std::size_t k = 0; k < K; ++k)
    if (sd[k] > 0.0) eligible.push_back(k);
  if (eligible.size() < n_affected)
    throw Error(ErrorCode::ZeroVariance,
                std::to_string(eligible.size()) + " outcomes with positive control variance, " +
                    std::to_string(n_affected) + " needed");
  // Partial Fisher-Yates: the first n_affected entries are a uniform draw.
  for (std::size_t t = 0; t < n_affected; ++t) {
    const std::size_t j = t + static_cast<std::size_t>(uniform_index(rng, eligible.size() - t));
    std::swap(eligible[t], eligible[j]);
  }
  std::vector<std::size_t> truth(eligible.begin(),
                                 eligible.begin() + static_cast<std::ptrdiff_t>(n_affected));
  std::sort(truth.begin(), truth.end());

  std::vector<std::uint8_t> z(2 * I);
  for (std::size_t i = 0; i < I; ++i) {
    const bool first = bernoulli(rng, 0.5);
    z[2 * i] = first ? 1 : 0;
    z[2 * i + 1] = first ? 0 : 1;
  }
  std::vector<double> effects(I * K, 0.0);
  for (std::size_t i = 0; i < I; ++i)
    for (std::size_t k : truth)
      effects[i * K + k] = uniform(rng, cfg.effect_lo * sd[k], cfg.effect_hi * sd[k]);

  std::vector<double> resp = d.responses();
  for (std::size_t i = 0; i < I; ++i) {
    const std::size_t treated = z[2 * i] ? 0 : 1;
    for (std::size_t k : truth) resp[(2 * i + treated) * K + k] += effects[i * K + k];
  }
  PlasmodeDataset p{MatchedPairDataset(I, K, std::move(resp), std::move(z), d.pair_ids(),
                                       d.outcome_names(), d.n_covariates(), d.covariates(),
                                       d.covariate_names()),
                    std::move(truth), std::move(effects)};
  return p;
}

}  // namespace detail

/// Plasmode replication `replication` of d. Both observed units of a pair
/// serve as control potential outcomes; treatment is re-drawn 50/50 within
/// each pair and the treated unit of an affected outcome receives
/// delta ~ Uniform[a*sd_k, b*sd_k], with sd_k the control-unit SD.
inline PlasmodeDataset generate_plasmode(const MatchedPairDataset& d, const PlasmodeConfig& cfg,
                                         std::size_t replication) {
  validate(cfg, d.n_outcomes());
  return detail::make_plasmode(d, control_sd(d), cfg, replication);
}

// ---------------------------------------------------------------------------
// Power
// ---------------------------------------------------------------------------

/// Smallest maximiser and the set within kNearOptimalRatio of the maximum.
inline PowerCurve summarize_curve(std::vector<double> grid, std::vector<double> power) {
  if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "empty grid");
  if (grid.size() != power.size())
    throw Error(ErrorCode::IndexOutOfRange, "grid and power differ in length");
  PowerCurve c;
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g)
    if (power[g] > power[best] || (power[g] == power[best] && grid[g] < grid[best])) best = g;
  c.zeta_star = grid[best];
  const double cut = kNearOptimalRatio * power[best];
  for (std::size_t g = 0; g < grid.size(); ++g)
    if (power[g] >= cut) c.near_optimal.push_back(grid[g]);
  c.grid = std::move(grid);
  c.power = std::move(power);
  return c;
}

/// Per-replicate true-positive fractions |R ∩ H1| / |H1|, indexed
/// [replicate][grid point]. Grid points share each replicate's split seed.
inline std::vector<std::vector<double>> power_matrix(std::span<const PlasmodeDataset> replicates,
                                                     std::span<const double> grid,
                                                     const SensParams& params, Method method,
                                                     std::uint64_t split_master,
                                                     const TestOptions& opts = {}) {
  std::vector<std::vector<double>> out(replicates.size());
  parallel_for(replicates.size(), opts.threads, [&](std::size_t m) {
    const auto& rep = replicates[m];
    const detail::DifferencePanel panel(rep.data);
    const auto perm = split_permutation(rep.data.n_pairs(), replication_split_seed(split_master, m));
    auto& row = out[m];
    row.resize(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      if (!split_feasible(rep.data.n_pairs(), grid[g]))
        throw Error(ErrorCode::DegenerateSplit, "grid point " + std::to_string(grid[g]));
      const std::size_t n_plan = planning_size(rep.data.n_pairs(), grid[g]);
      const auto r = detail::split_test(panel, detail::partition_mask(perm, n_plan), n_plan,
                                        params, method, opts);
      row[g] = detail::true_positive_fraction(r.rejected, rep.truth);
    }
  });
  return out;
}

inline std::vector<double> column_means(const std::vector<std::vector<double>>& rows,
                                        std::size_t n_cols) {
  std::vector<double> mean(n_cols, 0.0);
  for (const auto& r : rows)
    for (std::size_t g = 0; g < n_cols; ++g) mean[g] += r[g];
  for (double& x : mean) x /= static_cast<double>(rows.size());
  return mean;
}

/// Empirical power at one fraction over given labelled replicates.
inline double empirical_power(std::span<const PlasmodeDataset> replicates, double zeta,
                              const SensParams& params, Method method, std::uint64_t split_master,
                              const TestOptions& opts = {}) {
  if (replicates.empty()) throw Error(ErrorCode::ConfigInvalid, "need M >= 1");
  const double grid[] = {zeta};
  return column_means(power_matrix(replicates, grid, params, method, split_master, opts), 1)[0];
}

/// Power curve over labelled replicates with common random numbers.
inline PowerCurve optimize_fraction(std::span<const PlasmodeDataset> replicates,
                                    std::vector<double> grid, const SensParams& params,
                                    Method method, std::uint64_t split_master,
                                    const TestOptions& opts = {}) {
  if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "empty grid");
  if (replicates.empty()) throw Error(ErrorCode::ConfigInvalid, "need M >= 1");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::size_t min_pairs = replicates.front().data.n_pairs();
  for (const auto& r : replicates) min_pairs = std::min(min_pairs, r.data.n_pairs());
  grid = prune_grid(grid, min_pairs);
  if (grid.empty()) throw Error(ErrorCode::AllDegenerate, "no feasible grid point");
  auto power = column_means(power_matrix(replicates, grid, params, method, split_master, opts),
                            grid.size());
  auto c = summarize_curve(std::move(grid), std::move(power));
  c.method = method;
  c.gamma = params.gamma();
  c.alpha = params.alpha();
  c.m_used = replicates.size();
  return c;
}

namespace detail {

/// Streams plasmodes replication by replication so only one per worker is
/// alive at a time.
inline std::vector<std::vector<double>> plasmode_power_matrix(const MatchedPairDataset& d,
                                                              const PlasmodeConfig& cfg,
                                                              std::span<const double> grid,
                                                              const SensParams& params,
                                                              Method method,
                                                              const TestOptions& opts) {
  validate(cfg, d.n_outcomes());
  const auto sd = control_sd(d);
  std::vector<std::vector<double>> out(cfg.n_replications);
  TestOptions inner = opts;
  inner.threads = 1;
  parallel_for(cfg.n_replications, opts.threads, [&](std::size_t m) {
    const PlasmodeDataset p = make_plasmode(d, sd, cfg, m);
    const DifferencePanel panel(p.data);
    const auto perm = split_permutation(d.n_pairs(), replication_split_seed(cfg.seed, m));
    auto& row = out[m];
    row.resize(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const std::size_t n_plan = planning_size(d.n_pairs(), grid[g]);
      const auto r = split_test(panel, partition_mask(perm, n_plan), n_plan, params, method, inner);
      row[g] = true_positive_fraction(r.rejected, p.truth);
    }
  });
  return out;
}

}  // namespace detail

/// Empirical power (mean true-positive fraction) at `zeta` over cfg's M
/// plasmodes of d.
inline double empirical_power(const MatchedPairDataset& d, const PlasmodeConfig& cfg, double zeta,
                              const SensParams& params, Method method,
                              const TestOptions& opts = {}) {
  if (!split_feasible(d.n_pairs(), zeta))
    throw Error(ErrorCode::DegenerateSplit, "zeta=" + std::to_string(zeta));
  const double grid[] = {zeta};
  return column_means(detail::plasmode_power_matrix(d, cfg, grid, params, method, opts),
                              1)[0];
}

/// Power curve of d's plasmodes over `grid` (pruned to feasible fractions).
inline PowerCurve optimize_fraction(const MatchedPairDataset& d, const PlasmodeConfig& cfg,
                                    std::vector<double> grid, const SensParams& params,
                                    Method method, const TestOptions& opts = {}) {
  if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "empty grid");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  grid = prune_grid(grid, d.n_pairs());
  if (grid.empty()) throw Error(ErrorCode::AllDegenerate, "no feasible grid point");
  auto power = column_means(
      detail::plasmode_power_matrix(d, cfg, grid, params, method, opts), grid.size());
  auto c = summarize_curve(std::move(grid), std::move(power));
  c.method = method;
  c.gamma = params.gamma();
  c.alpha = params.alpha();
  c.m_used = cfg.n_replications;
  return c;
}

/// One split test of the observed data at the curve's optimum (or
/// an explicit fraction).
inline RejectionReport two_stage_analyze(const MatchedPairDataset& d, const PowerCurve& curve,
                                         const SensParams& params,
                                         std::optional<double> zeta_override, std::uint64_t seed,
                                         const TestOptions& opts = {}) {
  const double zeta = zeta_override.value_or(curve.zeta_star);
  return run_split_test(d, zeta, params, curve.method, seed, opts);
}

}  // namespace osplit
