#include "fixtures.hpp"

#include <osplit/report.hpp>
#include <osplit/splitopt.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

using namespace osplit;

using Ids = std::vector<std::size_t>;

namespace {

/// Distinct positive magnitudes, so an all-positive sample of size n has
/// exact p-value 2^-n at Gamma = 1.
std::vector<double> strong(std::size_t I) {
  std::vector<double> v(I);
  for (std::size_t i = 0; i < I; ++i) v[i] = 1.0 + static_cast<double>(i);
  return v;
}

PlasmodeDataset labelled(const std::vector<std::vector<double>>& diffs, Ids truth) {
  return {fixture::from_differences(diffs), std::move(truth), {}};
}

bool subset_of(const Ids& a, const Ids& b) {
  return std::all_of(a.begin(), a.end(),
                     [&](std::size_t k) { return std::find(b.begin(), b.end(), k) != b.end(); });
}

}  // namespace

TEST(Grid, DefaultAndPruned) {
  const auto g = default_grid();
  ASSERT_EQ(g.size(), 99u);
  EXPECT_EQ(g.front(), 0.01);
  EXPECT_EQ(g.back(), 0.99);
  EXPECT_EQ(g[56], 0.57);
  const auto p = prune_grid(g, 2);
  ASSERT_FALSE(p.empty());
  EXPECT_EQ(p.back(), 0.5);
  EXPECT_EQ(prune_grid(g, 200).size(), 99u);
  EXPECT_THROW(default_grid(0.0), Error);
}

TEST(SummarizeCurve, HandRule) {
  const auto c = summarize_curve({0.5, 0.6, 0.7}, {0.10, 0.30, 0.20});
  EXPECT_EQ(c.zeta_star, 0.6);
  EXPECT_EQ(c.near_optimal, std::vector<double>{0.6});
  const auto flat = summarize_curve({0.2, 0.4, 0.6}, {0.5, 0.5, 0.5});
  EXPECT_EQ(flat.zeta_star, 0.2);
  EXPECT_EQ(flat.near_optimal, (std::vector<double>{0.2, 0.4, 0.6}));
  const auto edge = summarize_curve({0.1, 0.2}, {0.285, 0.30});
  EXPECT_EQ(edge.near_optimal, (std::vector<double>{0.1, 0.2}));
}

TEST(EmpiricalPower, HandEvaluation) {
  // K = 2, FWER: with I = 12 at zeta = 0.5 both halves hold 6 pairs, and
  // 2^-6 < 0.05 / 2, so an all-positive outcome is always selected and
  // rejected while an all-zero one never is.
  const auto s = strong(12);
  const std::vector<double> zero(12, 0.0);
  const std::vector<PlasmodeDataset> reps{labelled({s, s}, {0, 1}), labelled({s, zero}, {0, 1})};
  EXPECT_EQ(empirical_power(reps, 0.5, SensParams(), Method::FwerSelection, 1), 0.75);
  EXPECT_EQ(empirical_power(reps, 0.5, SensParams(), Method::FdrRank, 1), 0.75);

  const std::vector<PlasmodeDataset> exact{labelled({s, zero}, {0}), labelled({zero, s}, {1})};
  EXPECT_EQ(empirical_power(exact, 0.5, SensParams(), Method::FwerSelection, 1), 1.0);
  const std::vector<PlasmodeDataset> none{labelled({zero, zero}, {0}), labelled({zero, s}, {0})};
  EXPECT_EQ(empirical_power(none, 0.5, SensParams(), Method::FwerSelection, 1), 0.0);
}

TEST(OptimizeFraction, DeterministicFixture) {
  // K = 1, I = 10: both parts need >= 5 pairs (2^-5 < 0.05 < 2^-4), so only
  // zeta = 0.5 has power; the half-strong replicate halves every value.
  const auto s = strong(10);
  auto half = s;
  for (std::size_t i = 0; i < 10; ++i) half[i] = (i % 2 ? -1.0 : 1.0) * s[i];
  const std::vector<PlasmodeDataset> reps{labelled({s}, {0}), labelled({s}, {0}),
                                          labelled({s}, {0}), labelled({half}, {0})};
  const auto c = optimize_fraction(reps, {0.6, 0.4, 0.5, 0.5, 0.3}, SensParams(),
                                   Method::FwerSelection, 9);
  EXPECT_EQ(c.grid, (std::vector<double>{0.3, 0.4, 0.5, 0.6}));
  EXPECT_EQ(c.power, (std::vector<double>{0.0, 0.0, 0.75, 0.0}));
  EXPECT_EQ(c.zeta_star, 0.5);
  EXPECT_EQ(c.near_optimal, std::vector<double>{0.5});
  EXPECT_EQ(c.m_used, 4u);
}

TEST(OptimizeFraction, Errors) {
  const std::vector<PlasmodeDataset> reps{labelled({strong(2)}, {0})};
  try {
    optimize_fraction(reps, {}, SensParams(), Method::FdrRank, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyGrid);
  }
  try {
    optimize_fraction(reps, {0.9, 0.99}, SensParams(), Method::FdrRank, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AllDegenerate);
  }
}

TEST(RunSplitTest, SingleOutcomeIsOneTest) {
  const auto d = fixture::gaussian(60, 1, 21);
  for (int t = 0; t < 30; ++t) {
    const std::uint64_t seed = derive_seed(5, "k1", t);
    const auto split = split_pairs(d, 0.6, seed);
    const double p = gamma_pvalue(pair_differences(split.analysis, 0), SensParams(1.0, 0.5));
    for (Method m : {Method::FwerSelection, Method::FdrRank, Method::Naive}) {
      const auto r = run_split_test(d, 0.6, SensParams(1.0, 0.5), m, seed);
      if (!r.selected.empty()) {
        EXPECT_DOUBLE_EQ(r.analysis_pvalues.values[0], p);
        EXPECT_EQ(r.rejected.size() == 1, p <= 0.5);
      }
    }
  }
}

TEST(RunSplitTest, AnalysisPValuesComeFromAnalysisPairs) {
  const auto d = fixture::gaussian(200, 6, 3);
  const auto split = split_pairs(d, 0.7, 77);
  const auto r = run_split_test(d, 0.7, SensParams(1.2, 0.99), Method::FdrRank, 77);
  EXPECT_EQ(r.n_planning, 60u);
  EXPECT_EQ(r.n_analysis, 140u);
  for (std::size_t k = 0; k < 6; ++k)
    EXPECT_DOUBLE_EQ(r.planning_pvalues.values[k],
                     gamma_pvalue(pair_differences(split.planning, k), SensParams(1.2)));
  for (std::size_t t = 0; t < r.selected.size(); ++t)
    EXPECT_DOUBLE_EQ(r.analysis_pvalues.values[t],
                     gamma_pvalue(pair_differences(split.analysis, r.selected[t]), SensParams(1.2)));
}

TEST(RunSplitTest, EmptySelectionAndZeroDifferences) {
  const auto d = fixture::from_differences({std::vector<double>(30, 0.0), std::vector<double>(30, 0.0)});
  for (Method m : {Method::FwerSelection, Method::FdrRank, Method::Naive}) {
    const auto r = run_split_test(d, 0.5, SensParams(1.0, 0.4), m, 3);
    EXPECT_TRUE(r.rejected.empty());
    if (m != Method::Naive) {
      EXPECT_TRUE(r.selected.empty());
    }
  }
}

TEST(RunSplitTest, RejectedWithinSelected) {
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::vector<double>> diffs(8, std::vector<double>(40));
    for (std::size_t k = 0; k < 8; ++k)
      for (auto& x : diffs[k]) x = normal(rng, 0.1 * static_cast<double>(k), 1.0);
    const auto d = fixture::from_differences(diffs);
    for (Method m : {Method::FwerSelection, Method::FdrRank, Method::Naive}) {
      const auto r = run_split_test(d, 0.5, SensParams(1.0, 0.2), m, t);
      EXPECT_TRUE(subset_of(r.rejected, r.selected));
      EXPECT_EQ(r.planning_pvalues.size(), 8u);
    }
  }
}

TEST(RunSplitTest, Degenerate) {
  const auto d = fixture::gaussian(2, 1, 1);
  EXPECT_THROW(run_split_test(d, 0.99, SensParams(), Method::FdrRank, 1), Error);
}

TEST(RunSplitTest, StrongSignalFoundByFdr) {
  const auto base = fixture::gaussian(500, 10, 8);
  PlasmodeConfig cfg;
  cfg.eta = 0.1;
  cfg.effect_lo = cfg.effect_hi = 2.0;
  cfg.seed = 4;
  const auto p = generate_plasmode(base, cfg, 0);
  ASSERT_EQ(p.truth.size(), 1u);
  int hits = 0;
  for (int r = 0; r < 200; ++r) {
    const auto rep = run_split_test(p.data, 0.9, SensParams(), Method::FdrRank, derive_seed(1, "s", r));
    hits += std::find(rep.rejected.begin(), rep.rejected.end(), p.truth[0]) != rep.rejected.end();
  }
  EXPECT_GE(hits, 190);
}

TEST(RunSplitTest, HolmAnalysisOption) {
  const auto d = fixture::gaussian(100, 5, 2);
  TestOptions o;
  o.fdr_rule = FdrAnalysisRule::Holm;
  const auto r = run_split_test(d, 0.5, SensParams(1.0, 0.9), Method::FdrRank, 4, o);
  EXPECT_EQ(r.rejected, holm_reject(r.analysis_pvalues, 0.9));
}

TEST(TwoStage, OverrideAndDeterminism) {
  const auto d = fixture::gaussian(154, 76, 12);
  PowerCurve curve;
  curve.method = Method::FdrRank;
  curve.zeta_star = 0.3;
  const auto a = two_stage_analyze(d, curve, SensParams(), 0.9, 42);
  const auto b = two_stage_analyze(d, curve, SensParams(), 0.9, 42);
  EXPECT_EQ(a.zeta, 0.9);
  EXPECT_EQ(a.n_analysis, 139u);
  EXPECT_TRUE(subset_of(a.rejected, a.selected));
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  EXPECT_EQ(rejection_report_csv(a), rejection_report_csv(b));
  EXPECT_EQ(two_stage_analyze(d, curve, SensParams(), std::nullopt, 42).zeta, 0.3);
}

TEST(Plasmode, TruthAndEffects) {
  const auto base = fixture::gaussian(154, 76, 3);
  PlasmodeConfig cfg;
  cfg.eta = 0.1;
  cfg.effect_lo = 0.05;
  cfg.effect_hi = 0.20;
  cfg.seed = 10;
  const auto sd = control_sd(base);
  for (std::size_t m = 0; m < 20; ++m) {
    const auto p = generate_plasmode(base, cfg, m);
    ASSERT_EQ(p.truth.size(), 7u);
    for (std::size_t i = 0; i < 154; ++i) {
      EXPECT_EQ(p.data.treatment(i, 0) + p.data.treatment(i, 1), 1);
      for (std::size_t k = 0; k < 76; ++k) {
        const double e = p.effects[i * 76 + k];
        const bool affected = std::binary_search(p.truth.begin(), p.truth.end(), k);
        if (!affected) {
          EXPECT_EQ(e, 0.0);
        } else {
          EXPECT_GE(e, 0.05 * sd[k]);
          EXPECT_LE(e, 0.20 * sd[k]);
        }
        const std::size_t t = p.data.treated_unit(i);
        EXPECT_NEAR(p.data.response(i, t, k) - base.response(i, t, k), e, 1e-12);
        EXPECT_EQ(p.data.response(i, 1 - t, k), base.response(i, 1 - t, k));
      }
    }
  }
  const auto again = generate_plasmode(base, cfg, 3);
  EXPECT_EQ(again.data, generate_plasmode(base, cfg, 3).data);
  EXPECT_FALSE(again.data == generate_plasmode(base, cfg, 4).data);
}

TEST(Plasmode, TruthSetIsUniform) {
  const auto base = fixture::gaussian(20, 10, 4);
  PlasmodeConfig cfg;
  cfg.eta = 0.2;
  std::vector<int> counts(10, 0);
  const int reps = 5000;
  for (int m = 0; m < reps; ++m)
    for (std::size_t k : generate_plasmode(base, cfg, m).truth) ++counts[k];
  const double p = 0.2, se = std::sqrt(p * (1 - p) / reps);
  for (int c : counts) EXPECT_NEAR(c / double(reps), p, 4.5 * se);
}

TEST(Plasmode, LabelsAreFair) {
  const auto base = fixture::gaussian(1000, 2, 4);
  PlasmodeConfig cfg;
  cfg.eta = 0.5;
  const auto p = generate_plasmode(base, cfg, 0);
  std::size_t first = 0;
  for (std::size_t i = 0; i < 1000; ++i) first += p.data.treatment(i, 0);
  EXPECT_NEAR(first / 1000.0, 0.5, 3 * std::sqrt(0.25 / 1000));
}

TEST(Plasmode, NullHasZeroEffects) {
  const auto base = fixture::gaussian(50, 10, 4);
  PlasmodeConfig cfg;
  cfg.effect_lo = cfg.effect_hi = 0.0;
  const auto p = generate_plasmode(base, cfg, 0);
  EXPECT_EQ(p.truth.size(), 1u);
  for (double e : p.effects) EXPECT_EQ(e, 0.0);
}

TEST(Plasmode, Errors) {
  const auto base = fixture::gaussian(50, 5, 4);
  PlasmodeConfig cfg;
  cfg.eta = 0.1;
  try {
    generate_plasmode(base, cfg, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateEta);
  }
  cfg.eta = 0.2;
  cfg.effect_lo = 0.6;
  cfg.effect_hi = 0.5;
  EXPECT_THROW(generate_plasmode(base, cfg, 0), Error);

  // Outcome 0 has constant control responses: it must never be picked;
  // with every outcome constant the draw is impossible.
  const std::size_t I = 30, K = 5;
  std::vector<double> resp(I * 2 * K);
  std::vector<std::uint8_t> z(I * 2);
  Rng rng(3);
  for (std::size_t i = 0; i < I; ++i) {
    z[2 * i] = 1;
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < K; ++k) resp[(2 * i + j) * K + k] = k == 0 ? 1.0 : normal(rng, 0, 1);
  }
  const MatchedPairDataset d(I, K, std::move(resp), std::move(z));
  PlasmodeConfig ok;
  ok.eta = 0.4;
  for (std::size_t m = 0; m < 50; ++m) {
    const auto p = generate_plasmode(d, ok, m);
    EXPECT_EQ(std::count(p.truth.begin(), p.truth.end(), 0u), 0);
  }
  const auto flat = fixture::from_differences({std::vector<double>(30, 1.0), std::vector<double>(30, 2.0)});
  PlasmodeConfig half;
  half.eta = 0.5;
  try {
    generate_plasmode(flat, half, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroVariance);
  }
}

TEST(Power, OrderInvariantAndDeterministic) {
  const auto base = fixture::gaussian(80, 20, 6);
  PlasmodeConfig cfg;
  cfg.n_replications = 40;
  cfg.seed = 2;
  std::vector<PlasmodeDataset> reps;
  for (std::size_t m = 0; m < cfg.n_replications; ++m) reps.push_back(generate_plasmode(base, cfg, m));
  const std::vector<double> grid{0.3, 0.5, 0.7};
  const auto rows = power_matrix(reps, grid, SensParams(), Method::FdrRank, 8);
  auto reversed = rows;
  std::reverse(reversed.begin(), reversed.end());
  const auto a = column_means(rows, 3), b = column_means(reversed, 3);
  for (std::size_t g = 0; g < 3; ++g) EXPECT_NEAR(a[g], b[g], 1e-12);

  TestOptions par;
  par.threads = 4;
  EXPECT_EQ(power_matrix(reps, grid, SensParams(), Method::FdrRank, 8, par), rows);
  const auto c1 = optimize_fraction(base, cfg, default_grid(0.1), SensParams(), Method::FwerSelection);
  const auto c2 = optimize_fraction(base, cfg, default_grid(0.1), SensParams(), Method::FwerSelection, par);
  EXPECT_EQ(c1.power, c2.power);
  EXPECT_EQ(empirical_power(base, cfg, 0.5, SensParams(), Method::FwerSelection),
            c1.power[4]);
}

TEST(Power, NonIncreasingInGamma) {
  const auto base = fixture::gaussian(200, 20, 15);
  PlasmodeConfig cfg;
  cfg.n_replications = 200;
  cfg.eta = 0.2;
  cfg.seed = 3;
  for (Method m : {Method::FwerSelection, Method::FdrRank}) {
    double prev = 2.0;
    for (double g : {1.0, 1.25, 1.5, 1.75, 2.0}) {
      const double p = empirical_power(base, cfg, 0.6, SensParams(g), m);
      EXPECT_LE(p, prev) << to_string(m) << " gamma=" << g;
      prev = p;
    }
  }
}

TEST(Power, NullErrorControlSmall) {
  const auto base = fixture::gaussian(100, 10, 17);
  PlasmodeConfig cfg;
  cfg.effect_lo = cfg.effect_hi = 0.0;
  cfg.seed = 5;
  const std::size_t M = 300;
  int fwer_any = 0;
  double fdp = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    const auto p = generate_plasmode(base, cfg, m);
    const auto seed = replication_split_seed(cfg.seed, m);
    fwer_any += !run_split_test(p.data, 0.5, SensParams(), Method::FwerSelection, seed).rejected.empty();
    fdp += run_split_test(p.data, 0.5, SensParams(), Method::FdrRank, seed).rejected.empty() ? 0.0 : 1.0;
  }
  const double bound = 0.05 + 3 * std::sqrt(0.05 * 0.95 / M);
  EXPECT_LE(fwer_any / double(M), bound);
  EXPECT_LE(fdp / M, bound);
}

TEST(Report, JsonRoundTrip) {
  const auto d = fixture::gaussian(60, 4, 3);
  const auto r = run_split_test(d, 0.5, SensParams(1.0, 0.5), Method::FdrRank, 8);
  const auto back = rejection_report_from_json(to_json(r));
  EXPECT_EQ(back.rejected, r.rejected);
  EXPECT_EQ(back.selected, r.selected);
  EXPECT_EQ(back.planning_pvalues.values, r.planning_pvalues.values);
  EXPECT_EQ(back.analysis_pvalues.ids, r.analysis_pvalues.ids);
  EXPECT_EQ(to_json(back).dump(), to_json(r).dump());
  const auto c = summarize_curve({0.5, 0.6, 0.7}, {0.1, 0.3, 0.2});
  EXPECT_EQ(to_json(power_curve_from_json(to_json(c))).dump(), to_json(c).dump());
  EXPECT_EQ(power_curve_csv(c), "zeta,power,near_optimal\n0.5,0.1,0\n0.6,0.3,1\n0.7,0.2,0\n");
}
