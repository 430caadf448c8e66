#include <osplit/simbench.hpp>

#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

using namespace osplit;

namespace {

DGPConfig config(std::uint64_t seed, AssignmentMode mode = AssignmentMode::PairBiased) {
  DGPConfig c;
  c.seed = seed;
  c.assignment_mode = mode;
  return c;
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST(Population, ShapesAndAffectedCount) {
  auto c = config(1);
  c.n_outcomes = 100;
  const auto pop = generate_population(c);
  EXPECT_EQ(pop.affected.size(), 10u);
  EXPECT_EQ(pop.effect_draws.size(), 10u);
  EXPECT_EQ(pop.covariates.size(), 5000u * 5u);
  EXPECT_EQ(pop.responses.size(), 5000u * 100u);
  for (double x : pop.covariates) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 5.0);
  }
  for (double r : pop.responses) EXPECT_TRUE(std::isfinite(r));
}

TEST(Population, FairAssignmentAtGammaOne) {
  for (auto mode : {AssignmentMode::MarginalBernoulli, AssignmentMode::PairBiased}) {
    const auto pop = generate_population(config(2, mode));
    double treated = 0;
    for (auto z : pop.treatment) treated += z;
    EXPECT_NEAR(treated / 5000.0, 0.5, 3 * std::sqrt(0.25 / 5000));
  }
}

TEST(Population, VerbatimRateFollowsPrintedFormula) {
  auto c = config(3, AssignmentMode::MarginalBernoulli);
  c.gamma = 2.0;
  const auto pop = generate_population(c);
  double treated = 0;
  for (auto z : pop.treatment) treated += z;
  EXPECT_NEAR(treated / 5000.0, 0.4, 3 * std::sqrt(0.24 / 5000));
}

TEST(Population, TreatmentEffectOnAffectedOutcome) {
  // Treated-minus-control mean of an affected outcome equals its tau up to
  // the difference of two sample means; tau itself is centred at 1.
  double tau_sum = 0;
  const int seeds = 40;
  for (int s = 0; s < seeds; ++s) {
    const auto pop = generate_population(config(100 + s, AssignmentMode::MarginalBernoulli));
    const std::size_t k = pop.affected[0];
    double t = 0, c = 0, nt = 0, nc = 0;
    std::vector<double> res;
    for (std::size_t n = 0; n < 5000; ++n) {
      // Remove the covariate part so the check has a small SE.
      double xa = 0;
      for (std::size_t d = 0; d < 5; ++d) xa += pop.covariates[n * 5 + d] * pop.coefficients[d];
      const double r = pop.responses[n * 10 + k] - xa;
      (pop.treatment[n] ? t : c) += r;
      (pop.treatment[n] ? nt : nc) += 1;
    }
    const double se = std::sqrt(1 / nt + 1 / nc);
    EXPECT_NEAR(t / nt - c / nc, pop.effect_draws[0], 3.5 * se);
    tau_sum += pop.effect_draws[0];
  }
  EXPECT_NEAR(tau_sum / seeds, 1.0, 3.0 / std::sqrt(double(seeds)));
}

TEST(Population, CorrelatedNoise) {
  auto c = config(4);
  c.outcome_correlation = 0.6;
  const auto pop = generate_population(c);
  // Corr(eps_1, eps_2) = lambda^2 after removing the covariate term.
  double s11 = 0, s22 = 0, s12 = 0;
  for (std::size_t n = 0; n < 5000; ++n) {
    double xa = 0;
    for (std::size_t d = 0; d < 5; ++d) xa += pop.covariates[n * 5 + d] * pop.coefficients[d];
    const double e1 = pop.baseline[n * 10] - xa, e2 = pop.baseline[n * 10 + 1] - xa;
    s11 += e1 * e1;
    s22 += e2 * e2;
    s12 += e1 * e2;
  }
  EXPECT_NEAR(s12 / std::sqrt(s11 * s22), 0.36, 0.05);
  EXPECT_NEAR(s11 / 5000, 1.0, 0.08);
}

TEST(Population, DeterministicAndExchangeable) {
  const auto a = generate_population(config(9)), b = generate_population(config(9));
  EXPECT_EQ(a.responses, b.responses);
  EXPECT_EQ(a.treatment, b.treatment);
  const auto c = generate_population(config(10));
  EXPECT_NE(a.responses, c.responses);
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  EXPECT_NEAR(mean(a.covariates), mean(c.covariates), 0.05);
  EXPECT_NEAR(mean(a.confounder), mean(c.confounder), 0.06);
}

TEST(Population, Validation) {
  auto c = config(1);
  c.n_units = 5001;
  EXPECT_THROW(generate_population(c), Error);
  c = config(1);
  c.eta = 0.05;
  EXPECT_THROW(generate_population(c), Error);
  c = config(1);
  c.outcome_correlation = 1.0;
  EXPECT_THROW(generate_population(c), Error);
}

TEST(Matching, IdenticalCovariatesMatchExactly) {
  RawPopulation pop;
  pop.n_units = 2;
  pop.n_covariates = 2;
  pop.n_outcomes = 1;
  pop.covariates = {1.5, 2.5, 1.5, 2.5};
  pop.confounder = {0.0, 0.0};
  pop.treatment = {1, 0};
  pop.baseline = {3.0, 1.0};
  pop.responses = {3.0, 1.0};
  pop.assignment_mode = AssignmentMode::MarginalBernoulli;
  const auto d = match_pairs(pop, 1, 0);
  EXPECT_EQ(d.covariate(0, 0, 0), d.covariate(0, 1, 0));
  EXPECT_EQ(d.covariate(0, 0, 1), d.covariate(0, 1, 1));
  EXPECT_EQ(pair_differences(d, 0)[0], 2.0);
}

TEST(Matching, InsufficientUnits) {
  const auto pop = generate_population(config(5));
  try {
    match_pairs(pop, 3000, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientUnits);
  }
}

TEST(Matching, BalanceAndDistinctUnits) {
  const auto pop = generate_population(config(6));
  const auto d = match_pairs(pop, 500, 2);
  EXPECT_EQ(d.n_pairs(), 500u);
  std::set<std::vector<double>> units;
  for (std::size_t i = 0; i < 500; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      std::vector<double> x(5);
      for (std::size_t c = 0; c < 5; ++c) x[c] = d.covariate(i, j, c);
      units.insert(x);
    }
  EXPECT_EQ(units.size(), 1000u);
  for (std::size_t c = 0; c < 5; ++c) {
    double mt = 0, mc = 0, vt = 0, vc = 0;
    for (std::size_t i = 0; i < 500; ++i) {
      const std::size_t t = d.treated_unit(i);
      mt += d.covariate(i, t, c);
      mc += d.covariate(i, 1 - t, c);
    }
    mt /= 500;
    mc /= 500;
    for (std::size_t i = 0; i < 500; ++i) {
      const std::size_t t = d.treated_unit(i);
      vt += std::pow(d.covariate(i, t, c) - mt, 2);
      vc += std::pow(d.covariate(i, 1 - t, c) - mc, 2);
    }
    const double smd = (mt - mc) / std::sqrt((vt + vc) / (2 * 499));
    EXPECT_LE(std::abs(smd), 0.2) << "covariate " << c;
  }
}

TEST(Matching, PairBiasedFavoursHighConfounder) {
  auto c = config(7);
  c.gamma = 3.0;
  const auto pop = generate_population(c);
  const auto d = match_pairs(pop, 1000, 3);
  // Units are identified by their (continuous) covariate vectors.
  std::map<std::vector<double>, double> u_of;
  for (std::size_t n = 0; n < pop.n_units; ++n)
    u_of[std::vector<double>(pop.covariates.begin() + n * 5, pop.covariates.begin() + n * 5 + 5)] =
        pop.confounder[n];
  int hi = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    auto key = [&](std::size_t j) {
      std::vector<double> x(5);
      for (std::size_t q = 0; q < 5; ++q) x[q] = d.covariate(i, j, q);
      return x;
    };
    const std::size_t t = d.treated_unit(i);
    hi += u_of.at(key(t)) >= u_of.at(key(1 - t));
  }
  EXPECT_NEAR(hi / 1000.0, 0.75, 3 * std::sqrt(0.75 * 0.25 / 1000));
}

TEST(Bench, ZeroReplicationsIsHeaderOnly) {
  BenchScenario sc;
  sc.replications = 0;
  std::ostringstream os;
  EXPECT_TRUE(run_benchmark(sc, os).empty());
  EXPECT_EQ(os.str(), std::string(kBenchHeader) + "\n");
}

TEST(Bench, SmokeScenario) {
  BenchScenario sc;
  sc.replications = 5;
  sc.n_outcomes = 10;
  sc.n_units = 1000;
  sc.pairs = {100};
  sc.grid_step = 0.1;
  std::ostringstream os;
  const auto rows = run_benchmark(sc, os);
  EXPECT_EQ(rows.size(), 4u);
  EXPECT_EQ(count_lines(os.str()), 5u);
  for (const auto& r : rows) {
    EXPECT_GE(r.power, 0.0);
    EXPECT_LE(r.power, 1.0);
    EXPECT_EQ(r.zeta_star.has_value(), r.method != BenchMethod::Bonferroni);
  }
  std::ostringstream again;
  run_benchmark(sc, again);
  EXPECT_EQ(os.str(), again.str());
}

TEST(Bench, FailureMarkerRow) {
  BenchScenario sc;
  sc.replications = 2;
  sc.n_units = 100;
  sc.pairs = {80};  // more pairs than treated units
  std::ostringstream os;
  EXPECT_THROW(run_benchmark(sc, os), Error);
  EXPECT_NE(os.str().find("\nFAILED,"), std::string::npos);
}

TEST(Bench, PowerNonIncreasingInGamma) {
  BenchScenario sc;
  sc.replications = 30;
  sc.n_outcomes = 20;
  sc.n_units = 1000;
  sc.pairs = {150};
  sc.gammas = {1.0, 1.5, 2.0};
  sc.methods = {BenchMethod::Bonferroni, BenchMethod::FdrRank};
  sc.grid_step = 0.05;
  sc.eta = 0.2;
  std::ostringstream os;
  const auto rows = run_benchmark(sc, os);
  for (std::size_t m = 0; m < 2; ++m)
    for (std::size_t g = 1; g < 3; ++g)
      EXPECT_LE(rows[g * 2 + m].power, rows[(g - 1) * 2 + m].power + 1e-12);
}
