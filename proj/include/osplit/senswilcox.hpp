#pragma once

// Wilcoxon signed-rank statistic and its sensitivity analysis under a bias
// factor Gamma: worst-case p-values (exact and normal), critical values,
// asymptotic power and design sensitivity.

#include <osplit/error.hpp>

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace osplit {

inline constexpr double kMinPValue = 1e-300;
inline constexpr std::size_t kDefaultExactLimit = 20;

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }
inline double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

inline double clamp_pvalue(double p) { return std::clamp(p, kMinPValue, 1.0); }

/// Bias factor Gamma >= 1, level alpha, and kappa = Gamma / (1 + Gamma), the
/// worst-case probability that a pair's difference is positive under the null.
class SensParams {
 public:
  explicit SensParams(double gamma = 1.0, double alpha = 0.05) : gamma_(gamma), alpha_(alpha) {
    if (!(gamma >= 1.0) || !std::isfinite(gamma))
      throw Error(ErrorCode::InvalidGamma, "gamma must be >= 1, got " + std::to_string(gamma));
    if (!(alpha > 0.0 && alpha < 1.0))
      throw Error(ErrorCode::InvalidAlpha, "alpha must lie in (0,1), got " + std::to_string(alpha));
    kappa_ = gamma / (1.0 + gamma);
  }

  double gamma() const noexcept { return gamma_; }
  double alpha() const noexcept { return alpha_; }
  double kappa() const noexcept { return kappa_; }

 private:
  double gamma_;
  double alpha_;
  double kappa_;
};

struct SignedRankResult {
  double statistic = 0.0;
  std::size_t n_pairs = 0;
  std::vector<double> ranks;  // average ranks of |diff|, ties averaged
  std::vector<double> signs;  // 0, 1/2 or 1
};

struct PowerParams {
  double p0 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
};

inline void check_finite(std::span<const double> diffs) {
  if (diffs.empty()) throw Error(ErrorCode::EmptyInput, "no differences");
  for (double d : diffs)
    if (!std::isfinite(d)) throw Error(ErrorCode::NonFiniteValue, "non-finite difference");
}

/// W = sum_i sgn(d_i) * rank(|d_i|) with sgn in {0, 1/2, 1}. Zeros take part
/// in the ranking.
inline SignedRankResult signed_rank_statistic(std::span<const double> diffs) {
  check_finite(diffs);
  const std::size_t n = diffs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(diffs[a]) < std::abs(diffs[b]);
  });
  SignedRankResult r;
  r.n_pairs = n;
  r.ranks.assign(n, 0.0);
  r.signs.assign(n, 0.0);
  for (std::size_t lo = 0; lo < n;) {
    std::size_t hi = lo + 1;
    const double a = std::abs(diffs[order[lo]]);
    while (hi < n && std::abs(diffs[order[hi]]) == a) ++hi;
    const double avg = 0.5 * static_cast<double>(lo + 1 + hi);
    for (std::size_t t = lo; t < hi; ++t) r.ranks[order[t]] = avg;
    lo = hi;
  }
  for (std::size_t i = 0; i < n; ++i) {
    r.signs[i] = diffs[i] > 0.0 ? 1.0 : (diffs[i] == 0.0 ? 0.5 : 0.0);
    r.statistic += r.signs[i] * r.ranks[i];
  }
  return r;
}

/// Exact upper-tail probability Pr(W >= w) when each nonzero difference keeps
/// its rank and is positive independently with probability kappa; zeros add
/// rank/2 deterministically. Ranks are multiples of 1/2, so 4W is an integer
/// and the distribution is a convolution over integer weights.
inline double exact_upper_tail(std::span<const double> ranks, std::span<const double> signs,
                               double w_obs, double kappa) {
  std::int64_t offset = 0;
  std::vector<std::int64_t> weights;
  weights.reserve(ranks.size());
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    const auto w4 = static_cast<std::int64_t>(std::llround(4.0 * ranks[i]));
    if (signs[i] == 0.5)
      offset += w4 / 2;
    else
      weights.push_back(w4);
  }
  const std::int64_t total = std::accumulate(weights.begin(), weights.end(), std::int64_t{0});
  std::vector<double> dist(static_cast<std::size_t>(total) + 1, 0.0);
  dist[0] = 1.0;
  std::int64_t reach = 0;
  for (std::int64_t w : weights) {
    for (std::int64_t s = reach; s >= 0; --s) {
      const double p = dist[static_cast<std::size_t>(s)];
      if (p == 0.0) continue;
      dist[static_cast<std::size_t>(s + w)] += p * kappa;
      dist[static_cast<std::size_t>(s)] = p * (1.0 - kappa);
    }
    reach += w;
  }
  const auto target = static_cast<std::int64_t>(std::llround(4.0 * w_obs)) - offset;
  if (target <= 0) return 1.0;
  if (target > total) return 0.0;
  double tail = 0.0;
  for (std::int64_t s = target; s <= total; ++s) tail += dist[static_cast<std::size_t>(s)];
  return std::min(tail, 1.0);
}

inline double gamma_pvalue_exact(const SignedRankResult& sr, const SensParams& params,
                                 std::size_t exact_limit = kDefaultExactLimit) {
  if (sr.n_pairs > exact_limit)
    throw Error(ErrorCode::TooLarge, "I=" + std::to_string(sr.n_pairs) + " exceeds exact limit " +
                                         std::to_string(exact_limit));
  return clamp_pvalue(exact_upper_tail(sr.ranks, sr.signs, sr.statistic, params.kappa()));
}

/// Worst-case upper-bound p-value under bias Gamma by exact convolution.
inline double gamma_pvalue_exact(std::span<const double> diffs, const SensParams& params,
                                 std::size_t exact_limit = kDefaultExactLimit) {
  if (diffs.size() > exact_limit)
    throw Error(ErrorCode::TooLarge, "I=" + std::to_string(diffs.size()) +
                                         " exceeds exact limit " + std::to_string(exact_limit));
  return gamma_pvalue_exact(signed_rank_statistic(diffs), params, exact_limit);
}

/// Null mean and variance of W under the worst case, ignoring ties.
inline double null_mean(std::size_t n, double kappa) {
  const double I = static_cast<double>(n);
  return kappa * I * (I + 1.0) / 2.0;
}
inline double null_variance(std::size_t n, double kappa) {
  const double I = static_cast<double>(n);
  return kappa * (1.0 - kappa) * I * (I + 1.0) * (2.0 * I + 1.0) / 6.0;
}

inline double gamma_pvalue_normal(double statistic, std::size_t n, const SensParams& params) {
  if (n == 0) throw Error(ErrorCode::EmptyInput, "no differences");
  const double z = (statistic - null_mean(n, params.kappa())) /
                   std::sqrt(null_variance(n, params.kappa()));
  return clamp_pvalue(normal_sf(z));
}

/// Normal approximation to the worst-case p-value, no continuity correction.
inline double gamma_pvalue_normal(std::span<const double> diffs, const SensParams& params) {
  const auto sr = signed_rank_statistic(diffs);
  return gamma_pvalue_normal(sr.statistic, sr.n_pairs, params);
}

/// The p-value the testing pipeline uses: exact up to `exact_limit` pairs,
/// normal approximation above.
inline double gamma_pvalue(const SignedRankResult& sr, const SensParams& params,
                           std::size_t exact_limit = kDefaultExactLimit) {
  if (sr.n_pairs <= exact_limit) return gamma_pvalue_exact(sr, params, exact_limit);
  return gamma_pvalue_normal(sr.statistic, sr.n_pairs, params);
}

inline double gamma_pvalue(std::span<const double> diffs, const SensParams& params,
                           std::size_t exact_limit = kDefaultExactLimit) {
  return gamma_pvalue(signed_rank_statistic(diffs), params, exact_limit);
}

/// Large-sample critical value c_Gamma of W at level alpha.
inline double critical_value(std::size_t n, const SensParams& params) {
  if (n == 0) throw Error(ErrorCode::EmptyInput, "I must be >= 1");
  return null_mean(n, params.kappa()) +
         normal_quantile(1.0 - params.alpha()) * std::sqrt(null_variance(n, params.kappa()));
}

/// Plug-in estimates of p0 = P(D_i > 0), p1 = P(D_i + D_j > 0) and
/// p2 = P(D_i + D_j > 0, D_i + D_s > 0). The triple count is obtained per
/// anchor i from the number c_i of partners j with D_i + D_j > 0.
inline PowerParams estimate_p012(std::span<const double> diffs) {
  const std::size_t n = diffs.size();
  if (n < 3) throw Error(ErrorCode::TooFew, "need at least 3 differences");
  check_finite(diffs);
  double pos = 0.0, pair_pos = 0.0, triple_pos = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (diffs[i] > 0.0) pos += 1.0;
    double c = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && diffs[i] + diffs[j] > 0.0) c += 1.0;
    pair_pos += c;
    triple_pos += c * (c - 1.0) / 2.0;
  }
  const double I = static_cast<double>(n);
  PowerParams pp;
  pp.p0 = pos / I;
  pp.p1 = (pair_pos / 2.0) / (I * (I - 1.0) / 2.0);
  pp.p2 = triple_pos / (I * (I - 1.0) * (I - 2.0) / 2.0);
  return pp;
}

inline double power_mean(const PowerParams& pp, std::size_t n) {
  const double I = static_cast<double>(n);
  return 0.5 * I * (I - 1.0) * pp.p1 + I * pp.p0;
}

inline double power_variance(const PowerParams& pp, std::size_t n) {
  const double I = static_cast<double>(n);
  const double d01 = pp.p0 - pp.p1;
  return I * (I - 1.0) * (I - 2.0) * (pp.p2 - pp.p1 * pp.p1) +
         0.5 * I * (I - 1.0) * (2.0 * d01 * d01 + 3.0 * pp.p1 * (1.0 - pp.p1)) +
         I * pp.p0 * (1.0 - pp.p0);
}

/// Asymptotic power 1 - Phi((c_Gamma - mu) / sigma) of the sensitivity
/// analysis. A zero variance is a point mass at mu.
inline double power_normal_approx(const PowerParams& pp, std::size_t n, const SensParams& params) {
  auto in01 = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in01(pp.p0) || !in01(pp.p1) || !in01(pp.p2))
    throw Error(ErrorCode::InvalidPValues, "p0, p1, p2 must lie in [0,1]");
  if (n < 3) throw Error(ErrorCode::TooFew, "need I >= 3");
  const double c = critical_value(n, params);
  const double mu = power_mean(pp, n);
  const double var = power_variance(pp, n);
  if (var < 0.0 || !std::isfinite(var))
    throw Error(ErrorCode::NonPositiveVariance,
                "variance of W is " + std::to_string(var) + " for the given p0, p1, p2");
  if (var == 0.0) return mu >= c ? 1.0 : 0.0;
  return normal_sf((c - mu) / std::sqrt(var));
}

/// Design sensitivity p1 / (1 - p1).
inline double design_sensitivity(const PowerParams& pp) {
  if (!(pp.p1 > 0.0 && pp.p1 < 1.0))
    throw Error(ErrorCode::BoundaryP1, pp.p1 >= 1.0 ? "p1 = 1: design sensitivity is infinite"
                                                      : "p1 = 0: design sensitivity is zero");
  return pp.p1 / (1.0 - pp.p1);
}

}  // namespace osplit
