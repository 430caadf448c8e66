#pragma once

#include <osplit/dataset.hpp>
#include <osplit/rng.hpp>

#include <cstdint>
#include <vector>

namespace fixture {

/// Dataset whose treated-minus-control differences are diffs[k][i]. The
/// treated unit alternates between positions so both layouts are exercised.
inline osplit::MatchedPairDataset from_differences(const std::vector<std::vector<double>>& diffs,
                                                   double control_level = 0.0) {
  const std::size_t K = diffs.size(), I = diffs.front().size();
  std::vector<double> resp(I * 2 * K);
  std::vector<std::uint8_t> z(I * 2);
  for (std::size_t i = 0; i < I; ++i) {
    const std::size_t t = i % 2;
    z[2 * i + t] = 1;
    for (std::size_t k = 0; k < K; ++k) {
      resp[(2 * i + t) * K + k] = control_level + diffs[k][i];
      resp[(2 * i + 1 - t) * K + k] = control_level;
    }
  }
  return osplit::MatchedPairDataset(I, K, std::move(resp), std::move(z));
}

/// Gaussian responses, no treatment effect.
inline osplit::MatchedPairDataset gaussian(std::size_t I, std::size_t K, std::uint64_t seed,
                                           std::size_t D = 0) {
  osplit::Rng rng(seed);
  std::vector<double> resp(I * 2 * K), cov(I * 2 * D);
  std::vector<std::uint8_t> z(I * 2);
  for (auto& r : resp) r = osplit::normal(rng, 10.0, 2.0);
  for (auto& c : cov) c = osplit::uniform(rng, 0.0, 5.0);
  for (std::size_t i = 0; i < I; ++i) z[2 * i + (osplit::bernoulli(rng, 0.5) ? 1 : 0)] = 1;
  return osplit::MatchedPairDataset(I, K, std::move(resp), std::move(z), {}, {}, D, std::move(cov));
}

}  // namespace fixture
