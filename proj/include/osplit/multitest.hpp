#pragma once

// Bonferroni, Holm and Benjamini-Hochberg rejection rules. Rejection sets are
// returned as sorted hypothesis ids.

#include <osplit/error.hpp>

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

namespace osplit {

/// p-values keyed by hypothesis id. Ids default to 0..m-1.
struct PValueSet {
  std::vector<std::size_t> ids;
  std::vector<double> values;

  PValueSet() = default;
  explicit PValueSet(std::vector<double> v) : values(std::move(v)) {
    ids.resize(values.size());
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    validate();
  }
  PValueSet(std::vector<std::size_t> i, std::vector<double> v)
      : ids(std::move(i)), values(std::move(v)) {
    if (ids.size() != values.size())
      throw Error(ErrorCode::InvalidPValues, "ids and values differ in length");
    validate();
  }

  std::size_t size() const noexcept { return values.size(); }
  bool empty() const noexcept { return values.empty(); }

 private:
  void validate() const {
    for (double p : values)
      if (!(p >= 0.0 && p <= 1.0))
        throw Error(ErrorCode::InvalidPValues, "p-value outside [0,1]");
  }
};

struct BhResult {
  std::vector<std::size_t> rejected;
  std::size_t cutoff = 0;  // l* (0 when nothing qualifies)
};

namespace detail {

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorCode::InvalidAlpha, "alpha must lie in (0,1)");
}

/// Positions into ps sorted by (p, id).
inline std::vector<std::size_t> ascending_order(const PValueSet& ps) {
  std::vector<std::size_t> order(ps.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (ps.values[a] != ps.values[b]) return ps.values[a] < ps.values[b];
    return ps.ids[a] < ps.ids[b];
  });
  return order;
}

inline std::vector<std::size_t> sorted_ids(const PValueSet& ps,
                                           const std::vector<std::size_t>& positions) {
  std::vector<std::size_t> out;
  out.reserve(positions.size());
  for (std::size_t p : positions) out.push_back(ps.ids[p]);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

inline std::vector<std::size_t> bonferroni_reject(const PValueSet& ps, double alpha) {
  detail::check_alpha(alpha);
  std::vector<std::size_t> pos;
  if (ps.empty()) return pos;
  const double threshold = alpha / static_cast<double>(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i)
    if (ps.values[i] <= threshold) pos.push_back(i);
  return detail::sorted_ids(ps, pos);
}

/// Holm step-down: reject p_(j) while p_(j) <= alpha / (m - j + 1).
inline std::vector<std::size_t> holm_reject(const PValueSet& ps, double alpha) {
  detail::check_alpha(alpha);
  const auto order = detail::ascending_order(ps);
  const std::size_t m = ps.size();
  std::vector<std::size_t> pos;
  for (std::size_t j = 0; j < m; ++j) {
    if (ps.values[order[j]] > alpha / static_cast<double>(m - j)) break;
    pos.push_back(order[j]);
  }
  return detail::sorted_ids(ps, pos);
}

/// Benjamini-Hochberg step-up with l* = max{l : p_(l) <= l * alpha / m}.
inline BhResult bh_reject(const PValueSet& ps, double alpha) {
  detail::check_alpha(alpha);
  const auto order = detail::ascending_order(ps);
  const std::size_t m = ps.size();
  BhResult r;
  for (std::size_t l = m; l >= 1; --l) {
    if (ps.values[order[l - 1]] <= static_cast<double>(l) * alpha / static_cast<double>(m)) {
      r.cutoff = l;
      break;
    }
  }
  std::vector<std::size_t> pos(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(r.cutoff));
  r.rejected = detail::sorted_ids(ps, pos);
  return r;
}

}  // namespace osplit
