#pragma once

#include <osplit/error.hpp>
#include <osplit/rng.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace osplit {

/// I matched pairs of two units each, K outcomes per unit.
///
/// Responses are stored pair-major as [pair][unit][outcome]; treatment as
/// [pair][unit]. Exactly one unit per pair is treated. Instances are
/// validated on construction and never mutated afterwards.
class MatchedPairDataset {
 public:
  MatchedPairDataset() = default;

  MatchedPairDataset(std::size_t n_pairs, std::size_t n_outcomes, std::vector<double> responses,
                     std::vector<std::uint8_t> treatment, std::vector<std::string> pair_ids = {},
                     std::vector<std::string> outcome_names = {},
                     std::size_t n_covariates = 0, std::vector<double> covariates = {},
                     std::vector<std::string> covariate_names = {})
      : n_pairs_(n_pairs),
        n_outcomes_(n_outcomes),
        n_covariates_(n_covariates),
        responses_(std::move(responses)),
        treatment_(std::move(treatment)),
        covariates_(std::move(covariates)),
        pair_ids_(std::move(pair_ids)),
        outcome_names_(std::move(outcome_names)),
        covariate_names_(std::move(covariate_names)) {
    if (n_pairs_ == 0 || n_outcomes_ == 0)
      throw Error(ErrorCode::EmptyInput, "dataset needs at least one pair and one outcome");
    if (responses_.size() != n_pairs_ * 2 * n_outcomes_)
      throw Error(ErrorCode::IndexOutOfRange, "responses size does not match I*2*K");
    if (treatment_.size() != n_pairs_ * 2)
      throw Error(ErrorCode::IndexOutOfRange, "treatment size does not match I*2");
    if (covariates_.size() != n_pairs_ * 2 * n_covariates_)
      throw Error(ErrorCode::IndexOutOfRange, "covariates size does not match I*2*D");
    for (std::size_t i = 0; i < n_pairs_; ++i) {
      if (treatment_[2 * i] > 1 || treatment_[2 * i + 1] > 1 ||
          treatment_[2 * i] + treatment_[2 * i + 1] != 1)
        throw Error(ErrorCode::TreatmentViolation,
                    "pair " + std::to_string(i) + " does not have exactly one treated unit");
    }
    for (double r : responses_)
      if (!std::isfinite(r)) throw Error(ErrorCode::NonNumericOutcome, "non-finite response");
    if (pair_ids_.empty()) {
      pair_ids_.reserve(n_pairs_);
      for (std::size_t i = 0; i < n_pairs_; ++i) pair_ids_.push_back(std::to_string(i + 1));
    }
    if (outcome_names_.empty()) {
      for (std::size_t k = 0; k < n_outcomes_; ++k)
        outcome_names_.push_back("y_" + std::to_string(k + 1));
    }
    if (covariate_names_.empty()) {
      for (std::size_t d = 0; d < n_covariates_; ++d)
        covariate_names_.push_back("x_" + std::to_string(d + 1));
    }
    if (pair_ids_.size() != n_pairs_ || outcome_names_.size() != n_outcomes_ ||
        covariate_names_.size() != n_covariates_)
      throw Error(ErrorCode::IndexOutOfRange, "label vector length mismatch");
  }

  std::size_t n_pairs() const noexcept { return n_pairs_; }
  std::size_t n_outcomes() const noexcept { return n_outcomes_; }
  std::size_t n_covariates() const noexcept { return n_covariates_; }

  double response(std::size_t pair, std::size_t unit, std::size_t outcome) const {
    return responses_[(pair * 2 + unit) * n_outcomes_ + outcome];
  }
  std::uint8_t treatment(std::size_t pair, std::size_t unit) const {
    return treatment_[pair * 2 + unit];
  }
  double covariate(std::size_t pair, std::size_t unit, std::size_t d) const {
    return covariates_[(pair * 2 + unit) * n_covariates_ + d];
  }
  /// 0 or 1: the unit within the pair that received treatment.
  std::size_t treated_unit(std::size_t pair) const { return treatment_[pair * 2] ? 0 : 1; }

  const std::vector<double>& responses() const noexcept { return responses_; }
  const std::vector<std::uint8_t>& treatments() const noexcept { return treatment_; }
  const std::vector<double>& covariates() const noexcept { return covariates_; }
  const std::vector<std::string>& pair_ids() const noexcept { return pair_ids_; }
  const std::vector<std::string>& outcome_names() const noexcept { return outcome_names_; }
  const std::vector<std::string>& covariate_names() const noexcept { return covariate_names_; }

  /// Dataset restricted to the given pairs, in the given order.
  MatchedPairDataset subset(const std::vector<std::size_t>& pairs) const {
    std::vector<double> resp;
    std::vector<std::uint8_t> z;
    std::vector<double> cov;
    std::vector<std::string> ids;
    resp.reserve(pairs.size() * 2 * n_outcomes_);
    z.reserve(pairs.size() * 2);
    for (std::size_t p : pairs) {
      if (p >= n_pairs_) throw Error(ErrorCode::IndexOutOfRange, "pair index out of range");
      for (std::size_t j = 0; j < 2; ++j) {
        auto rb = responses_.begin() + static_cast<std::ptrdiff_t>((p * 2 + j) * n_outcomes_);
        resp.insert(resp.end(), rb, rb + static_cast<std::ptrdiff_t>(n_outcomes_));
        z.push_back(treatment_[p * 2 + j]);
        auto cb = covariates_.begin() + static_cast<std::ptrdiff_t>((p * 2 + j) * n_covariates_);
        cov.insert(cov.end(), cb, cb + static_cast<std::ptrdiff_t>(n_covariates_));
      }
      ids.push_back(pair_ids_[p]);
    }
    return MatchedPairDataset(pairs.size(), n_outcomes_, std::move(resp), std::move(z),
                              std::move(ids), outcome_names_, n_covariates_, std::move(cov),
                              covariate_names_);
  }

  friend bool operator==(const MatchedPairDataset&, const MatchedPairDataset&) = default;

 private:
  std::size_t n_pairs_ = 0;
  std::size_t n_outcomes_ = 0;
  std::size_t n_covariates_ = 0;
  std::vector<double> responses_;
  std::vector<std::uint8_t> treatment_;
  std::vector<double> covariates_;
  std::vector<std::string> pair_ids_;
  std::vector<std::string> outcome_names_;
  std::vector<std::string> covariate_names_;
};

struct SplitResult {
  MatchedPairDataset planning;
  MatchedPairDataset analysis;
  std::vector<std::size_t> planning_pairs;  // indices into the source dataset
  std::vector<std::size_t> analysis_pairs;
  double fraction = 0.0;
  std::uint64_t seed = 0;
};

/// Treated-minus-control difference V_ik for every pair.
inline std::vector<double> pair_differences(const MatchedPairDataset& d, std::size_t k) {
  if (k >= d.n_outcomes())
    throw Error(ErrorCode::IndexOutOfRange,
                "outcome " + std::to_string(k) + " >= K=" + std::to_string(d.n_outcomes()));
  std::vector<double> v(d.n_pairs());
  for (std::size_t i = 0; i < d.n_pairs(); ++i) {
    const double sign = d.treatment(i, 0) ? 1.0 : -1.0;
    v[i] = (d.response(i, 0, k) - d.response(i, 1, k)) * sign;
  }
  return v;
}

/// Planning-sample size floor((1-zeta)*I). The product is nudged by a few
/// ulps so that e.g. zeta=0.7, I=10 gives 3 and not 2.
inline std::size_t planning_size(std::size_t n_pairs, double zeta) {
  const double x = (1.0 - zeta) * static_cast<double>(n_pairs);
  return static_cast<std::size_t>(std::floor(x + 1e-9 * std::max(1.0, x)));
}

inline bool split_feasible(std::size_t n_pairs, double zeta) {
  if (!(zeta > 0.0 && zeta < 1.0)) return false;
  const std::size_t plan = planning_size(n_pairs, zeta);
  return plan >= 1 && plan < n_pairs;
}

/// Seeded uniformly random permutation of 0..n-1 (Fisher-Yates).
inline std::vector<std::size_t> split_permutation(std::size_t n_pairs, std::uint64_t seed) {
  std::vector<std::size_t> perm(n_pairs);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(perm, rng);
  return perm;
}

/// Pair-level random partition: the first floor((1-zeta)I) entries of a
/// seeded permutation form the planning sample, the rest the analysis sample.
/// Equal seeds give nested planning sets across zeta.
inline SplitResult split_pairs(const MatchedPairDataset& d, double zeta, std::uint64_t seed) {
  if (!split_feasible(d.n_pairs(), zeta))
    throw Error(ErrorCode::DegenerateSplit,
                "zeta=" + std::to_string(zeta) + " with I=" + std::to_string(d.n_pairs()) +
                    " leaves an empty part");
  const auto perm = split_permutation(d.n_pairs(), seed);
  const std::size_t n_plan = planning_size(d.n_pairs(), zeta);
  SplitResult out;
  out.planning_pairs.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_plan));
  out.analysis_pairs.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_plan), perm.end());
  out.planning = d.subset(out.planning_pairs);
  out.analysis = d.subset(out.analysis_pairs);
  out.fraction = zeta;
  out.seed = seed;
  return out;
}

// ---------------------------------------------------------------------------
// CSV: long format, one row per unit.
//   pair_id,unit,z,x_1..x_D,y_1..y_K
// ---------------------------------------------------------------------------

struct CsvSchema {
  std::string pair_column = "pair_id";
  std::string unit_column = "unit";
  std::string treatment_column = "z";
  std::string covariate_prefix = "x_";
  /// Empty prefix: every column that is not an id/unit/treatment/covariate
  /// column is an outcome.
  std::string outcome_prefix = "y_";
};

namespace csv {

/// Splits one RFC-4180 record. `in` is advanced past the record; quoted
/// fields may span lines. Returns false at end of input.
inline bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  bool field_started = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '\n') {
      break;
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get(c);
      break;
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

inline std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace csv

inline MatchedPairDataset read_matched_csv(std::istream& in, const CsvSchema& schema = {}) {
  std::vector<std::string> header;
  if (!csv::read_record(in, header) || (header.size() == 1 && header[0].empty()))
    throw Error(ErrorCode::EmptyFile, "no header row");
  if (!header.empty() && header[0].size() >= 3 && header[0].compare(0, 3, "\xEF\xBB\xBF") == 0)
    header[0].erase(0, 3);

  std::ptrdiff_t pair_col = -1, unit_col = -1, z_col = -1;
  std::vector<std::size_t> cov_cols, out_cols;
  std::vector<std::string> cov_names, out_names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& h = header[c];
    if (h == schema.pair_column) {
      pair_col = static_cast<std::ptrdiff_t>(c);
    } else if (h == schema.unit_column) {
      unit_col = static_cast<std::ptrdiff_t>(c);
    } else if (h == schema.treatment_column) {
      z_col = static_cast<std::ptrdiff_t>(c);
    } else if (!schema.covariate_prefix.empty() && h.rfind(schema.covariate_prefix, 0) == 0) {
      cov_cols.push_back(c);
      cov_names.push_back(h);
    } else if (schema.outcome_prefix.empty() || h.rfind(schema.outcome_prefix, 0) == 0) {
      out_cols.push_back(c);
      out_names.push_back(h);
    }
  }
  if (pair_col < 0 || z_col < 0)
    throw Error(ErrorCode::EmptyFile, "header lacks pair id or treatment column");
  if (out_cols.empty()) throw Error(ErrorCode::NonNumericOutcome, "no outcome columns");

  struct Row {
    std::string unit;
    std::uint8_t z;
    std::vector<double> x, y;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<Row>> rows;
  std::vector<std::string> rec;
  std::size_t line = 1;
  while (csv::read_record(in, rec)) {
    ++line;
    if (rec.size() == 1 && rec[0].empty()) continue;
    if (rec.size() != header.size())
      throw Error(ErrorCode::NonNumericOutcome,
                  "line " + std::to_string(line) + ": expected " + std::to_string(header.size()) +
                      " fields, got " + std::to_string(rec.size()));
    Row r;
    r.unit = unit_col >= 0 ? rec[static_cast<std::size_t>(unit_col)] : std::string();
    auto zv = csv::parse_double(rec[static_cast<std::size_t>(z_col)]);
    if (!zv || (*zv != 0.0 && *zv != 1.0))
      throw Error(ErrorCode::TreatmentViolation,
                  "line " + std::to_string(line) + ": treatment must be 0 or 1");
    r.z = static_cast<std::uint8_t>(*zv);
    for (std::size_t c : cov_cols) {
      auto v = csv::parse_double(rec[c]);
      if (!v)
        throw Error(ErrorCode::NonNumericOutcome,
                    "line " + std::to_string(line) + ": covariate '" + header[c] + "' not numeric");
      r.x.push_back(*v);
    }
    for (std::size_t c : out_cols) {
      auto v = csv::parse_double(rec[c]);
      if (!v)
        throw Error(ErrorCode::NonNumericOutcome,
                    "line " + std::to_string(line) + ": outcome '" + header[c] + "' not numeric");
      r.y.push_back(*v);
    }
    const std::string& id = rec[static_cast<std::size_t>(pair_col)];
    auto [it, inserted] = rows.try_emplace(id);
    if (inserted) order.push_back(id);
    it->second.push_back(std::move(r));
  }
  if (order.empty()) throw Error(ErrorCode::EmptyFile, "no data rows");

  const std::size_t n_pairs = order.size(), K = out_cols.size(), D = cov_cols.size();
  std::vector<double> resp, cov;
  std::vector<std::uint8_t> z;
  resp.reserve(n_pairs * 2 * K);
  for (const auto& id : order) {
    auto& units = rows[id];
    if (units.size() != 2)
      throw Error(ErrorCode::MissingUnit, "pair '" + id + "' has " +
                                              std::to_string(units.size()) + " rows, expected 2");
    if (units[0].z + units[1].z != 1)
      throw Error(ErrorCode::TreatmentViolation,
                  "pair '" + id + "' does not have exactly one treated unit");
    if (unit_col >= 0) {
      auto u0 = csv::parse_double(units[0].unit), u1 = csv::parse_double(units[1].unit);
      if (u0 && u1 && *u1 < *u0) std::swap(units[0], units[1]);
    }
    for (const auto& u : units) {
      resp.insert(resp.end(), u.y.begin(), u.y.end());
      cov.insert(cov.end(), u.x.begin(), u.x.end());
      z.push_back(u.z);
    }
  }
  return MatchedPairDataset(n_pairs, K, std::move(resp), std::move(z), std::move(order),
                            std::move(out_names), D, std::move(cov), std::move(cov_names));
}

inline MatchedPairDataset load_matched_csv(const std::filesystem::path& path,
                                           const CsvSchema& schema = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  return read_matched_csv(in, schema);
}

inline void write_matched_csv(std::ostream& out, const MatchedPairDataset& d,
                              const CsvSchema& schema = {}) {
  out << csv::quote(schema.pair_column) << ',' << csv::quote(schema.unit_column) << ','
      << csv::quote(schema.treatment_column);
  for (const auto& n : d.covariate_names()) out << ',' << csv::quote(n);
  for (const auto& n : d.outcome_names()) out << ',' << csv::quote(n);
  out << '\n';
  for (std::size_t i = 0; i < d.n_pairs(); ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      out << csv::quote(d.pair_ids()[i]) << ',' << (j + 1) << ',' << int(d.treatment(i, j));
      for (std::size_t c = 0; c < d.n_covariates(); ++c)
        out << ',' << csv::format_double(d.covariate(i, j, c));
      for (std::size_t k = 0; k < d.n_outcomes(); ++k)
        out << ',' << csv::format_double(d.response(i, j, k));
      out << '\n';
    }
  }
}

/// Writes to a sibling temp file and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + tmp.string() + "'");
    out << contents;
    if (!out) throw Error(ErrorCode::Io, "write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "rename to '" + path.string() + "' failed: " + ec.message());
}

inline void save_matched_csv(const std::filesystem::path& path, const MatchedPairDataset& d,
                             const CsvSchema& schema = {}) {
  std::ostringstream os;
  write_matched_csv(os, d, schema);
  write_file_atomic(path, os.str());
}

}  // namespace osplit
