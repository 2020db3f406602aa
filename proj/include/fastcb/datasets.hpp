#pragma once

// Multiclass CSV ingestion and the bandit environment built from it.
//
// File format: one example per line, no header. The first column is the
// 1-based class label, the remaining columns are numeric features. Every row
// must have the same number of features. Blank lines are ignored.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fastcb/bandit_engine.hpp"
#include "fastcb/random.hpp"

namespace fastcb {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MulticlassDataset {
  std::string name;
  std::size_t num_classes = 0;
  std::size_t dim = 0;
  std::vector<std::size_t> labels;  ///< 0-based
  std::vector<double> features;     ///< row-major, size() * dim

  std::size_t size() const noexcept { return labels.size(); }
  std::span<const double> features_of(std::size_t i) const {
    return std::span<const double>(features).subspan(i * dim, dim);
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline double parse_number(std::string_view field, std::size_t line) {
  field = trim(field);
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size())
    throw ParseError("line " + std::to_string(line) + ": non-numeric field '" + std::string(field) + "'");
  if (!std::isfinite(v)) throw ParseError("line " + std::to_string(line) + ": non-finite value");
  return v;
}

}  // namespace detail

inline MulticlassDataset parse_multiclass_csv(std::istream& in, std::string name = {}) {
  MulticlassDataset ds;
  ds.name = std::move(name);
  std::string raw;
  std::size_t line = 0;
  bool first = true;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view row = detail::trim(raw);
    if (row.empty()) continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = row.find(',', start);
      fields.push_back(row.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    const double label = detail::parse_number(fields[0], line);
    if (label != std::floor(label)) throw ParseError("line " + std::to_string(line) + ": label is not an integer");
    if (label < 1.0) throw ParseError("line " + std::to_string(line) + ": labels are 1-based");
    const std::size_t d = fields.size() - 1;
    if (first) {
      ds.dim = d;
      first = false;
    } else if (d != ds.dim) {
      throw ParseError("line " + std::to_string(line) + ": expected " + std::to_string(ds.dim) +
                       " features, found " + std::to_string(d));
    }
    const auto y = static_cast<std::size_t>(label);
    ds.labels.push_back(y - 1);
    ds.num_classes = std::max(ds.num_classes, y);
    for (std::size_t j = 1; j < fields.size(); ++j) ds.features.push_back(detail::parse_number(fields[j], line));
  }
  if (ds.labels.empty()) throw ParseError("no examples");
  return ds;
}

inline MulticlassDataset load_multiclass_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset '" + path + "'");
  std::string stem = path.substr(path.find_last_of("/\\") + 1);
  if (const auto dot = stem.rfind('.'); dot != std::string::npos && dot > 0) stem.resize(dot);
  return parse_multiclass_csv(in, stem);
}

/// Single pass over a permuted multiclass dataset with 0/1 losses:
/// loss(a) = 1{a != label} (or reward(a) = 1{a == label}). The 0/1 table is
/// also the conditional mean, so f* is exposed.
class DatasetEnv {
 public:
  DatasetEnv(std::shared_ptr<const MulticlassDataset> ds, std::uint64_t seed, std::size_t horizon,
             FeedbackMode mode = FeedbackMode::losses)
      : ds_(std::move(ds)), horizon_(horizon), mode_(mode) {
    if (!ds_ || ds_->size() == 0) throw std::invalid_argument("DatasetEnv: empty dataset");
    if (horizon_ > ds_->size()) throw std::invalid_argument("horizon exceeds dataset");
    order_.resize(ds_->size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    Rng rng(derive_seed(seed, 0x5045524D));
    for (std::size_t i = order_.size(); i > 1; --i) std::swap(order_[i - 1], order_[uniform_index(rng, i)]);
  }

  std::size_t num_actions() const noexcept { return ds_->num_classes; }
  std::size_t horizon() const noexcept { return horizon_; }
  FeedbackMode mode() const noexcept { return mode_; }
  const std::vector<std::size_t>& order() const noexcept { return order_; }
  const MulticlassDataset& dataset() const noexcept { return *ds_; }

  void next(std::size_t t, Rng&, Round& round) const {
    const std::size_t idx = order_[t - 1];
    round.context = Context{idx, ds_->features_of(idx)};
    const std::size_t A = num_actions();
    round.outcomes.assign(A, mode_ == FeedbackMode::losses ? 1.0 : 0.0);
    round.outcomes[ds_->labels[idx]] = mode_ == FeedbackMode::losses ? 0.0 : 1.0;
    round.mean = round.outcomes;
  }

 private:
  std::shared_ptr<const MulticlassDataset> ds_;
  std::vector<std::size_t> order_;
  std::size_t horizon_;
  FeedbackMode mode_;
};

/// Environment over a seeded permutation of the whole dataset (T = n).
inline DatasetEnv bandit_env_from_dataset(std::shared_ptr<const MulticlassDataset> ds, std::uint64_t seed,
                                          FeedbackMode mode = FeedbackMode::losses) {
  const std::size_t n = ds ? ds->size() : 0;
  return DatasetEnv(std::move(ds), seed, n, mode);
}

}  // namespace fastcb
