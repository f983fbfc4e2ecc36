// Copyright 2026 The spanparse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPANPARSE_SPAN_CHART_HPP_
#define SPANPARSE_SPAN_CHART_HPP_

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spanparse/error.hpp"

namespace spanparse {

// Ordered label inventory. Index 0 is always the null label ("no
// constituent"); the rest are (possibly composite) constituent labels.
class LabelSet {
 public:
  static constexpr std::size_t kNull = 0;
  static constexpr std::string_view kNullName = "<null>";

  LabelSet() : names_{std::string(kNullName)} { index_.emplace(names_[0], 0); }

  // Builds a set from constituent labels; duplicates are dropped and the
  // order is sorted so that equal inventories compare equal.
  explicit LabelSet(std::vector<std::string> labels) : LabelSet() {
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    for (auto& l : labels) {
      if (l.empty() || l == kNullName) continue;
      index_.emplace(l, names_.size());
      names_.push_back(std::move(l));
    }
  }

  // Keeps the given order verbatim (used when loading checkpoints).
  static LabelSet from_ordered(const std::vector<std::string>& names) {
    if (names.empty() || names.front() != kNullName) {
      throw ModelError("label inventory must start with the null label");
    }
    LabelSet s;
    for (std::size_t k = 1; k < names.size(); ++k) {
      if (!s.index_.emplace(names[k], s.names_.size()).second) {
        throw ModelError("duplicate label '" + names[k] + "'");
      }
      s.names_.push_back(names[k]);
    }
    return s;
  }

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t k) const { return names_.at(k); }
  const std::vector<std::string>& names() const { return names_; }

  std::optional<std::size_t> find(std::string_view label) const {
    auto it = index_.find(std::string(label));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index(std::string_view label) const {
    auto k = find(label);
    if (!k) throw ModelError("label '" + std::string(label) + "' not in label set");
    return *k;
  }

  bool operator==(const LabelSet& o) const { return names_ == o.names_; }

 private:
  std::vector<std::string> names_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// Scores s(i,j,l) for 0 <= i < j <= n, stored row-major over the strict
// upper triangle of fenceposts: (0,1) (0,2) .. (0,n) (1,2) .. (n-1,n).
class SpanScoreChart {
 public:
  SpanScoreChart() = default;
  SpanScoreChart(std::size_t n, std::shared_ptr<const LabelSet> labels)
      : n_(n), labels_(std::move(labels)) {
    if (!labels_) throw ModelError("chart needs a label set");
    scores_.assign(num_spans() * labels_->size(), 0.0);
  }

  static std::size_t span_count(std::size_t n) { return n * (n + 1) / 2; }

  std::size_t n() const { return n_; }
  std::size_t num_labels() const { return labels_ ? labels_->size() : 0; }
  std::size_t num_spans() const { return span_count(n_); }
  const LabelSet& labels() const { return *labels_; }
  const std::shared_ptr<const LabelSet>& label_ptr() const { return labels_; }

  std::size_t span_index(std::size_t i, std::size_t j) const {
    if (!(i < j && j <= n_)) {
      throw ModelError("span (" + std::to_string(i) + "," + std::to_string(j) +
                       ") outside chart of length " + std::to_string(n_));
    }
    return i * (2 * n_ - i + 1) / 2 + (j - i - 1);
  }

  double& at(std::size_t i, std::size_t j, std::size_t l) {
    return scores_[span_index(i, j) * num_labels() + l];
  }
  double at(std::size_t i, std::size_t j, std::size_t l) const {
    return scores_[span_index(i, j) * num_labels() + l];
  }

  std::span<double> row(std::size_t i, std::size_t j) {
    return {scores_.data() + span_index(i, j) * num_labels(), num_labels()};
  }
  std::span<const double> row(std::size_t i, std::size_t j) const {
    return {scores_.data() + span_index(i, j) * num_labels(), num_labels()};
  }

  std::vector<double>& scores() { return scores_; }
  const std::vector<double>& scores() const { return scores_; }

  // Subtracts each span's null score from all of its labels.
  void pin_null() {
    const std::size_t L = num_labels();
    for (std::size_t s = 0; s < num_spans(); ++s) {
      const double base = scores_[s * L];
      for (std::size_t l = 0; l < L; ++l) scores_[s * L + l] -= base;
    }
  }

  bool same_shape(const SpanScoreChart& o) const {
    return n_ == o.n_ && labels_ && o.labels_ && *labels_ == *o.labels_;
  }

 private:
  std::size_t n_ = 0;
  std::shared_ptr<const LabelSet> labels_;
  std::vector<double> scores_;
};

}  // namespace spanparse

#endif  // SPANPARSE_SPAN_CHART_HPP_
