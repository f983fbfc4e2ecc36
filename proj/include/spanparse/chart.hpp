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

#ifndef SPANPARSE_CHART_HPP_
#define SPANPARSE_CHART_HPP_

// Exact decoding over span score charts: CYK with an implicit null label,
// an exhaustive oracle for small sentences, loss-augmented decoding and the
// structured hinge loss.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spanparse/error.hpp"
#include "spanparse/span_chart.hpp"
#include "spanparse/treebank.hpp"

namespace spanparse {

struct DecodeResult {
  ParseTree tree;
  double score = 0.0;
};

struct HingeLossResult {
  double loss = 0.0;
  SpanScoreChart chart_gradient;
  ParseTree violator;
};

// Sum of chart entries over the labeled spans of `tree`.
inline double tree_score(const SpanScoreChart& chart, const ParseTree& tree) {
  const std::size_t n = num_tokens(tree);
  if (n != chart.n()) {
    throw DataError("tree has " + std::to_string(n) + " tokens but chart covers " +
                    std::to_string(chart.n()));
  }
  double total = 0.0;
  for (const auto& s : labeled_spans(tree)) total += chart.at(s.i, s.j, chart.labels().index(s.label));
  return total;
}

// Hamming distance between two span sets over all fencepost pairs, where a
// pair absent from a tree carries the null label.
inline std::size_t span_hamming(const std::vector<LabeledSpan>& a, const std::vector<LabeledSpan>& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::string> la, lb;
  for (const auto& s : a) la[{s.i, s.j}] = s.label;
  for (const auto& s : b) lb[{s.i, s.j}] = s.label;
  std::size_t cost = 0;
  for (const auto& [pos, label] : la) {
    auto it = lb.find(pos);
    if (it == lb.end() || it->second != label) ++cost;
  }
  for (const auto& [pos, label] : lb) {
    if (la.find(pos) == la.end()) ++cost;
  }
  return cost;
}

namespace detail {

// A binary derivation: label index and split point for every span in it.
struct Derivation {
  std::size_t n = 0;
  std::vector<std::size_t> label;  // indexed by chart span index
  std::vector<std::size_t> split;
};

inline std::vector<std::string> placeholder_words(std::size_t n) {
  std::vector<std::string> w;
  for (std::size_t k = 0; k < n; ++k) w.push_back("w" + std::to_string(k));
  return w;
}

// Expands a derivation into a tree: null-labelled spans dissolve into their
// parent, composite labels become unary chains.
inline std::vector<ParseTree> build_forest(const SpanScoreChart& chart, const Derivation& d,
                                           std::span<const std::string> words, std::size_t i,
                                           std::size_t j) {
  const std::size_t s = chart.span_index(i, j);
  std::vector<ParseTree> inner;
  if (j - i == 1) {
    inner.push_back(ParseTree::preterminal(std::string(kUnkTag), words[i], i));
  } else {
    const std::size_t k = d.split[s];
    inner = build_forest(chart, d, words, i, k);
    auto right = build_forest(chart, d, words, k, j);
    for (auto& t : right) inner.push_back(std::move(t));
  }
  const std::size_t l = d.label[s];
  if (l == LabelSet::kNull) return inner;
  const auto parts = label_components(chart.labels().name(l));
  ParseTree node = ParseTree::internal(parts.back(), std::move(inner));
  for (std::size_t p = parts.size() - 1; p-- > 0;) {
    std::vector<ParseTree> one;
    one.push_back(std::move(node));
    node = ParseTree::internal(parts[p], std::move(one));
  }
  std::vector<ParseTree> out;
  out.push_back(std::move(node));
  return out;
}

inline ParseTree build_tree(const SpanScoreChart& chart, const Derivation& d,
                            std::span<const std::string> words) {
  auto forest = build_forest(chart, d, words, 0, chart.n());
  return std::move(forest.front());
}

// Best label per span on a pinned chart, ties to the smaller index. The
// root span may not take the null label.
inline void best_labels(const SpanScoreChart& pinned, std::vector<std::size_t>& label,
                        std::vector<double>& value) {
  const std::size_t n = pinned.n();
  const std::size_t L = pinned.num_labels();
  label.assign(pinned.num_spans(), LabelSet::kNull);
  value.assign(pinned.num_spans(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j <= n; ++j) {
      const std::size_t s = pinned.span_index(i, j);
      const auto row = pinned.row(i, j);
      const bool root = (i == 0 && j == n);
      std::size_t best = root ? 1 : 0;
      for (std::size_t l = best + 1; l < L; ++l) {
        if (row[l] > row[best]) best = l;
      }
      label[s] = best;
      value[s] = row[best];
    }
  }
}

inline SpanScoreChart pinned_copy(const SpanScoreChart& chart) {
  SpanScoreChart p = chart;
  p.pin_null();
  return p;
}

inline void check_decodable(const SpanScoreChart& chart) {
  if (chart.n() == 0) throw DataError("cannot decode an empty sentence");
  if (chart.num_labels() < 2) throw ModelError("label set has no constituent labels");
}

}  // namespace detail

// Highest-scoring tree under the null-pinned chart. Ties prefer the smaller
// label index, then the smaller split point. O(n^3 + n^2 |labels|).
inline DecodeResult decode(const SpanScoreChart& chart, std::span<const std::string> words = {}) {
  detail::check_decodable(chart);
  const std::size_t n = chart.n();
  std::vector<std::string> placeholder;
  if (words.empty()) {
    placeholder = detail::placeholder_words(n);
    words = placeholder;
  } else if (words.size() != n) {
    throw DataError("word count does not match chart length");
  }
  const SpanScoreChart pinned = detail::pinned_copy(chart);

  detail::Derivation d;
  d.n = n;
  std::vector<double> value;
  detail::best_labels(pinned, d.label, value);
  d.split.assign(pinned.num_spans(), 0);

  std::vector<double> best(pinned.num_spans(), 0.0);
  for (std::size_t len = 1; len <= n; ++len) {
    for (std::size_t i = 0; i + len <= n; ++i) {
      const std::size_t j = i + len;
      const std::size_t s = pinned.span_index(i, j);
      double inside = 0.0;
      if (len > 1) {
        std::size_t arg = i + 1;
        double top = best[pinned.span_index(i, i + 1)] + best[pinned.span_index(i + 1, j)];
        for (std::size_t k = i + 2; k < j; ++k) {
          const double v = best[pinned.span_index(i, k)] + best[pinned.span_index(k, j)];
          if (v > top) {
            top = v;
            arg = k;
          }
        }
        inside = top;
        d.split[s] = arg;
      }
      best[s] = value[s] + inside;
    }
  }

  DecodeResult r;
  r.tree = detail::build_tree(pinned, d, words);
  r.score = tree_score(pinned, r.tree);
  return r;
}

inline constexpr std::size_t kBruteForceMaxLength = 10;

struct BruteForceResult {
  DecodeResult best;
  std::size_t bracketings = 0;  // binary bracketings enumerated
};

namespace detail {

inline void enumerate_bracketings(std::size_t i, std::size_t j,
                                  std::vector<std::vector<std::pair<std::size_t, std::size_t>>>& out) {
  if (j - i == 1) {
    out.push_back({{i, j}});
    return;
  }
  for (std::size_t k = i + 1; k < j; ++k) {
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> left, right;
    enumerate_bracketings(i, k, left);
    enumerate_bracketings(k, j, right);
    for (const auto& a : left) {
      for (const auto& b : right) {
        std::vector<std::pair<std::size_t, std::size_t>> spans;
        spans.reserve(a.size() + b.size() + 1);
        spans.emplace_back(i, j);
        spans.insert(spans.end(), a.begin(), a.end());
        spans.insert(spans.end(), b.begin(), b.end());
        out.push_back(std::move(spans));
      }
    }
  }
}

}  // namespace detail

// Exhaustive search over every binary bracketing (Catalan(n-1) of them),
// each span taking its best label. Testing oracle for decode; n <= 10.
inline BruteForceResult decode_brute_force(const SpanScoreChart& chart,
                                           std::span<const std::string> words = {}) {
  detail::check_decodable(chart);
  const std::size_t n = chart.n();
  if (n > kBruteForceMaxLength) {
    throw UsageError("brute-force decoding limited to n <= " + std::to_string(kBruteForceMaxLength));
  }
  std::vector<std::string> placeholder;
  if (words.empty()) {
    placeholder = detail::placeholder_words(n);
    words = placeholder;
  }
  const SpanScoreChart pinned = detail::pinned_copy(chart);
  std::vector<std::size_t> label;
  std::vector<double> value;
  detail::best_labels(pinned, label, value);

  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> all;
  detail::enumerate_bracketings(0, n, all);

  std::size_t arg = 0;
  double top = 0.0;
  for (std::size_t b = 0; b < all.size(); ++b) {
    double total = 0.0;
    for (const auto& [i, j] : all[b]) total += value[pinned.span_index(i, j)];
    if (b == 0 || total > top) {
      top = total;
      arg = b;
    }
  }

  detail::Derivation d;
  d.n = n;
  d.label = label;
  d.split.assign(pinned.num_spans(), 0);
  // Recover split points: each span's right neighbour in preorder starts its
  // left child, whose end is the split.
  const auto& spans = all[arg];
  std::map<std::pair<std::size_t, std::size_t>, bool> present;
  for (const auto& sp : spans) present[sp] = true;
  for (const auto& [i, j] : spans) {
    if (j - i < 2) continue;
    for (std::size_t k = i + 1; k < j; ++k) {
      if (present.count({i, k}) && present.count({k, j})) {
        d.split[pinned.span_index(i, j)] = k;
        break;
      }
    }
  }
  BruteForceResult r;
  r.bracketings = all.size();
  r.best.tree = detail::build_tree(pinned, d, words);
  r.best.score = tree_score(pinned, r.best.tree);
  return r;
}

// Chart whose decode maximizes s(T) + Hamming(T, gold) - |gold|: labels that
// would add a wrong span gain 1, the gold label loses 1 at gold positions.
inline SpanScoreChart cost_augmented_chart(const SpanScoreChart& chart,
                                           const std::vector<LabeledSpan>& gold_spans) {
  SpanScoreChart aug = detail::pinned_copy(chart);
  std::map<std::pair<std::size_t, std::size_t>, std::optional<std::size_t>> gold;
  for (const auto& s : gold_spans) {
    if (s.j > chart.n()) throw DataError("gold span outside chart");
    gold[{s.i, s.j}] = chart.labels().find(s.label);
  }
  const std::size_t n = chart.n();
  const std::size_t L = chart.num_labels();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j <= n; ++j) {
      auto row = aug.row(i, j);
      auto it = gold.find({i, j});
      for (std::size_t l = 1; l < L; ++l) {
        if (it == gold.end()) {
          row[l] += 1.0;
        } else if (it->second && *it->second == l) {
          row[l] -= 1.0;
        }
      }
    }
  }
  return aug;
}

// argmax_T s(T) + Hamming(T, gold). The returned score is that objective.
inline DecodeResult loss_augmented_decode(const SpanScoreChart& chart,
                                          const std::vector<LabeledSpan>& gold_spans,
                                          std::span<const std::string> words = {}) {
  std::size_t gold_n = 0;
  for (const auto& s : gold_spans) gold_n = std::max(gold_n, s.j);
  if (gold_n != chart.n()) throw DataError("gold spans do not match chart length");
  const SpanScoreChart aug = cost_augmented_chart(chart, gold_spans);
  DecodeResult r = decode(aug, words);
  r.score += static_cast<double>(gold_spans.size());
  return r;
}

// Structured hinge loss max(0, s(v) + Hamming(v, gold) - s(gold)) and its
// gradient with respect to the chart.
inline HingeLossResult hinge_loss(const SpanScoreChart& chart, const ParseTree& gold,
                                  std::span<const std::string> words = {}) {
  const auto gold_spans = labeled_spans(gold);
  std::vector<std::string> gold_words;
  if (words.empty()) {
    gold_words = spanparse::words(gold);
    words = gold_words;
  }
  const SpanScoreChart pinned = detail::pinned_copy(chart);
  const double gold_score = tree_score(pinned, gold);  // also validates labels/length
  DecodeResult v = loss_augmented_decode(pinned, gold_spans, words);
  const auto v_spans = labeled_spans(v.tree);
  const double margin = tree_score(pinned, v.tree) +
                        static_cast<double>(span_hamming(v_spans, gold_spans)) - gold_score;

  HingeLossResult r;
  r.loss = std::max(0.0, margin);
  r.chart_gradient = SpanScoreChart(chart.n(), chart.label_ptr());
  if (r.loss > 0.0) {
    const auto& labels = chart.labels();
    for (const auto& s : v_spans) r.chart_gradient.at(s.i, s.j, labels.index(s.label)) += 1.0;
    for (const auto& s : gold_spans) r.chart_gradient.at(s.i, s.j, labels.index(s.label)) -= 1.0;
  }
  r.violator = std::move(v.tree);
  return r;
}

}  // namespace spanparse

#endif  // SPANPARSE_CHART_HPP_
