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

#ifndef SPANPARSE_TESTS_TEST_SUPPORT_HPP_
#define SPANPARSE_TESTS_TEST_SUPPORT_HPP_

// Random trees and charts shared by the unit and acceptance suites.

#include <memory>
#include <string>
#include <vector>

#include "spanparse/rng.hpp"
#include "spanparse/span_chart.hpp"
#include "spanparse/treebank.hpp"

namespace spanparse::testing {

inline const std::vector<std::string>& random_labels() {
  static const std::vector<std::string> labels = {"S", "NP", "VP", "PP", "EDITED", "INTJ", "PRN"};
  return labels;
}

namespace detail {

inline ParseTree random_subtree(Rng& rng, std::size_t n, std::size_t& next, int depth) {
  const auto& labels = random_labels();
  if (n == 1 && (depth > 3 || rng.bernoulli(0.5))) {
    return ParseTree::preterminal("UNK", "t" + std::to_string(rng.below(5)), next++);
  }
  std::vector<ParseTree> children;
  if (n == 1) {
    children.push_back(random_subtree(rng, 1, next, depth + 1));
  } else if (rng.bernoulli(0.15) && depth < 6) {
    children.push_back(random_subtree(rng, n, next, depth + 1));  // unary chain
  } else {
    std::size_t left = n;
    while (left > 0) {
      const std::size_t take = 1 + rng.below(left);
      const std::size_t piece = (take == n) ? n - 1 : take;
      children.push_back(random_subtree(rng, piece, next, depth + 1));
      left -= piece;
    }
  }
  return ParseTree::internal(labels[rng.below(labels.size())], std::move(children));
}

}  // namespace detail

// Random valid tree over n >= 1 tokens with labels from random_labels().
inline ParseTree random_tree(Rng& rng, std::size_t n) {
  std::size_t next = 0;
  ParseTree t = detail::random_subtree(rng, n, next, 0);
  if (t.is_preterminal()) t = ParseTree::internal("S", {std::move(t)});
  renumber_tokens(t);
  return t;
}

inline std::shared_ptr<const LabelSet> make_labels(std::size_t constituent_labels) {
  std::vector<std::string> names;
  for (std::size_t k = 0; k < constituent_labels; ++k) names.push_back("L" + std::to_string(k));
  return std::make_shared<const LabelSet>(names);
}

// Chart with Uniform(lo, hi) scores on constituent labels and the null
// label pinned at zero.
inline SpanScoreChart random_chart(Rng& rng, std::size_t n, std::shared_ptr<const LabelSet> labels,
                                   double lo = -5.0, double hi = 5.0) {
  SpanScoreChart c(n, std::move(labels));
  for (std::size_t s = 0; s < c.num_spans(); ++s) {
    for (std::size_t l = 1; l < c.num_labels(); ++l) {
      c.scores()[s * c.num_labels() + l] = rng.uniform(lo, hi);
    }
  }
  return c;
}

}  // namespace spanparse::testing

#endif  // SPANPARSE_TESTS_TEST_SUPPORT_HPP_
