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

#include <gtest/gtest.h>

#include <functional>
#include <set>
#include <string>

#include "spanparse/treebank.hpp"
#include "test_support.hpp"

namespace spanparse {
namespace {

const char* kEditedFixture = "(S (EDITED (NP (UNK a))) (NP (UNK a) (UNK b)))";

// Figure-1-shaped sentence: reparandum under EDITED, "uh" under INTJ and
// "i mean" under PRN, then the repair.
const char* kFigureOne =
    "(S (EDITED (NP (NP (UNK the) (UNK first) (UNK kind)) (PP (UNK of) (NP (UNK invasion)))"
    " (UNK of))) (INTJ (UNK uh)) (PRN (S (NP (UNK i)) (VP (UNK mean))))"
    " (NP (NP (UNK the) (UNK first) (UNK type)) (PP (UNK of) (NP (UNK privacy))))"
    " (VP (UNK seemed) (VP (UNK invaded) (PP (UNK to) (NP (UNK me))))))";

TEST(ParseBracketed, MinimalTree) {
  const ParseTree t = parse_bracketed("(S (UNK a))");
  EXPECT_EQ(t.label, "S");
  ASSERT_EQ(t.children.size(), 1u);
  ASSERT_TRUE(t.children[0].is_preterminal());
  EXPECT_EQ(t.children[0].label, "UNK");
  EXPECT_EQ(t.children[0].token->surface, "a");
  EXPECT_EQ(t.children[0].token->index, 0u);
}

TEST(ParseBracketed, EditedFixture) {
  const ParseTree t = parse_bracketed(kEditedFixture);
  EXPECT_EQ(words(t), (std::vector<std::string>{"a", "a", "b"}));
  ASSERT_EQ(t.children.size(), 2u);
  EXPECT_EQ(t.children[0].label, "EDITED");
  EXPECT_EQ(t.children[0].children[0].label, "NP");
  EXPECT_EQ(t.children[1].label, "NP");
  const auto toks = tokens(t);
  for (std::size_t k = 0; k < toks.size(); ++k) EXPECT_EQ(toks[k].index, k);
}

TEST(ParseBracketed, WhitespaceInsensitive) {
  EXPECT_EQ(parse_bracketed("  (S\n\t(UNK   a) )  "), parse_bracketed("(S (UNK a))"));
}

TEST(ParseBracketed, UnbalancedReportsOffset) {
  try {
    parse_bracketed("(S (NP a b)");
    FAIL() << "expected an error";
  } catch (const TreeSyntaxError& e) {
    EXPECT_EQ(e.offset(), 11u);
  }
}

TEST(ParseBracketed, ExtraCloseReportsOffset) {
  try {
    parse_bracketed("(S (UNK a)))");
    FAIL();
  } catch (const TreeSyntaxError& e) {
    EXPECT_EQ(e.offset(), 11u);
  }
}

TEST(ParseBracketed, EmptyConstituent) {
  try {
    parse_bracketed("(S (NP) (UNK a))");
    FAIL();
  } catch (const TreeSyntaxError& e) {
    EXPECT_EQ(e.offset(), 3u);
  }
}

TEST(ParseBracketed, BareTokenAtInternalPosition) {
  try {
    parse_bracketed("(S (NP a b))");
    FAIL();
  } catch (const TreeSyntaxError& e) {
    EXPECT_EQ(e.offset(), 7u);
  }
  try {
    parse_bracketed("(S a (UNK b))");
    FAIL();
  } catch (const TreeSyntaxError& e) {
    EXPECT_EQ(e.offset(), 3u);
  }
}

TEST(ParseBracketed, TreebankWrapperIsUnwrapped) {
  EXPECT_EQ(parse_bracketed("( (S (UNK a)) )"), parse_bracketed("(S (UNK a))"));
}

TEST(Serialize, RoundTripsFixtures) {
  for (const char* text : {"(S (UNK a))", kEditedFixture, kFigureOne}) {
    const ParseTree t = parse_bracketed(text);
    EXPECT_EQ(parse_bracketed(serialize(t)), t);
  }
  EXPECT_EQ(serialize(parse_bracketed("(S (UNK a))")), "(S (UNK a))");
  EXPECT_EQ(serialize(parse_bracketed(kEditedFixture)), kEditedFixture);
}

TEST(Serialize, CompositeLabelVerbatim) {
  const std::string text = "(S+VP (UNK a) (UNK b))";
  EXPECT_EQ(serialize(parse_bracketed(text)), text);
}

TEST(Serialize, RoundTripProperty) {
  Rng rng(7);
  for (int k = 0; k < 500; ++k) {
    const ParseTree t = testing::random_tree(rng, 1 + rng.below(12));
    ASSERT_NO_THROW(validate(t));
    EXPECT_EQ(parse_bracketed(serialize(t)), t);
  }
}

TEST(Normalize, RemovesPartialWordsAndPunctuation) {
  const ParseTree t = parse_bracketed("(S (NP (XX th-) (DT the) (NN dog)) (. .))");
  const auto n = normalize(t);
  ASSERT_TRUE(n.has_value());
  EXPECT_EQ(serialize(*n), "(S (NP (UNK the) (UNK dog)))");
  const auto toks = tokens(*n);
  ASSERT_EQ(toks.size(), 2u);
  EXPECT_EQ(toks[1].index, 1u);
  EXPECT_EQ(toks[1].tag, "UNK");
}

TEST(Normalize, DashSuffixWithOrdinaryTag) {
  const auto n = normalize(parse_bracketed("(S (NN th-) (DT the) (NN dog))"));
  ASSERT_TRUE(n);
  EXPECT_EQ(words(*n), (std::vector<std::string>{"the", "dog"}));
}

TEST(Normalize, CleanTreeOnlyChangesTags) {
  const auto n = normalize(parse_bracketed("(S (NP (DT the) (NN dog)) (VP (VBD ran)))"));
  ASSERT_TRUE(n);
  EXPECT_EQ(serialize(*n), "(S (NP (UNK the) (UNK dog)) (VP (UNK ran)))");
}

TEST(Normalize, OnlyPunctuationSignalsEmpty) {
  EXPECT_FALSE(normalize(parse_bracketed("(S (. .) (, ,))")).has_value());
}

TEST(Normalize, PrunesEmptiedConstituents) {
  const auto n = normalize(parse_bracketed("(S (EDITED (NP (XX wh-))) (NP (NN dog)))"));
  ASSERT_TRUE(n);
  EXPECT_EQ(serialize(*n), "(S (NP (UNK dog)))");
}

TEST(Normalize, ConfigurablePunctuationSet) {
  NormalizeOptions opts;
  opts.punctuation_tags = {"SYM"};
  const auto n = normalize(parse_bracketed("(S (SYM #) (. .) (NN x))"), opts);
  ASSERT_TRUE(n);
  EXPECT_EQ(words(*n), (std::vector<std::string>{".", "x"}));
}

TEST(Normalize, IdempotentProperty) {
  Rng rng(11);
  const std::vector<std::string> tags = {"NN", "XX", ".", ",", "DT"};
  for (int k = 0; k < 300; ++k) {
    ParseTree t = testing::random_tree(rng, 1 + rng.below(10));
    // Scatter tags and dashes over the leaves.
    std::function<void(ParseTree&)> retag = [&](ParseTree& node) {
      if (node.is_preterminal()) {
        node.label = tags[rng.below(tags.size())];
        node.token->tag = node.label;
        if (rng.bernoulli(0.1)) node.token->surface += "-";
        return;
      }
      for (auto& c : node.children) retag(c);
    };
    retag(t);
    const auto once = normalize(t);
    if (!once) continue;
    const auto twice = normalize(*once);
    ASSERT_TRUE(twice);
    EXPECT_EQ(*twice, *once);
  }
}

TEST(LabeledSpans, EditedFixture) {
  const auto spans = labeled_spans(parse_bracketed(kEditedFixture));
  const std::vector<LabeledSpan> expected = {{0, 1, "EDITED+NP"}, {0, 3, "S"}, {1, 3, "NP"}};
  EXPECT_EQ(spans, expected);
}

TEST(LabeledSpans, SingleTokenAndFlat) {
  EXPECT_EQ(labeled_spans(parse_bracketed("(S (UNK a))")), (std::vector<LabeledSpan>{{0, 1, "S"}}));
  EXPECT_EQ(labeled_spans(parse_bracketed("(S (UNK a) (UNK b))")),
            (std::vector<LabeledSpan>{{0, 2, "S"}}));
}

TEST(LabeledSpans, RootChainIsUnique) {
  Rng rng(3);
  for (int k = 0; k < 500; ++k) {
    const std::size_t n = 1 + rng.below(12);
    const ParseTree t = testing::random_tree(rng, n);
    const auto spans = labeled_spans(t);
    std::size_t roots = 0;
    std::set<std::pair<std::size_t, std::size_t>> positions;
    for (const auto& s : spans) {
      ASSERT_LT(s.i, s.j);
      ASSERT_LE(s.j, n);
      roots += (s.i == 0 && s.j == n);
      positions.insert({s.i, s.j});
    }
    EXPECT_EQ(roots, 1u);
    EXPECT_EQ(positions.size(), spans.size());
  }
}

TEST(DisfluencySets, FigureOne) {
  const auto sets = disfluency_sets(parse_bracketed(kFigureOne));
  EXPECT_EQ(sets.edited, (std::set<std::size_t>{0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(sets.intj, (std::set<std::size_t>{6}));
  EXPECT_EQ(sets.prn, (std::set<std::size_t>{7, 8}));
  EXPECT_EQ(sets.eip, (std::set<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8}));
}

TEST(DisfluencySets, FluentTreeIsEmpty) {
  const auto sets = disfluency_sets(parse_bracketed("(S (NP (UNK a)) (VP (UNK b)))"));
  EXPECT_TRUE(sets.edited.empty());
  EXPECT_TRUE(sets.intj.empty());
  EXPECT_TRUE(sets.prn.empty());
  EXPECT_TRUE(sets.eip.empty());
}

TEST(DisfluencySets, NestedEditedCountedOnce) {
  const auto sets =
      disfluency_sets(parse_bracketed("(S (EDITED (EDITED (UNK a)) (UNK a)) (UNK a) (UNK b))"));
  EXPECT_EQ(sets.edited, (std::set<std::size_t>{0, 1}));
}

TEST(DisfluencySets, CompositeLabelComponents) {
  const auto sets = disfluency_sets(parse_bracketed("(S (EDITED+NP (UNK a)) (INTJ+X (UNK uh)) (UNK a))"));
  EXPECT_EQ(sets.edited, (std::set<std::size_t>{0}));
  EXPECT_EQ(sets.intj, (std::set<std::size_t>{1}));
}

TEST(DisfluencySets, EipIsUnionProperty) {
  Rng rng(5);
  for (int k = 0; k < 500; ++k) {
    const auto sets = disfluency_sets(testing::random_tree(rng, 1 + rng.below(12)));
    std::set<std::size_t> u = sets.edited;
    u.insert(sets.intj.begin(), sets.intj.end());
    u.insert(sets.prn.begin(), sets.prn.end());
    EXPECT_EQ(u, sets.eip);
  }
}

TEST(Validate, RejectsBrokenTrees) {
  ParseTree t = parse_bracketed("(S (UNK a) (UNK b))");
  t.children[1].token->index = 5;
  EXPECT_THROW(validate(t), DataError);
  ParseTree empty = ParseTree::internal("S", {});
  EXPECT_THROW(validate(empty), DataError);
}

}  // namespace
}  // namespace spanparse
