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

#include <string>
#include <vector>

#include "gradient_oracle.hpp"
#include "spanparse/chart.hpp"
#include "spanparse/model.hpp"

namespace spanparse {
namespace {

EncoderConfig small_config() {
  EncoderConfig c;
  c.d_model = 16;
  c.n_layers = 2;
  c.n_heads = 4;
  c.d_ff = 24;
  c.d_span = 12;
  c.seed = 5;
  return c;
}

Vocabulary small_vocab() { return Vocabulary({"i", "you", "can", "call", "uh", "the", "dog"}); }
LabelSet small_labels() { return LabelSet({"S", "NP", "VP", "EDITED", "EDITED+NP"}); }

bool same_weights(const Weights<float>& a, const Weights<float>& b) {
  const auto x = a.named_tensors();
  const auto y = b.named_tensors();
  if (x.size() != y.size()) return false;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k].first != y[k].first || *x[k].second != *y[k].second) return false;
  }
  return true;
}

TEST(InitParams, DeterministicGivenSeed) {
  const auto a = init_params<float>(small_config(), small_vocab(), small_labels());
  const auto b = init_params<float>(small_config(), small_vocab(), small_labels());
  EXPECT_TRUE(same_weights(a.weights, b.weights));
  auto other = small_config();
  other.seed = 6;
  EXPECT_FALSE(same_weights(a.weights, init_params<float>(other, small_vocab(), small_labels()).weights));
}

TEST(InitParams, RejectsBadConfig) {
  auto cfg = small_config();
  cfg.d_model = 64;
  cfg.n_heads = 5;
  EXPECT_THROW(init_params<float>(cfg, small_vocab(), small_labels()), ModelError);
  EXPECT_THROW(init_params<float>(small_config(), Vocabulary(), small_labels()), ModelError);
  cfg = small_config();
  cfg.d_span = 0;
  EXPECT_THROW(init_params<float>(cfg, small_vocab(), small_labels()), ModelError);
}

TEST(InitParams, ShapesFollowConfig) {
  const auto p = init_params<float>(small_config(), small_vocab(), small_labels());
  EXPECT_EQ(p.weights.embedding.rows(), 8);
  EXPECT_EQ(p.weights.embedding.cols(), 16);
  EXPECT_EQ(p.weights.layers.size(), 2u);
  EXPECT_EQ(p.weights.span_w2.cols(), 6);
  EXPECT_EQ(p.labels->name(0), LabelSet::kNullName);
}

TEST(Encode, FencepostShapeAndDeterminism) {
  const auto p = init_params<float>(small_config(), small_vocab(), small_labels());
  const std::vector<std::string> one = {"you"};
  const auto r1 = encode(p, one);
  EXPECT_EQ(r1.fenceposts.rows(), 2);
  EXPECT_EQ(r1.length(), 1u);
  const std::vector<std::string> s = {"you", "you", "can", "call"};
  EXPECT_EQ(encode(p, s).fenceposts, encode(p, s).fenceposts);
  EXPECT_EQ(encode(p, s).fenceposts.rows(), 5);
}

TEST(Encode, FencepostEdgesArePadded) {
  const auto p = init_params<float>(small_config(), small_vocab(), small_labels());
  const std::vector<std::string> s = {"the", "dog"};
  const auto r = encode(p, s);
  // y_0 has no forward half, y_n has no backward half.
  EXPECT_TRUE(r.fenceposts.row(0).leftCols(8).isZero(0));
  EXPECT_TRUE(r.fenceposts.row(2).rightCols(8).isZero(0));
}

TEST(Encode, AttentionRowsSumToOne) {
  const auto p = init_params<double>(small_config(), small_vocab(), small_labels());
  ForwardCache<double> c;
  const std::vector<std::string> s = {"i", "uh", "i", "can", "call", "the", "dog"};
  encode_ids(p, lookup_ids(p, s), nullptr, ForwardOptions{}, c);
  for (const auto& layer : c.layers) {
    for (const auto& a : layer.attention) {
      for (Eigen::Index r = 0; r < a.rows(); ++r) EXPECT_NEAR(a.row(r).sum(), 1.0, 1e-6);
    }
  }
}

TEST(Encode, ExternalVectorLengthMismatch) {
  auto cfg = small_config();
  cfg.d_external = 3;
  const auto p = init_params<float>(cfg, small_vocab(), small_labels());
  const std::vector<std::string> s = {"i", "can"};
  Mat<float> ext = Mat<float>::Ones(3, 3);
  EXPECT_THROW(encode(p, s, &ext), DataError);
  Mat<float> good = Mat<float>::Ones(2, 3);
  const auto with = encode(p, s, &good);
  const auto without = encode(p, s);
  EXPECT_NE(with.fenceposts, without.fenceposts);
}

TEST(SpanVector, SubtractsFenceposts) {
  SequenceRepr<double> r{Mat<double>(3, 2)};
  r.fenceposts << 1, 2, 1, 2, 5, 7;
  EXPECT_TRUE(span_vector(r, 0, 1).isZero(0));
  const Vec<double> full = span_vector(r, 0, 2);
  EXPECT_EQ(full(0), 4);
  EXPECT_EQ(full(1), 5);
  EXPECT_THROW(span_vector(r, 1, 1), ModelError);
  EXPECT_THROW(span_vector(r, 0, 3), ModelError);
}

TEST(ScoreSpans, NullPinnedShapeAndDeterministic) {
  const auto p = init_params<float>(small_config(), small_vocab(), small_labels());
  const std::vector<std::string> s = {"you", "you", "can", "call"};
  const auto chart = score_spans(p, s);
  EXPECT_EQ(chart.num_spans(), 10u);
  EXPECT_EQ(chart.scores().size(), 10u * 6u);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j <= 4; ++j) EXPECT_EQ(chart.at(i, j, LabelSet::kNull), 0.0);
  }
  EXPECT_EQ(chart.scores(), score_spans(p, s).scores());
}

TEST(ScoreSpans, SpanClassifierMatchesSpanVector) {
  // Scores computed through the fencepost-projection shortcut must equal
  // the classifier applied to span_vector directly.
  const auto p = init_params<double>(small_config(), small_vocab(), small_labels());
  const std::vector<std::string> s = {"i", "can", "call", "the", "dog"};
  const auto chart = score_spans(p, s);
  const auto repr = encode(p, s);
  const auto& w = p.weights;
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = i + 1; j <= 5; ++j) {
      const Vec<double> v = span_vector(repr, i, j);
      const Mat<double> hidden = ((v.transpose() * w.span_w1) + w.span_b1).cwiseMax(0.0);
      const Mat<double> out = hidden * w.span_w2 + w.span_b2;
      for (std::size_t l = 0; l < chart.num_labels(); ++l) {
        EXPECT_NEAR(chart.at(i, j, l), out(0, static_cast<Eigen::Index>(l)) - out(0, 0), 1e-10);
      }
    }
  }
}

TEST(Backward, ZeroGradientInZeroOut) {
  const auto p = init_params<double>(small_config(), small_vocab(), small_labels());
  const std::vector<std::string> s = {"i", "can", "call"};
  const SpanScoreChart g(3, p.labels);
  const auto grad = backward(p, s, g);
  for (const auto& [name, m] : grad.named_tensors()) EXPECT_TRUE(m->isZero(0)) << name;
}

TEST(Backward, ShapeMismatch) {
  const auto p = init_params<double>(small_config(), small_vocab(), small_labels());
  const std::vector<std::string> s = {"i", "can", "call"};
  EXPECT_THROW(backward(p, s, SpanScoreChart(2, p.labels)), ModelError);
}

TEST(Backward, LinearInChartGradient) {
  Rng rng(8);
  const auto p = init_params<double>(small_config(), small_vocab(), small_labels());
  const std::vector<std::string> s = {"you", "you", "can", "call", "dog"};
  SpanScoreChart g1(5, p.labels), g2(5, p.labels), sum(5, p.labels);
  for (std::size_t k = 0; k < g1.scores().size(); ++k) {
    g1.scores()[k] = rng.uniform(-1, 1);
    g2.scores()[k] = rng.uniform(-1, 1);
    sum.scores()[k] = g1.scores()[k] + g2.scores()[k];
  }
  auto a = backward(p, s, g1);
  a += backward(p, s, g2);
  const auto b = backward(p, s, sum);
  const auto x = a.named_tensors();
  const auto y = b.named_tensors();
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k].second->size() == 0) continue;
    EXPECT_LT((*x[k].second - *y[k].second).cwiseAbs().maxCoeff(), 1e-8) << x[k].first;
  }
}

TEST(Backward, MatchesCentralDifferences) {
  Rng rng(2024);
  for (int k = 0; k < 10; ++k) {
    auto inst = testing::random_gradient_instance(rng);
    const auto check = testing::check_gradient(inst, rng, 50);
    EXPECT_EQ(check.checked, 50u);
    EXPECT_LT(check.max_relative_error, 1e-4) << "instance " << k;
  }
}

TEST(Backward, DropoutMasksAreDifferentiatedThrough) {
  // With a fixed dropout mask the forward is a fixed function; compare the
  // cached backward against differences taken under the same mask.
  auto p = init_params<double>(small_config(), small_vocab(), small_labels());
  const std::vector<std::string> s = {"i", "can", "call", "the"};
  const auto ids = lookup_ids(p, s);
  Rng mask_rng(3);
  ForwardOptions opts{0.2, &mask_rng};
  ForwardCache<double> c;
  const Mat<double> scores = forward_scores(p, ids, nullptr, opts, c);
  Mat<double> weights = Mat<double>::Ones(scores.rows(), scores.cols());
  Weights<double> g = p.weights.zeros_like();
  backward_cached(p, c, weights, g);

  auto replay = [&](ModelParams<double>& q) {
    Rng r(3);
    ForwardOptions o{0.2, &r};
    ForwardCache<double> cc;
    return forward_scores(q, ids, nullptr, o, cc).cwiseProduct(weights).sum();
  };
  const double h = 1e-5;
  auto& w = p.weights.layers[1].ff_w2;
  for (int k = 0; k < 5; ++k) {
    const Eigen::Index r = k, col = 2 * k;
    const double saved = w(r, col);
    w(r, col) = saved + h;
    const double up = replay(p);
    w(r, col) = saved - h;
    const double down = replay(p);
    w(r, col) = saved;
    EXPECT_NEAR((up - down) / (2 * h), g.layers[1].ff_w2(r, col), 1e-5);
  }
}

TEST(ScoreSpans, TreeScoreAdditive) {
  const auto p = init_params<double>(small_config(), small_vocab(), small_labels());
  const std::vector<std::string> s = {"you", "you", "can", "call"};
  const auto chart = score_spans(p, s);
  const ParseTree t = parse_bracketed("(S (EDITED+NP (UNK you)) (NP (UNK you)) (VP (UNK can) (UNK call)))");
  double manual = 0.0;
  for (const auto& sp : labeled_spans(t)) manual += chart.at(sp.i, sp.j, p.labels->index(sp.label));
  EXPECT_EQ(tree_score(chart, t), manual);
}

}  // namespace
}  // namespace spanparse
