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

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "corpus_support.hpp"
#include "spanparse/checkpoint.hpp"
#include "spanparse/pipeline.hpp"
#include "test_support.hpp"

namespace spanparse {
namespace {

using testing::synthetic_corpus;
using testing::tiny_config;

std::size_t silver_count(const std::vector<BatchItem>& b) {
  return static_cast<std::size_t>(
      std::count_if(b.begin(), b.end(), [](const BatchItem& i) { return i.provenance == Provenance::kSilver; }));
}

TEST(BatchSampler, FortyPercentMixIsTwelveSilver) {
  const auto gold = synthetic_corpus(100, 1);
  const auto silver = synthetic_corpus(70, 2, Provenance::kSilver);
  BatchSampler s(gold, silver, 30, 0.4, 7);
  EXPECT_EQ(s.silver_per_batch(), 12u);
  EXPECT_EQ(s.gold_per_batch(), 18u);
  for (int k = 0; k < 1000; ++k) {
    const auto b = s.make_batch();
    ASSERT_EQ(b.size(), 30u);
    ASSERT_EQ(silver_count(b), 12u);
    for (std::size_t i = 0; i < b.size(); ++i) {
      const Corpus& src = b[i].provenance == Provenance::kGold ? gold : silver;
      ASSERT_GE(b[i].entry, &src.entries.front());
      ASSERT_LE(b[i].entry, &src.entries.back());
    }
  }
}

TEST(BatchSampler, DegenerateProportions) {
  const auto gold = synthetic_corpus(40, 1);
  const auto silver = synthetic_corpus(40, 2, Provenance::kSilver);
  BatchSampler none(gold, silver, 30, 0.0, 1);
  BatchSampler all(gold, silver, 30, 1.0, 1);
  for (int k = 0; k < 50; ++k) {
    EXPECT_EQ(silver_count(none.make_batch()), 0u);
    EXPECT_EQ(silver_count(all.make_batch()), 30u);
  }
  EXPECT_EQ(none.steps_per_epoch(), 2u);
  EXPECT_EQ(all.steps_per_epoch(), 2u);
  const Corpus empty;
  EXPECT_THROW(BatchSampler(gold, empty, 30, 0.4, 1), DataError);
  EXPECT_NO_THROW(BatchSampler(gold, empty, 30, 0.0, 1));
  EXPECT_THROW(BatchSampler(gold, silver, 0, 0.0, 1), UsageError);
  EXPECT_THROW(BatchSampler(gold, silver, 30, 1.5, 1), UsageError);
}

TEST(BatchSampler, GoldEpochCoversEachEntryOnce) {
  const auto gold = synthetic_corpus(95, 3);
  const Corpus empty;
  BatchSampler s(gold, empty, 30, 0.0, 11);
  std::vector<const CorpusEntry*> seen;
  while (seen.size() < 2 * gold.size()) {
    for (const auto& item : s.make_batch()) seen.push_back(item.entry);
  }
  for (std::size_t pass = 0; pass < 2; ++pass) {
    std::set<const CorpusEntry*> distinct(seen.begin() + static_cast<std::ptrdiff_t>(pass * gold.size()),
                                          seen.begin() + static_cast<std::ptrdiff_t>((pass + 1) * gold.size()));
    EXPECT_EQ(distinct.size(), gold.size());
  }
  EXPECT_NE(std::vector<const CorpusEntry*>(seen.begin(), seen.begin() + 95),
            std::vector<const CorpusEntry*>(seen.begin() + 95, seen.begin() + 190));
}

TEST(BatchSampler, SilverCyclesIndependently) {
  const auto gold = synthetic_corpus(500, 3);
  const auto silver = synthetic_corpus(25, 4, Provenance::kSilver);
  BatchSampler s(gold, silver, 30, 0.4, 5);
  std::vector<const CorpusEntry*> seen;
  for (int k = 0; k < 5; ++k) {
    for (const auto& item : s.make_batch()) {
      if (item.provenance == Provenance::kSilver) seen.push_back(item.entry);
    }
  }
  ASSERT_EQ(seen.size(), 60u);
  EXPECT_EQ(std::set<const CorpusEntry*>(seen.begin(), seen.begin() + 25).size(), 25u);
  EXPECT_EQ(std::set<const CorpusEntry*>(seen.begin() + 25, seen.begin() + 50).size(), 25u);
}

TEST(BatchSampler, Deterministic) {
  const auto gold = synthetic_corpus(50, 1);
  const auto silver = synthetic_corpus(50, 2, Provenance::kSilver);
  BatchSampler a(gold, silver, 30, 0.4, 9), b(gold, silver, 30, 0.4, 9);
  for (int k = 0; k < 20; ++k) {
    const auto x = a.make_batch(), y = b.make_batch();
    for (std::size_t i = 0; i < x.size(); ++i) ASSERT_EQ(x[i].entry, y[i].entry);
  }
}

TEST(Train, ToyCorpusLossDecreases) {
  const auto gold = synthetic_corpus(50, 21);
  const auto r = train(gold, nullptr, nullptr, tiny_config(20));
  ASSERT_EQ(r.history.size(), 20u);
  EXPECT_LT(r.history.back().train_loss, r.history.front().train_loss);
  EXPECT_EQ(r.best_epoch, 20u);
}

TEST(Train, SameSeedSameCheckpointBytes) {
  const auto gold = synthetic_corpus(40, 5);
  const auto dev = synthetic_corpus(15, 6);
  auto cfg = tiny_config(2);
  const auto a = train(gold, nullptr, &dev, cfg);
  const auto b = train(gold, nullptr, &dev, cfg);
  EXPECT_EQ(checkpoint_bytes(a.params), checkpoint_bytes(b.params));
  cfg.seed = 2;
  const auto c = train(gold, nullptr, &dev, cfg);
  EXPECT_NE(checkpoint_bytes(a.params), checkpoint_bytes(c.params));
}

TEST(Train, WorkerCountDoesNotChangeResult) {
  const auto gold = synthetic_corpus(40, 5);
  auto cfg = tiny_config(2);
  const auto a = train(gold, nullptr, nullptr, cfg);
  cfg.workers = 3;
  const auto b = train(gold, nullptr, nullptr, cfg);
  EXPECT_EQ(checkpoint_bytes(a.params), checkpoint_bytes(b.params));
}

TEST(Train, ZeroProportionIgnoresSilver) {
  const auto gold = synthetic_corpus(40, 5);
  const auto silver = synthetic_corpus(40, 8, Provenance::kSilver);
  const auto dev = synthetic_corpus(10, 6);
  const auto cfg = tiny_config(2);
  const auto a = train(gold, nullptr, &dev, cfg);
  const auto b = train(gold, &silver, &dev, cfg);
  EXPECT_EQ(checkpoint_bytes(a.params), checkpoint_bytes(b.params));
}

TEST(Train, DevSelectionAndCallbacks) {
  const auto gold = synthetic_corpus(40, 5);
  const auto dev = synthetic_corpus(15, 6);
  auto cfg = tiny_config(4);
  cfg.checkpoint_every = 2;
  std::vector<std::size_t> epochs, checkpoints;
  TrainCallbacks cb;
  cb.on_epoch = [&](const EpochRecord& r) { epochs.push_back(r.epoch); };
  cb.on_checkpoint = [&](const EpochRecord& r, const ModelParams<float>&) { checkpoints.push_back(r.epoch); };
  const auto r = train(gold, nullptr, &dev, cfg, cb);
  EXPECT_EQ(epochs, (std::vector<std::size_t>{1, 2, 3, 4}));
  EXPECT_EQ(checkpoints, (std::vector<std::size_t>{2, 4}));
  std::pair<double, double> best{-1, -1};
  std::size_t best_epoch = 0;
  for (const auto& h : r.history) {
    ASSERT_TRUE(h.dev.has_value());
    if (selection_key(*h.dev) > best) {
      best = selection_key(*h.dev);
      best_epoch = h.epoch;
    }
  }
  EXPECT_EQ(r.best_epoch, best_epoch);
  EXPECT_EQ(selection_key(evaluate_params(r.params, dev)), best);
}

TEST(Train, DivergenceIsReported) {
  const auto gold = synthetic_corpus(30, 5);
  auto cfg = tiny_config(3);
  cfg.optimizer.learning_rate = 1e38;
  cfg.optimizer.warmup_steps = 0;
  cfg.optimizer.clip_norm = 0;
  EXPECT_THROW(train(gold, nullptr, nullptr, cfg), ModelError);
}

TEST(Train, ConfigValidation) {
  const auto gold = synthetic_corpus(10, 5);
  auto cfg = tiny_config(1);
  cfg.silver_proportion = -0.1;
  EXPECT_THROW(train(gold, nullptr, nullptr, cfg), UsageError);
  cfg = tiny_config(1);
  cfg.encoder.n_heads = 3;
  EXPECT_THROW(train(gold, nullptr, nullptr, cfg), ModelError);
}

class TrainedModel : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    gold_ = new Corpus(synthetic_corpus(60, 31));
    params_ = new ModelParams<float>(train(*gold_, nullptr, nullptr, tiny_config(3)).params);
  }
  static void TearDownTestSuite() {
    delete gold_;
    delete params_;
  }
  static Corpus* gold_;
  static ModelParams<float>* params_;
};

Corpus* TrainedModel::gold_ = nullptr;
ModelParams<float>* TrainedModel::params_ = nullptr;

TEST_F(TrainedModel, ParseCorpusContract) {
  auto sentences = sentences_of(synthetic_corpus(30, 41));
  sentences.insert(sentences.begin() + 3, std::vector<std::string>{});
  sentences.push_back({"never", "seen", "words"});
  ParseStats stats;
  const auto silver = parse_corpus(*params_, sentences, 1, &stats);
  EXPECT_EQ(stats.skipped_empty, 1u);
  EXPECT_EQ(stats.parsed, 31u);
  EXPECT_EQ(silver.provenance, Provenance::kSilver);
  ASSERT_EQ(silver.size(), 31u);
  for (const auto& e : silver.entries) {
    EXPECT_NO_THROW(validate(e.tree));
    EXPECT_EQ(words(e.tree), e.sentence);
  }
  const auto again = parse_corpus(*params_, sentences, 2);
  for (std::size_t k = 0; k < silver.size(); ++k) EXPECT_EQ(silver.entries[k].tree, again.entries[k].tree);
  const auto t = trees_of(silver);
  const auto report = evaluate(t, t);
  EXPECT_EQ(report.s.fscore, 1.0);
  EXPECT_EQ(report.s.precision, 1.0);
  EXPECT_EQ(report.s.recall, 1.0);
}

TEST_F(TrainedModel, EnsembleReductions) {
  const auto sentences = sentences_of(synthetic_corpus(40, 51));
  const ModelParams<float>* one[] = {params_};
  const ModelParams<float>* four[] = {params_, params_, params_, params_};
  for (const auto& s : sentences) {
    const auto single = parse_sentence(*params_, s);
    EXPECT_EQ(ensemble_decode(one, s), single);
    EXPECT_EQ(ensemble_decode(four, s), single);
    EXPECT_EQ(ensemble_chart(four, s).scores(), score_spans(*params_, s).scores());
  }
}

TEST(Ensemble, HandComputedMean) {
  auto labels = testing::make_labels(2);
  std::vector<SpanScoreChart> charts;
  for (double v : {1.0, 2.0, 3.0, 4.0}) {
    SpanScoreChart c(2, labels);
    c.at(0, 2, 1) = v;
    c.at(1, 2, 2) = -v;
    charts.push_back(c);
  }
  const auto m = average_charts(charts);
  EXPECT_EQ(m.at(0, 2, 1), 2.5);
  EXPECT_EQ(m.at(1, 2, 2), -2.5);
  EXPECT_EQ(m.at(0, 1, 1), 0.0);
}

TEST(Ensemble, MatchesElementwiseMeanAndIsOrderInvariant) {
  Rng rng(8);
  auto labels = testing::make_labels(3);
  std::vector<SpanScoreChart> charts;
  for (int k = 0; k < 5; ++k) charts.push_back(testing::random_chart(rng, 6, labels));
  const auto m = average_charts(charts);
  auto reversed = charts;
  std::reverse(reversed.begin(), reversed.end());
  const auto r = average_charts(reversed);
  for (std::size_t k = 0; k < m.scores().size(); ++k) {
    // Pairwise order: ((c0 + c1) + (c2 + (c3 + c4))) / 5.
    const double expected = ((charts[0].scores()[k] + charts[1].scores()[k]) +
                             (charts[2].scores()[k] + (charts[3].scores()[k] + charts[4].scores()[k]))) /
                            5.0;
    EXPECT_EQ(m.scores()[k], expected);
    EXPECT_NEAR(r.scores()[k], m.scores()[k], 1e-12);
  }
}

TEST(Ensemble, LabelSetMismatch) {
  auto a = testing::make_labels(2);
  auto b = testing::make_labels(3);
  std::vector<SpanScoreChart> charts{SpanScoreChart(2, a), SpanScoreChart(2, b)};
  EXPECT_THROW(average_charts(charts), ModelError);
  EXPECT_THROW(average_charts(std::span<const SpanScoreChart>{}), UsageError);
  const auto gold1 = synthetic_corpus(20, 1);
  const auto gold2 = parse_bracketed("(S (NP (UNK a)) (VP (UNK b)))");
  Corpus other;
  other.entries.push_back({words(gold2), gold2});
  const auto p1 = train(gold1, nullptr, nullptr, tiny_config(1)).params;
  const auto p2 = train(other, nullptr, nullptr, tiny_config(1)).params;
  const ModelParams<float>* members[] = {&p1, &p2};
  const std::vector<std::string> s{"a", "b"};
  EXPECT_THROW(ensemble_chart(members, s), ModelError);
}

TEST(Ensemble, MemberSelection) {
  const auto gold = synthetic_corpus(40, 61);
  const auto dev = synthetic_corpus(15, 62);
  std::vector<ModelParams<float>> models;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    auto cfg = tiny_config(2);
    cfg.seed = seed;
    models.push_back(train(gold, nullptr, nullptr, cfg).params);
  }
  std::vector<const ModelParams<float>*> members;
  for (const auto& m : models) members.push_back(&m);
  EXPECT_EQ(select_members(members, dev, 2, EnsembleSelection::kNone).size(), 4u);
  const auto first = select_members(members, dev, 2, EnsembleSelection::kMembersFirst);
  ASSERT_EQ(first.size(), 2u);
  std::vector<std::pair<double, double>> individual;
  for (const auto* m : members) individual.push_back(selection_key(evaluate_params(*m, dev)));
  for (std::size_t k = 0; k < 4; ++k) {
    if (std::find(first.begin(), first.end(), k) != first.end()) continue;
    for (auto chosen : first) EXPECT_GE(individual[chosen], individual[k]);
  }
  const auto subset = select_members(members, dev, 2, EnsembleSelection::kEnsembleFirst);
  ASSERT_EQ(subset.size(), 2u);
  auto subset_key = [&](std::vector<std::size_t> idx) {
    std::vector<const ModelParams<float>*> ms;
    for (auto i : idx) ms.push_back(members[i]);
    return selection_key(evaluate(trees_of(dev), ensemble_parse_all(ms, sentences_of(dev))));
  };
  const auto best = subset_key(subset);
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = a + 1; b < 4; ++b) EXPECT_GE(best, subset_key({a, b}));
  }
  EXPECT_THROW(select_members(members, dev, 5, EnsembleSelection::kMembersFirst), UsageError);
}

TEST(MultiSeed, MeansAreExactAverages) {
  const auto g = synthetic_corpus(20, 1);
  Rng rng(3);
  const auto& labels = testing::random_labels();
  std::vector<std::vector<ParseTree>> preds;
  for (int s = 0; s < 3; ++s) {
    std::vector<ParseTree> p;
    for (const auto& e : g.entries) {
      ParseTree t = e.tree;
      if (rng.bernoulli(0.5)) t = testing::random_tree(rng, num_tokens(t));
      p.push_back(t);
    }
    preds.push_back(p);
  }
  const auto gold = trees_of(g);
  const auto r = multi_seed(10, 3, [&](std::uint64_t seed) { return evaluate(gold, preds[seed - 10]); });
  EXPECT_EQ(r.seeds, (std::vector<std::uint64_t>{10, 11, 12}));
  ASSERT_EQ(r.per_seed.size(), 3u);
  for (std::size_t c = 0; c < r.mean.size(); ++c) {
    double f = 0;
    for (const auto& rep : r.per_seed) f += rep.records()[c]->fscore;
    EXPECT_EQ(r.mean[c].fscore, f / 3.0);
  }
  const auto one = multi_seed(10, 1, [&](std::uint64_t) { return evaluate(gold, preds[0]); });
  EXPECT_EQ(one.mean[0].fscore, one.per_seed[0].s.fscore);
  EXPECT_EQ(one.mean[3].recall, one.per_seed[0].w_e.recall);
  EXPECT_THROW(multi_seed(1, 0, [&](std::uint64_t) { return evaluate(gold, gold); }), UsageError);
}

TEST(SelfTrain, ProducesSilverAndFreshModel) {
  const auto gold = synthetic_corpus(40, 71);
  const auto dev = synthetic_corpus(10, 72);
  const auto unlabeled = sentences_of(synthetic_corpus(30, 73));
  auto st = tiny_config(2);
  st.silver_proportion = 0.4;
  const auto r = self_train(gold, unlabeled, &dev, tiny_config(2), st);
  EXPECT_EQ(r.silver.size(), 30u);
  EXPECT_EQ(r.parse_stats.parsed, 30u);
  for (const auto& e : r.silver.entries) EXPECT_NO_THROW(validate(e.tree));
  EXPECT_EQ(r.self_trained.history.size(), 2u);
  // p = 0 reduces to plain training on gold.
  auto st0 = tiny_config(2);
  const auto r0 = self_train(gold, unlabeled, &dev, tiny_config(2), st0);
  EXPECT_EQ(checkpoint_bytes(r0.self_trained.params), checkpoint_bytes(r0.baseline.params));
}

TEST(ExternalVectors, ParseFormat) {
  std::istringstream in("0.5 1\n-2 3e-1\n\n\n4 5\n");
  const auto v = parse_external_vectors(in);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0].rows(), 2);
  EXPECT_EQ(v[0].cols(), 2);
  EXPECT_FLOAT_EQ(v[0](1, 1), 0.3f);
  EXPECT_EQ(v[1].rows(), 0);
  EXPECT_EQ(v[2].rows(), 1);
  EXPECT_FLOAT_EQ(v[2](0, 0), 4.0f);
  std::istringstream ragged("1 2\n3\n");
  EXPECT_THROW(parse_external_vectors(ragged), DataError);
  std::istringstream junk("1 x\n");
  EXPECT_THROW(parse_external_vectors(junk), DataError);
}

ExternalVectors random_externals(const Corpus& c, std::size_t width, std::uint64_t seed) {
  Rng rng(seed);
  ExternalVectors out;
  for (const auto& e : c.entries) {
    Mat<float> m(static_cast<Eigen::Index>(e.sentence.size()), static_cast<Eigen::Index>(width));
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = static_cast<float>(rng.uniform() - 0.5);
    out.push_back(std::move(m));
  }
  return out;
}

TEST(ExternalVectors, TrainingUsesThemAndChecksShapes) {
  const auto gold = synthetic_corpus(30, 81);
  const auto dev = synthetic_corpus(8, 82);
  auto cfg = tiny_config(1);
  const auto ext_a = random_externals(gold, 4, 1);
  const auto narrow = random_externals(gold, 3, 1);
  EXPECT_THROW(train(gold, nullptr, nullptr, cfg, {}, {&ext_a}), UsageError);
  cfg.encoder.d_external = 4;
  EXPECT_THROW(train(gold, nullptr, nullptr, cfg), UsageError);
  EXPECT_THROW(train(gold, nullptr, nullptr, cfg, {}, {&narrow}), DataError);
  const auto ext_b = random_externals(gold, 4, 2);
  const auto dev_ext = random_externals(dev, 4, 3);
  const auto a = train(gold, nullptr, &dev, cfg, {}, {&ext_a, nullptr, &dev_ext});
  const auto b = train(gold, nullptr, &dev, cfg, {}, {&ext_b, nullptr, &dev_ext});
  EXPECT_NE(checkpoint_bytes(a.params), checkpoint_bytes(b.params));
  EXPECT_EQ(a.params.weights.ext_proj.rows(), 4);
  const auto trees = parse_all(a.params, sentences_of(dev), 1, &dev_ext);
  EXPECT_EQ(trees.size(), dev.size());
  ExternalVectors short_ext(dev_ext.begin(), dev_ext.end() - 1);
  EXPECT_THROW(parse_all(a.params, sentences_of(dev), 1, &short_ext), DataError);
}

}  // namespace
}  // namespace spanparse
