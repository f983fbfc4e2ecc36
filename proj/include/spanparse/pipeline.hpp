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

#ifndef SPANPARSE_PIPELINE_HPP_
#define SPANPARSE_PIPELINE_HPP_

// Training with gold/silver mini-batch mixing, corpus parsing, self-training,
// the multi-seed protocol, and ensembling by span-score averaging.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "spanparse/chart.hpp"
#include "spanparse/error.hpp"
#include "spanparse/eval.hpp"
#include "spanparse/model.hpp"
#include "spanparse/optimizer.hpp"
#include "spanparse/rng.hpp"
#include "spanparse/treebank.hpp"

namespace spanparse {

inline std::size_t default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

struct TrainConfig {
  EncoderConfig encoder;
  OptimizerConfig optimizer;
  std::size_t batch_size = 30;
  std::size_t epochs = 100;
  double silver_proportion = 0.0;
  std::uint64_t seed = 1;
  double dropout = 0.1;
  double oov_prob = 0.3;  // singleton words replaced by <unk> during training
  std::size_t eval_every = 1;        // epochs between dev evaluations
  std::size_t checkpoint_every = 0;  // epochs between checkpoint callbacks, 0 = never
  std::size_t workers = 1;

  void validate() const {
    encoder.validate();
    if (batch_size == 0) throw UsageError("batch_size must be >= 1");
    if (epochs == 0) throw UsageError("epochs must be >= 1");
    if (!(silver_proportion >= 0 && silver_proportion <= 1)) throw UsageError("p must be in [0,1]");
    if (!(dropout >= 0 && dropout < 1)) throw UsageError("dropout must be in [0,1)");
    if (!(oov_prob >= 0 && oov_prob <= 1)) throw UsageError("oov_prob must be in [0,1]");
    if (eval_every == 0) throw UsageError("eval_every must be >= 1");
    if (workers == 0) throw UsageError("workers must be >= 1");
    if (!(optimizer.learning_rate > 0)) throw UsageError("learning rate must be positive");
  }
};

// ---------------------------------------------------------------------------
// Batching

struct BatchItem {
  const CorpusEntry* entry = nullptr;
  Provenance provenance = Provenance::kGold;
  std::size_t index = 0;  // position in its source corpus
};

// Endless stream of batches. Each batch holds exactly round(p * B) silver
// entries and B minus that many gold entries. Gold entries come from
// successive random permutations of the gold corpus (one permutation = one
// epoch); silver cycles through its own permutations independently.
class BatchSampler {
 public:
  BatchSampler(const Corpus& gold, const Corpus& silver, std::size_t batch_size, double p, std::uint64_t seed)
      : gold_(gold), silver_(silver), rng_(seed) {
    if (batch_size == 0) throw UsageError("batch_size must be >= 1");
    if (!(p >= 0 && p <= 1)) throw UsageError("p must be in [0,1]");
    silver_per_batch_ = static_cast<std::size_t>(std::lround(p * static_cast<double>(batch_size)));
    gold_per_batch_ = batch_size - silver_per_batch_;
    if (gold_per_batch_ > 0 && gold.empty()) throw DataError("gold corpus is empty");
    if (silver_per_batch_ > 0 && silver.empty()) throw DataError("silver proportion > 0 but silver corpus is empty");
  }

  std::size_t silver_per_batch() const { return silver_per_batch_; }
  std::size_t gold_per_batch() const { return gold_per_batch_; }

  // Batches per epoch: one pass over gold, or over silver when the batch
  // holds no gold.
  std::size_t steps_per_epoch() const {
    if (gold_per_batch_ > 0) return (gold_.size() + gold_per_batch_ - 1) / gold_per_batch_;
    return (silver_.size() + silver_per_batch_ - 1) / silver_per_batch_;
  }

  std::vector<BatchItem> make_batch() {
    std::vector<BatchItem> batch;
    batch.reserve(gold_per_batch_ + silver_per_batch_);
    for (std::size_t k = 0; k < gold_per_batch_; ++k) {
      const std::size_t i = draw(gold_, gold_order_, gold_pos_);
      batch.push_back({&gold_.entries[i], Provenance::kGold, i});
    }
    for (std::size_t k = 0; k < silver_per_batch_; ++k) {
      const std::size_t i = draw(silver_, silver_order_, silver_pos_);
      batch.push_back({&silver_.entries[i], Provenance::kSilver, i});
    }
    return batch;
  }

 private:
  std::size_t draw(const Corpus& c, std::vector<std::size_t>& order, std::size_t& pos) {
    if (pos == order.size()) {
      order.resize(c.size());
      for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
      rng_.shuffle(order);
      pos = 0;
    }
    return order[pos++];
  }

  const Corpus& gold_;
  const Corpus& silver_;
  Rng rng_;
  std::size_t silver_per_batch_ = 0, gold_per_batch_ = 0;
  std::vector<std::size_t> gold_order_, silver_order_;
  std::size_t gold_pos_ = 0, silver_pos_ = 0;
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

// Runs fn(k) for k in [0, count) on up to `workers` threads. fn must only
// write to per-index outputs.
template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t k = w; k < count; k += workers) fn(k);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail

// Per-sentence external vectors (tokens x width), aligned with a corpus or
// sentence list.
using ExternalVectors = std::vector<Mat<float>>;

// Text format: one line of whitespace-separated floats per token, a blank
// line after each sentence (so an empty sentence is a lone blank line). All
// rows share one width.
inline ExternalVectors parse_external_vectors(std::istream& in, const std::string& source = "external vectors") {
  ExternalVectors out;
  std::vector<std::vector<float>> rows;
  std::size_t width = 0;
  bool have_width = false;
  std::string line;
  std::size_t line_no = 0;
  auto flush = [&] {
    Mat<float> m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < width; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    out.push_back(std::move(m));
    rows.clear();
  };
  bool pending = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      flush();
      pending = false;
      continue;
    }
    std::istringstream ss(line);
    std::vector<float> row;
    std::string tok;
    while (ss >> tok) {
      std::size_t used = 0;
      float v = 0;
      try {
        v = std::stof(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || !std::isfinite(v)) {
        throw DataError(source + " line " + std::to_string(line_no) + ": bad number '" + tok + "'");
      }
      row.push_back(v);
    }
    if (!have_width) {
      width = row.size();
      have_width = true;
    } else if (row.size() != width) {
      throw DataError(source + " line " + std::to_string(line_no) + ": " + std::to_string(row.size()) +
                      " values, expected " + std::to_string(width));
    }
    rows.push_back(std::move(row));
    pending = true;
  }
  if (pending) flush();
  return out;
}

inline ExternalVectors read_external_vectors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open external vectors: " + path);
  return parse_external_vectors(in, path);
}

namespace detail {

inline const Mat<float>* external_at(const ExternalVectors* ext, std::size_t k) {
  return ext ? &(*ext)[k] : nullptr;
}

inline void check_external_count(const ExternalVectors* ext, std::size_t n, const char* what) {
  if (ext && ext->size() != n) {
    throw DataError(std::string(what) + ": " + std::to_string(ext->size()) + " external vector blocks for " +
                    std::to_string(n) + " sentences");
  }
}

}  // namespace detail

inline ParseTree parse_sentence(const ModelParams<float>& p, std::span<const std::string> sentence,
                                const Mat<float>* external = nullptr) {
  return decode(score_spans(p, sentence, external), sentence).tree;
}

inline std::vector<ParseTree> parse_all(const ModelParams<float>& p,
                                        const std::vector<std::vector<std::string>>& sentences,
                                        std::size_t workers = 1, const ExternalVectors* external = nullptr) {
  detail::check_external_count(external, sentences.size(), "parse");
  std::vector<ParseTree> out(sentences.size());
  detail::parallel_for(sentences.size(), workers, [&](std::size_t k) {
    out[k] = parse_sentence(p, sentences[k], detail::external_at(external, k));
  });
  return out;
}

struct ParseStats {
  std::size_t parsed = 0;
  std::size_t skipped_empty = 0;
};

// Silver corpus: one tree per non-empty sentence. When external vectors are
// given, kept_external receives the blocks of the kept sentences.
inline Corpus parse_corpus(const ModelParams<float>& p, const std::vector<std::vector<std::string>>& sentences,
                           std::size_t workers = 1, ParseStats* stats = nullptr,
                           const ExternalVectors* external = nullptr, ExternalVectors* kept_external = nullptr) {
  detail::check_external_count(external, sentences.size(), "parse");
  std::vector<std::vector<std::string>> kept;
  ExternalVectors kept_ext;
  ParseStats local;
  for (std::size_t k = 0; k < sentences.size(); ++k) {
    if (sentences[k].empty()) {
      ++local.skipped_empty;
    } else {
      kept.push_back(sentences[k]);
      if (external) kept_ext.push_back((*external)[k]);
    }
  }
  auto trees = parse_all(p, kept, workers, external ? &kept_ext : nullptr);
  if (kept_external) *kept_external = std::move(kept_ext);
  Corpus silver;
  silver.provenance = Provenance::kSilver;
  for (std::size_t k = 0; k < kept.size(); ++k) silver.entries.push_back(CorpusEntry{kept[k], std::move(trees[k])});
  local.parsed = kept.size();
  if (stats) *stats = local;
  return silver;
}

inline std::vector<std::vector<std::string>> sentences_of(const Corpus& c) {
  std::vector<std::vector<std::string>> out;
  out.reserve(c.size());
  for (const auto& e : c.entries) out.push_back(e.sentence);
  return out;
}

inline EvalReport evaluate_params(const ModelParams<float>& p, const Corpus& gold, std::size_t workers = 1,
                                  const TypeAnnotations* annotations = nullptr,
                                  const ExternalVectors* external = nullptr) {
  const auto pred = parse_all(p, sentences_of(gold), workers, external);
  return evaluate(trees_of(gold), pred, annotations);
}

// ---------------------------------------------------------------------------
// Training

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  std::size_t steps = 0;  // cumulative optimizer steps
  double train_loss = 0;  // mean hinge loss per sentence over the epoch
  double learning_rate = 0;
  std::optional<EvalReport> dev;
  bool best = false;
};

struct TrainResult {
  ModelParams<float> params;  // dev-best, or final when no dev corpus
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
};

struct TrainCallbacks {
  std::function<void(const EpochRecord&)> on_epoch;
  std::function<void(const EpochRecord&, const ModelParams<float>&)> on_checkpoint;
};

// Model selection key: dev F(S_E), ties broken by F(S).
inline std::pair<double, double> selection_key(const EvalReport& r) { return {r.s_e.fscore, r.s.fscore}; }

inline Vocabulary build_vocabulary(const Corpus& gold, const Corpus* silver) {
  std::vector<std::string> all;
  for (const auto* c : {&gold, silver}) {
    if (!c) continue;
    for (const auto& e : c->entries) all.insert(all.end(), e.sentence.begin(), e.sentence.end());
  }
  return Vocabulary(std::move(all));
}

inline LabelSet build_labels(const Corpus& gold, const Corpus* silver) {
  std::vector<std::string> all;
  for (const auto* c : {&gold, silver}) {
    if (!c) continue;
    for (const auto& e : c->entries) {
      for (const auto& s : labeled_spans(e.tree)) all.push_back(s.label);
    }
  }
  return LabelSet(std::move(all));
}

namespace detail {

inline void check_corpus(const Corpus& c, const char* what) {
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (words(c.entries[k].tree) != c.entries[k].sentence) {
      throw DataError(std::string(what) + " entry " + std::to_string(k) + ": tree leaves do not match sentence");
    }
  }
}

struct SentenceWork {
  ForwardCache<float> cache;
  Weights<float> grad;
  double loss = 0;
};

}  // namespace detail

// External vectors aligned with each corpus handed to train(). Required for
// every corpus in use when the encoder has d_external > 0.
struct ExternalFeatures {
  const ExternalVectors* gold = nullptr;
  const ExternalVectors* silver = nullptr;
  const ExternalVectors* dev = nullptr;
};

namespace detail {

inline void check_external_features(const ExternalVectors* ext, const Corpus& c, std::size_t width, const char* what) {
  if (width == 0) {
    if (ext) throw UsageError(std::string(what) + ": external vectors given but d_external is 0");
    return;
  }
  if (!ext) throw UsageError(std::string(what) + ": d_external is " + std::to_string(width) + " but no external vectors");
  check_external_count(ext, c.size(), what);
  for (std::size_t k = 0; k < c.size(); ++k) {
    const auto& m = (*ext)[k];
    if (static_cast<std::size_t>(m.rows()) != c.entries[k].sentence.size() ||
        static_cast<std::size_t>(m.cols()) != width) {
      throw DataError(std::string(what) + " sentence " + std::to_string(k) + ": external vectors are " +
                      std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ", expected " +
                      std::to_string(c.entries[k].sentence.size()) + "x" + std::to_string(width));
    }
  }
}

}  // namespace detail

inline TrainResult train(const Corpus& gold, const Corpus* silver, const Corpus* dev, const TrainConfig& config,
                         const TrainCallbacks& callbacks = {}, const ExternalFeatures& external = {}) {
  config.validate();
  const bool use_silver = silver && config.silver_proportion > 0;
  const Corpus empty;
  const Corpus& silver_used = use_silver ? *silver : empty;
  detail::check_corpus(gold, "gold");
  if (use_silver) detail::check_corpus(*silver, "silver");
  const std::size_t d_ext = config.encoder.d_external;
  detail::check_external_features(external.gold, gold, d_ext, "gold");
  if (use_silver) detail::check_external_features(external.silver, *silver, d_ext, "silver");
  if (dev) detail::check_external_features(external.dev, *dev, d_ext, "dev");

  EncoderConfig enc = config.encoder;
  enc.seed = derive_seed(config.seed, 0);
  const Vocabulary vocab = build_vocabulary(gold, use_silver ? silver : nullptr);
  const LabelSet labels = build_labels(gold, use_silver ? silver : nullptr);
  ModelParams<float> params = init_params<float>(enc, vocab, labels);

  std::vector<std::size_t> counts(vocab.size(), 0);
  for (const auto* c : {&gold, &silver_used}) {
    for (const auto& e : c->entries) {
      for (const auto& w : e.sentence) ++counts[vocab.id(w)];
    }
  }

  BatchSampler sampler(gold, silver_used, config.batch_size, config.silver_proportion, derive_seed(config.seed, 1));
  const std::uint64_t sentence_stream = derive_seed(config.seed, 2);
  Adam<float> adam(params.weights, config.optimizer);
  Weights<float> grad = params.weights.zeros_like();
  const std::size_t workers = std::min(config.workers, config.batch_size);
  std::vector<detail::SentenceWork> work(workers);
  for (auto& w : work) w.grad = params.weights.zeros_like();

  TrainResult result;
  result.params = params;
  std::optional<std::pair<double, double>> best_key;
  std::uint64_t sentence_counter = 0;
  const std::size_t steps_per_epoch = sampler.steps_per_epoch();

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    double epoch_loss = 0;
    std::size_t epoch_sentences = 0;
    for (std::size_t step = 0; step < steps_per_epoch; ++step) {
      const auto batch = sampler.make_batch();
      grad.set_zero();
      double batch_loss = 0;
      // Rounds of `workers` sentences; per-sentence gradients are summed in
      // batch order so the result does not depend on the worker count.
      for (std::size_t base = 0; base < batch.size(); base += workers) {
        const std::size_t round = std::min(workers, batch.size() - base);
        detail::parallel_for(round, round, [&](std::size_t r) {
          const BatchItem& item = batch[base + r];
          const CorpusEntry& entry = *item.entry;
          const ExternalVectors* ext = item.provenance == Provenance::kGold ? external.gold : external.silver;
          Rng rng(derive_seed(sentence_stream, sentence_counter + base + r));
          auto ids = lookup_ids(params, std::span<const std::string>(entry.sentence));
          for (auto& id : ids) {
            if (counts[id] == 1 && config.oov_prob > 0 && rng.bernoulli(config.oov_prob)) id = Vocabulary::kOov;
          }
          auto& w = work[r];
          ForwardOptions opts{config.dropout, &rng};
          const Mat<float> scores = forward_scores(params, ids, detail::external_at(ext, item.index), opts, w.cache);
          if (!scores.allFinite()) {
            throw ModelError("training diverged: non-finite span scores at step " + std::to_string(adam.steps() + 1));
          }
          const auto h = hinge_loss(to_chart(scores, ids.size(), params.labels), entry.tree, entry.sentence);
          w.loss = h.loss;
          w.grad.set_zero();
          if (h.loss > 0) backward_cached(params, w.cache, chart_to_matrix<float>(h.chart_gradient), w.grad);
        });
        for (std::size_t r = 0; r < round; ++r) {
          batch_loss += work[r].loss;
          if (work[r].loss > 0) grad += work[r].grad;
        }
      }
      sentence_counter += batch.size();
      if (!std::isfinite(batch_loss)) {
        throw ModelError("training diverged: non-finite loss at epoch " + std::to_string(epoch) + " step " +
                         std::to_string(adam.steps() + 1));
      }
      const float inv = 1.0f / static_cast<float>(batch.size());
      for (auto* m : grad.tensors()) *m *= inv;
      const double norm = adam.step(params.weights, grad);
      if (!std::isfinite(norm)) {
        throw ModelError("training diverged: non-finite gradient at step " + std::to_string(adam.steps()));
      }
      epoch_loss += batch_loss;
      epoch_sentences += batch.size();
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.steps = adam.steps();
    rec.train_loss = epoch_loss / static_cast<double>(epoch_sentences);
    rec.learning_rate = adam.current_learning_rate();
    const bool eval_now = dev && (epoch % config.eval_every == 0 || epoch == config.epochs);
    if (eval_now) {
      rec.dev = evaluate_params(params, *dev, config.workers, nullptr, external.dev);
      const auto key = selection_key(*rec.dev);
      adam.report_dev(key.first, key.second);
      if (!best_key || key > *best_key) {
        best_key = key;
        rec.best = true;
        result.params = params;
        result.best_epoch = epoch;
      }
    } else if (!dev) {
      rec.best = true;
      result.params = params;
      result.best_epoch = epoch;
    }
    result.history.push_back(rec);
    if (callbacks.on_epoch) callbacks.on_epoch(rec);
    if (callbacks.on_checkpoint && config.checkpoint_every > 0 && epoch % config.checkpoint_every == 0) {
      callbacks.on_checkpoint(rec, params);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Self-training

struct SelfTrainResult {
  TrainResult baseline;
  Corpus silver;
  ParseStats parse_stats;
  TrainResult self_trained;
};

// Baseline on gold, parse the unlabeled sentences into silver trees, then
// train a freshly initialized model on gold + silver mixed at st_config's p.
// Externals for the unlabeled sentences go in external.silver; the silver
// corpus keeps only the blocks of its non-empty sentences.
inline SelfTrainResult self_train(const Corpus& gold, const std::vector<std::vector<std::string>>& unlabeled,
                                  const Corpus* dev, const TrainConfig& base_config, const TrainConfig& st_config,
                                  const TrainCallbacks& base_callbacks = {}, const TrainCallbacks& st_callbacks = {},
                                  const ExternalFeatures& external = {}) {
  SelfTrainResult r;
  ExternalFeatures base_ext = external;
  base_ext.silver = nullptr;
  r.baseline = train(gold, nullptr, dev, base_config, base_callbacks, base_ext);
  ExternalVectors silver_ext;
  r.silver = parse_corpus(r.baseline.params, unlabeled, base_config.workers, &r.parse_stats, external.silver,
                          &silver_ext);
  ExternalFeatures st_ext = base_ext;
  if (external.silver) st_ext.silver = &silver_ext;
  r.self_trained = train(gold, &r.silver, dev, st_config, st_callbacks, st_ext);
  return r;
}

// ---------------------------------------------------------------------------
// Multi-seed protocol

struct MetricMean {
  std::string category;
  double precision = 0, recall = 0, fscore = 0;
};

struct MultiSeedResult {
  std::vector<std::uint64_t> seeds;
  std::vector<EvalReport> per_seed;
  std::vector<MetricMean> mean;
};

inline std::vector<MetricMean> mean_report(const std::vector<EvalReport>& reports) {
  std::vector<MetricMean> out;
  if (reports.empty()) return out;
  const std::size_t n_records = reports.front().records().size();
  for (std::size_t c = 0; c < n_records; ++c) {
    MetricMean m;
    m.category = reports.front().records()[c]->category;
    for (const auto& r : reports) {
      const auto* rec = r.records()[c];
      m.precision += rec->precision;
      m.recall += rec->recall;
      m.fscore += rec->fscore;
    }
    const double k = static_cast<double>(reports.size());
    m.precision /= k;
    m.recall /= k;
    m.fscore /= k;
    out.push_back(m);
  }
  return out;
}

// Runs run(seed) for seeds seed..seed+k-1; run returns the dev report of the
// model trained with that seed.
inline MultiSeedResult multi_seed(std::uint64_t seed, std::size_t k,
                                  const std::function<EvalReport(std::uint64_t)>& run) {
  if (k == 0) throw UsageError("number of seeds must be >= 1");
  MultiSeedResult r;
  for (std::size_t s = 0; s < k; ++s) {
    r.seeds.push_back(seed + s);
    r.per_seed.push_back(run(seed + s));
  }
  r.mean = mean_report(r.per_seed);
  return r;
}

// ---------------------------------------------------------------------------
// Ensembling

// (1/N) * sum of member charts. The sum is pairwise over member order:
// sum[a, b) = sum[a, mid) + sum[mid, b).
inline SpanScoreChart average_charts(std::span<const SpanScoreChart> charts) {
  if (charts.empty()) throw UsageError("ensemble needs at least one member");
  for (const auto& c : charts) {
    if (!c.same_shape(charts[0]) || !(c.labels() == charts[0].labels())) {
      throw ModelError("ensemble members disagree on chart shape or label set");
    }
  }
  std::function<std::vector<double>(std::size_t, std::size_t)> sum = [&](std::size_t a, std::size_t b) {
    if (b - a == 1) return charts[a].scores();
    const std::size_t mid = a + (b - a) / 2;
    auto left = sum(a, mid);
    const auto right = sum(mid, b);
    for (std::size_t k = 0; k < left.size(); ++k) left[k] += right[k];
    return left;
  };
  SpanScoreChart out(charts[0].n(), charts[0].label_ptr());
  const auto total = sum(0, charts.size());
  const double n = static_cast<double>(charts.size());
  for (std::size_t k = 0; k < total.size(); ++k) out.scores()[k] = total[k] / n;
  return out;
}

inline void check_ensemble(std::span<const ModelParams<float>* const> members) {
  if (members.empty()) throw UsageError("ensemble needs at least one member");
  for (const auto* m : members) {
    if (!(*m->labels == *members[0]->labels)) {
      throw ModelError("ensemble members have different label sets (identical ordering required)");
    }
  }
}

// Members without external input ignore the vectors.
inline SpanScoreChart ensemble_chart(std::span<const ModelParams<float>* const> members,
                                     std::span<const std::string> sentence, const Mat<float>* external = nullptr) {
  check_ensemble(members);
  std::vector<SpanScoreChart> charts;
  charts.reserve(members.size());
  for (const auto* m : members) charts.push_back(score_spans(*m, sentence, m->config.d_external > 0 ? external : nullptr));
  return average_charts(charts);
}

inline ParseTree ensemble_decode(std::span<const ModelParams<float>* const> members,
                                 std::span<const std::string> sentence, const Mat<float>* external = nullptr) {
  return decode(ensemble_chart(members, sentence, external), sentence).tree;
}

inline std::vector<ParseTree> ensemble_parse_all(std::span<const ModelParams<float>* const> members,
                                                 const std::vector<std::vector<std::string>>& sentences,
                                                 std::size_t workers = 1, const ExternalVectors* external = nullptr) {
  check_ensemble(members);
  detail::check_external_count(external, sentences.size(), "parse");
  std::vector<ParseTree> out(sentences.size());
  detail::parallel_for(sentences.size(), workers, [&](std::size_t k) {
    out[k] = ensemble_decode(members, sentences[k], detail::external_at(external, k));
  });
  return out;
}

enum class EnsembleSelection {
  kNone,          // use the given members as they are
  kMembersFirst,  // keep the n candidates with the best individual dev F(S_E)
  kEnsembleFirst  // keep the size-n subset whose ensemble has the best dev F(S_E)
};

inline constexpr std::size_t kMaxSubsetCandidates = 12;

// Returns indices into candidates, in ascending order.
inline std::vector<std::size_t> select_members(std::span<const ModelParams<float>* const> candidates,
                                               const Corpus& dev, std::size_t n, EnsembleSelection how,
                                               std::size_t workers = 1) {
  check_ensemble(candidates);
  if (n == 0 || n > candidates.size()) throw UsageError("ensemble size must be in [1, number of candidates]");
  std::vector<std::size_t> all(candidates.size());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
  if (how == EnsembleSelection::kNone) return all;
  const auto sentences = sentences_of(dev);
  const auto gold = trees_of(dev);
  // charts[c][s]: member c on dev sentence s.
  std::vector<std::vector<SpanScoreChart>> charts(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    charts[c].resize(sentences.size(), SpanScoreChart(1, candidates[c]->labels));
    detail::parallel_for(sentences.size(), workers,
                         [&](std::size_t s) { charts[c][s] = score_spans(*candidates[c], sentences[s]); });
  }
  auto score_subset = [&](const std::vector<std::size_t>& subset) {
    std::vector<ParseTree> pred(sentences.size());
    detail::parallel_for(sentences.size(), workers, [&](std::size_t s) {
      std::vector<SpanScoreChart> cs;
      for (auto c : subset) cs.push_back(charts[c][s]);
      pred[s] = decode(average_charts(cs), sentences[s]).tree;
    });
    return selection_key(evaluate(gold, pred));
  };
  if (how == EnsembleSelection::kMembersFirst) {
    std::vector<std::pair<std::pair<double, double>, std::size_t>> ranked;
    for (auto c : all) ranked.push_back({score_subset({c}), c});
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < n; ++k) out.push_back(ranked[k].second);
    std::sort(out.begin(), out.end());
    return out;
  }
  if (candidates.size() > kMaxSubsetCandidates) {
    throw UsageError("ensemble-first selection supports at most " + std::to_string(kMaxSubsetCandidates) +
                     " candidates");
  }
  std::vector<std::size_t> best;
  std::optional<std::pair<double, double>> best_key;
  std::vector<bool> pick(candidates.size(), false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(n), true);
  do {
    std::vector<std::size_t> subset;
    for (std::size_t k = 0; k < pick.size(); ++k) {
      if (pick[k]) subset.push_back(k);
    }
    const auto key = score_subset(subset);
    if (!best_key || key > *best_key) {
      best_key = key;
      best = subset;
    }
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

}  // namespace spanparse

#endif  // SPANPARSE_PIPELINE_HPP_
