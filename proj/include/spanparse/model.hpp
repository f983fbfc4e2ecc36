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

#ifndef SPANPARSE_MODEL_HPP_
#define SPANPARSE_MODEL_HPP_

// Span scorer: word embeddings (plus optionally projected external vectors)
// and sinusoidal positions, pre-norm self-attention layers, fencepost
// vectors built from forward/backward halves of the token outputs, and a
// two-layer span classifier. Forward and backward are written out by hand;
// the scalar type is a template parameter so that gradients can be checked
// in double while training runs in float.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "spanparse/error.hpp"
#include "spanparse/rng.hpp"
#include "spanparse/span_chart.hpp"

namespace spanparse {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

struct EncoderConfig {
  std::size_t d_model = 64;
  std::size_t n_layers = 8;
  std::size_t n_heads = 4;
  std::size_t d_ff = 128;
  std::size_t d_span = 64;
  std::size_t d_external = 0;  // width of external per-token vectors, 0 = none
  std::uint64_t seed = 0;

  void validate() const {
    if (d_model == 0 || n_heads == 0 || d_ff == 0 || d_span == 0) {
      throw ModelError("encoder dimensions must be >= 1");
    }
    if (d_model % n_heads != 0) {
      throw ModelError("d_model (" + std::to_string(d_model) + ") not divisible by n_heads (" +
                       std::to_string(n_heads) + ")");
    }
    if (d_model % 2 != 0) throw ModelError("d_model must be even for the fencepost split");
  }

  bool operator==(const EncoderConfig&) const = default;
};

// Word inventory. Id 0 is the out-of-vocabulary entry.
class Vocabulary {
 public:
  static constexpr std::size_t kOov = 0;
  static constexpr std::string_view kOovName = "<unk>";

  Vocabulary() : words_{std::string(kOovName)} {}

  explicit Vocabulary(std::vector<std::string> words) : Vocabulary() {
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    for (auto& w : words) {
      if (w == kOovName) continue;
      ids_.emplace(w, words_.size());
      words_.push_back(std::move(w));
    }
  }

  static Vocabulary from_ordered(const std::vector<std::string>& words) {
    if (words.empty() || words.front() != kOovName) throw ModelError("vocabulary must start with <unk>");
    Vocabulary v;
    for (std::size_t k = 1; k < words.size(); ++k) {
      v.ids_.emplace(words[k], v.words_.size());
      v.words_.push_back(words[k]);
    }
    return v;
  }

  std::size_t id(const std::string& w) const {
    auto it = ids_.find(w);
    return it == ids_.end() ? kOov : it->second;
  }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  // Number of real entries, excluding <unk>.
  bool has_entries() const { return words_.size() > 1; }

  bool operator==(const Vocabulary& o) const { return words_ == o.words_; }

 private:
  std::vector<std::string> words_;
  std::map<std::string, std::size_t> ids_;
};

template <class T>
struct LayerWeights {
  Mat<T> ln1_gain, ln1_bias;
  Mat<T> wq, wk, wv, wo;
  Mat<T> ln2_gain, ln2_bias;
  Mat<T> ff_w1, ff_b1, ff_w2, ff_b2;
};

// All trainable tensors. Biases and gains are 1 x d matrices. The same type
// holds gradients and optimizer moments.
template <class T>
struct Weights {
  Mat<T> embedding;   // vocab x d_model
  Mat<T> ext_proj;    // d_external x d_model (empty when unused)
  std::vector<LayerWeights<T>> layers;
  Mat<T> lnf_gain, lnf_bias;
  Mat<T> span_w1, span_b1;  // d_model x d_span, 1 x d_span
  Mat<T> span_w2, span_b2;  // d_span x labels, 1 x labels

  template <class Fn>
  void visit(Fn&& fn) {
    visit_impl(*this, fn);
  }
  template <class Fn>
  void visit(Fn&& fn) const {
    visit_impl(*this, fn);
  }

  std::vector<Mat<T>*> tensors() {
    std::vector<Mat<T>*> out;
    visit([&](const std::string&, Mat<T>& m) { out.push_back(&m); });
    return out;
  }

  std::vector<std::pair<std::string, const Mat<T>*>> named_tensors() const {
    std::vector<std::pair<std::string, const Mat<T>*>> out;
    visit([&](const std::string& name, const Mat<T>& m) { out.emplace_back(name, &m); });
    return out;
  }

  // Same shapes, all zeros.
  Weights zeros_like() const {
    Weights z = *this;
    z.set_zero();
    return z;
  }

  void set_zero() {
    for (auto* m : tensors()) m->setZero();
  }

  Weights& operator+=(const Weights& o) {
    auto a = tensors();
    auto b = o.named_tensors();
    for (std::size_t k = 0; k < a.size(); ++k) *a[k] += *b[k].second;
    return *this;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& [name, m] : named_tensors()) n += static_cast<std::size_t>(m->size());
    return n;
  }

  template <class U>
  Weights<U> cast() const {
    Weights<U> out;
    auto src = named_tensors();
    out.layers.resize(layers.size());
    std::size_t k = 0;
    out.visit([&](const std::string&, Mat<U>& m) { m = src[k++].second->template cast<U>(); });
    return out;
  }

 private:
  template <class Self, class Fn>
  static void visit_impl(Self& w, Fn& fn) {
    fn("embedding", w.embedding);
    fn("ext_proj", w.ext_proj);
    for (std::size_t k = 0; k < w.layers.size(); ++k) {
      auto& L = w.layers[k];
      const std::string p = "layer" + std::to_string(k) + ".";
      fn(p + "ln1_gain", L.ln1_gain);
      fn(p + "ln1_bias", L.ln1_bias);
      fn(p + "wq", L.wq);
      fn(p + "wk", L.wk);
      fn(p + "wv", L.wv);
      fn(p + "wo", L.wo);
      fn(p + "ln2_gain", L.ln2_gain);
      fn(p + "ln2_bias", L.ln2_bias);
      fn(p + "ff_w1", L.ff_w1);
      fn(p + "ff_b1", L.ff_b1);
      fn(p + "ff_w2", L.ff_w2);
      fn(p + "ff_b2", L.ff_b2);
    }
    fn("lnf_gain", w.lnf_gain);
    fn("lnf_bias", w.lnf_bias);
    fn("span_w1", w.span_w1);
    fn("span_b1", w.span_b1);
    fn("span_w2", w.span_w2);
    fn("span_b2", w.span_b2);
  }
};

template <class T>
struct ModelParams {
  EncoderConfig config;
  Vocabulary vocab;
  std::shared_ptr<const LabelSet> labels;
  Weights<T> weights;

  template <class U>
  ModelParams<U> cast() const {
    return ModelParams<U>{config, vocab, labels, weights.template cast<U>()};
  }
};

// Fencepost vectors y_0..y_n, one row each.
template <class T>
struct SequenceRepr {
  Mat<T> fenceposts;
  std::size_t length() const { return static_cast<std::size_t>(fenceposts.rows()) - 1; }
};

// ---------------------------------------------------------------------------
// Initialization

template <class T>
ModelParams<T> init_params(const EncoderConfig& config, const Vocabulary& vocab, const LabelSet& labels) {
  config.validate();
  if (!vocab.has_entries()) throw ModelError("empty vocabulary");
  if (labels.size() < 2) throw ModelError("label set has no constituent labels");
  const auto d = static_cast<Eigen::Index>(config.d_model);
  const auto ff = static_cast<Eigen::Index>(config.d_ff);
  const auto ds = static_cast<Eigen::Index>(config.d_span);
  const auto nl = static_cast<Eigen::Index>(labels.size());

  ModelParams<T> p;
  p.config = config;
  p.vocab = vocab;
  p.labels = std::make_shared<const LabelSet>(labels);
  Weights<T>& w = p.weights;
  Rng rng(config.seed);
  // Uniform(-b, b) with b = sqrt(3 / fan_in): unit-variance preserving.
  auto uniform = [&](Eigen::Index rows, Eigen::Index cols, double bound) {
    Mat<T> m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = static_cast<T>(rng.uniform(-bound, bound));
    }
    return m;
  };
  auto fan_in = [&](Eigen::Index rows, Eigen::Index cols) {
    return uniform(rows, cols, std::sqrt(3.0 / static_cast<double>(rows)));
  };
  auto constant = [](Eigen::Index cols, T v) { return Mat<T>::Constant(1, cols, v); };

  w.embedding = uniform(static_cast<Eigen::Index>(vocab.size()), d, 1.0);
  if (config.d_external > 0) {
    w.ext_proj = fan_in(static_cast<Eigen::Index>(config.d_external), d);
  } else {
    w.ext_proj = Mat<T>(0, 0);
  }
  w.layers.resize(config.n_layers);
  for (auto& L : w.layers) {
    L.ln1_gain = constant(d, T(1));
    L.ln1_bias = constant(d, T(0));
    L.wq = fan_in(d, d);
    L.wk = fan_in(d, d);
    L.wv = fan_in(d, d);
    L.wo = fan_in(d, d);
    L.ln2_gain = constant(d, T(1));
    L.ln2_bias = constant(d, T(0));
    L.ff_w1 = fan_in(d, ff);
    L.ff_b1 = constant(ff, T(0));
    L.ff_w2 = fan_in(ff, d);
    L.ff_b2 = constant(d, T(0));
  }
  w.lnf_gain = constant(d, T(1));
  w.lnf_bias = constant(d, T(0));
  w.span_w1 = fan_in(d, ds);
  w.span_b1 = constant(ds, T(0));
  w.span_w2 = fan_in(ds, nl);
  w.span_b2 = constant(nl, T(0));
  return p;
}

// ---------------------------------------------------------------------------
// Forward pass with cache

struct ForwardOptions {
  double dropout = 0.0;  // training only
  Rng* rng = nullptr;
};

template <class T>
struct LayerNormCache {
  Mat<T> xhat;
  Vec<T> rstd;
};

template <class T>
struct LayerCache {
  LayerNormCache<T> ln1;
  Mat<T> a, q, k, v, o;
  std::vector<Mat<T>> attention;  // per head, n x n, rows sum to 1
  Mat<T> attn_mask;
  LayerNormCache<T> ln2;
  Mat<T> b, u, r;
  Mat<T> ff_mask;
};

template <class T>
struct ForwardCache {
  std::vector<std::size_t> ids;
  Mat<T> external;
  Mat<T> input_mask;
  std::vector<LayerCache<T>> layers;
  LayerNormCache<T> lnf;
  Mat<T> h;          // n x d
  Mat<T> y;          // (n+1) x d fenceposts
  Mat<T> z;          // spans x d_span, pre-activation
  Mat<T> hidden;     // spans x d_span, post-activation (and dropout)
  Mat<T> hidden_mask;
  std::vector<std::size_t> span_i, span_j;
};

namespace detail {

inline constexpr double kLayerNormEps = 1e-5;

template <class T>
Mat<T> layer_norm(const Mat<T>& x, const Mat<T>& gain, const Mat<T>& bias, LayerNormCache<T>& c) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  c.xhat.resize(n, d);
  c.rstd.resize(n);
  Mat<T> y(n, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    const T mean = x.row(r).mean();
    const T var = (x.row(r).array() - mean).square().mean();
    const T rstd = T(1) / std::sqrt(var + static_cast<T>(kLayerNormEps));
    c.rstd(r) = rstd;
    c.xhat.row(r) = (x.row(r).array() - mean) * rstd;
    y.row(r) = c.xhat.row(r).cwiseProduct(gain.row(0)) + bias.row(0);
  }
  return y;
}

template <class T>
Mat<T> layer_norm_backward(const Mat<T>& dy, const Mat<T>& gain, const LayerNormCache<T>& c,
                           Mat<T>& dgain, Mat<T>& dbias) {
  dgain += dy.cwiseProduct(c.xhat).colwise().sum();
  dbias += dy.colwise().sum();
  const Eigen::Index n = dy.rows();
  Mat<T> dx(n, dy.cols());
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto dxhat = dy.row(r).cwiseProduct(gain.row(0));
    const T m1 = dxhat.mean();
    const T m2 = dxhat.cwiseProduct(c.xhat.row(r)).mean();
    dx.row(r) = c.rstd(r) * (dxhat.array() - m1 - c.xhat.row(r).array() * m2);
  }
  return dx;
}

template <class T>
Mat<T> dropout_mask(Eigen::Index rows, Eigen::Index cols, const ForwardOptions& opts) {
  if (opts.dropout <= 0.0 || opts.rng == nullptr) return Mat<T>();
  Mat<T> m(rows, cols);
  const T keep = static_cast<T>(1.0 / (1.0 - opts.dropout));
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = opts.rng->bernoulli(opts.dropout) ? T(0) : keep;
  }
  return m;
}

template <class T>
void apply_mask(Mat<T>& x, const Mat<T>& mask) {
  if (mask.size() != 0) x.array() *= mask.array();
}

template <class T>
Mat<T> positional_encoding(Eigen::Index n, Eigen::Index d) {
  Mat<T> pe(n, d);
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index k = 0; k < d; k += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(k) / static_cast<double>(d));
      pe(t, k) = static_cast<T>(std::sin(static_cast<double>(t) * freq));
      if (k + 1 < d) pe(t, k + 1) = static_cast<T>(std::cos(static_cast<double>(t) * freq));
    }
  }
  return pe;
}

template <class T>
Mat<T> relu(const Mat<T>& x) {
  return x.cwiseMax(T(0));
}

template <class T>
void check_external(const ModelParams<T>& p, std::size_t n, const std::type_identity_t<Mat<T>>* external) {
  if (external == nullptr) return;
  if (p.config.d_external == 0) throw ModelError("model was not configured for external vectors");
  if (static_cast<std::size_t>(external->rows()) != n) {
    throw DataError("external vectors: " + std::to_string(external->rows()) + " rows for " +
                    std::to_string(n) + " tokens");
  }
  if (static_cast<std::size_t>(external->cols()) != p.config.d_external) {
    throw DataError("external vectors have width " + std::to_string(external->cols()) +
                    ", expected " + std::to_string(p.config.d_external));
  }
}

}  // namespace detail

template <class T>
std::vector<std::size_t> lookup_ids(const ModelParams<T>& p, std::span<const std::string> sentence) {
  std::vector<std::size_t> ids;
  ids.reserve(sentence.size());
  for (const auto& w : sentence) ids.push_back(p.vocab.id(w));
  return ids;
}

// Runs the encoder; fills cache up to and including the fenceposts.
template <class T>
void encode_ids(const ModelParams<T>& p, const std::vector<std::size_t>& ids, const std::type_identity_t<Mat<T>>* external,
                const ForwardOptions& opts, ForwardCache<T>& c) {
  const Weights<T>& w = p.weights;
  const auto n = static_cast<Eigen::Index>(ids.size());
  const auto d = static_cast<Eigen::Index>(p.config.d_model);
  if (n == 0) throw DataError("cannot encode an empty sentence");
  detail::check_external(p, ids.size(), external);

  c.ids = ids;
  Mat<T> x(n, d);
  for (Eigen::Index t = 0; t < n; ++t) x.row(t) = w.embedding.row(static_cast<Eigen::Index>(ids[t]));
  if (external != nullptr) {
    c.external = *external;
    x += c.external * w.ext_proj;
  } else {
    c.external.resize(0, 0);
  }
  x += detail::positional_encoding<T>(n, d);
  c.input_mask = detail::dropout_mask<T>(n, d, opts);
  detail::apply_mask(x, c.input_mask);

  const auto heads = static_cast<Eigen::Index>(p.config.n_heads);
  const Eigen::Index dk = d / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dk));
  c.layers.resize(w.layers.size());
  for (std::size_t li = 0; li < w.layers.size(); ++li) {
    const auto& L = w.layers[li];
    auto& lc = c.layers[li];
    lc.a = detail::layer_norm(x, L.ln1_gain, L.ln1_bias, lc.ln1);
    lc.q = lc.a * L.wq;
    lc.k = lc.a * L.wk;
    lc.v = lc.a * L.wv;
    lc.o.resize(n, d);
    lc.attention.resize(static_cast<std::size_t>(heads));
    for (Eigen::Index h = 0; h < heads; ++h) {
      Mat<T> s = lc.q.middleCols(h * dk, dk) * lc.k.middleCols(h * dk, dk).transpose() * scale;
      for (Eigen::Index r = 0; r < n; ++r) {
        const T mx = s.row(r).maxCoeff();
        s.row(r) = (s.row(r).array() - mx).exp();
        s.row(r) /= s.row(r).sum();
      }
      lc.o.middleCols(h * dk, dk) = s * lc.v.middleCols(h * dk, dk);
      lc.attention[static_cast<std::size_t>(h)] = std::move(s);
    }
    Mat<T> att = lc.o * L.wo;
    lc.attn_mask = detail::dropout_mask<T>(n, d, opts);
    detail::apply_mask(att, lc.attn_mask);
    x += att;

    lc.b = detail::layer_norm(x, L.ln2_gain, L.ln2_bias, lc.ln2);
    lc.u = (lc.b * L.ff_w1).rowwise() + L.ff_b1.row(0);
    lc.r = detail::relu(lc.u);
    Mat<T> f = (lc.r * L.ff_w2).rowwise() + L.ff_b2.row(0);
    lc.ff_mask = detail::dropout_mask<T>(n, d, opts);
    detail::apply_mask(f, lc.ff_mask);
    x += f;
  }
  c.h = detail::layer_norm(x, w.lnf_gain, w.lnf_bias, c.lnf);

  // y_k = [forward half of token k-1 ; backward half of token k], zero
  // padded at the sentence edges.
  const Eigen::Index half = d / 2;
  c.y = Mat<T>::Zero(n + 1, d);
  c.y.block(1, 0, n, half) = c.h.leftCols(half);
  c.y.block(0, half, n, d - half) = c.h.rightCols(d - half);
}

// Full forward pass: returns the pinned chart in the model's scalar type
// (spans x labels, row-major span order as in SpanScoreChart).
template <class T>
Mat<T> forward_scores(const ModelParams<T>& p, const std::vector<std::size_t>& ids, const std::type_identity_t<Mat<T>>* external,
                      const ForwardOptions& opts, ForwardCache<T>& c) {
  encode_ids(p, ids, external, opts, c);
  const Weights<T>& w = p.weights;
  const std::size_t n = ids.size();
  const auto spans = static_cast<Eigen::Index>(SpanScoreChart::span_count(n));
  const Mat<T> proj = c.y * w.span_w1;  // (n+1) x d_span
  c.z.resize(spans, proj.cols());
  c.span_i.clear();
  c.span_j.clear();
  Eigen::Index s = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j <= n; ++j, ++s) {
      c.z.row(s) = proj.row(static_cast<Eigen::Index>(j)) - proj.row(static_cast<Eigen::Index>(i)) +
                   w.span_b1.row(0);
      c.span_i.push_back(i);
      c.span_j.push_back(j);
    }
  }
  c.hidden = detail::relu(c.z);
  c.hidden_mask = detail::dropout_mask<T>(c.hidden.rows(), c.hidden.cols(), opts);
  detail::apply_mask(c.hidden, c.hidden_mask);
  Mat<T> scores = (c.hidden * w.span_w2).rowwise() + w.span_b2.row(0);
  scores.colwise() -= Vec<T>(scores.col(0));
  return scores;
}

template <class T>
SpanScoreChart to_chart(const Mat<T>& scores, std::size_t n, const std::shared_ptr<const LabelSet>& labels) {
  SpanScoreChart chart(n, labels);
  auto& out = chart.scores();
  const auto L = static_cast<Eigen::Index>(labels->size());
  for (Eigen::Index s = 0; s < scores.rows(); ++s) {
    for (Eigen::Index l = 0; l < L; ++l) {
      out[static_cast<std::size_t>(s * L + l)] = static_cast<double>(scores(s, l));
    }
  }
  return chart;
}

// Reverse pass for a cached forward. chart_grad is spans x labels;
// gradients are added into `grad`.
template <class T>
void backward_cached(const ModelParams<T>& p, const ForwardCache<T>& c, const Mat<T>& chart_grad,
                     Weights<T>& grad) {
  const Weights<T>& w = p.weights;
  const auto n = static_cast<Eigen::Index>(c.ids.size());
  const auto d = static_cast<Eigen::Index>(p.config.d_model);
  if (chart_grad.rows() != c.z.rows() || chart_grad.cols() != w.span_w2.cols()) {
    throw ModelError("chart gradient shape mismatch");
  }

  // Null pinning: s'_l = s_l - s_0.
  Mat<T> ds = chart_grad;
  ds.col(0) = -chart_grad.rightCols(chart_grad.cols() - 1).rowwise().sum();

  grad.span_w2 += c.hidden.transpose() * ds;
  grad.span_b2 += ds.colwise().sum();
  Mat<T> dz = ds * w.span_w2.transpose();
  detail::apply_mask(dz, c.hidden_mask);
  dz.array() *= (c.z.array() > T(0)).template cast<T>();
  grad.span_b1 += dz.colwise().sum();

  Mat<T> dproj = Mat<T>::Zero(n + 1, dz.cols());
  for (Eigen::Index s = 0; s < dz.rows(); ++s) {
    dproj.row(static_cast<Eigen::Index>(c.span_j[static_cast<std::size_t>(s)])) += dz.row(s);
    dproj.row(static_cast<Eigen::Index>(c.span_i[static_cast<std::size_t>(s)])) -= dz.row(s);
  }
  grad.span_w1 += c.y.transpose() * dproj;
  const Mat<T> dy = dproj * w.span_w1.transpose();

  const Eigen::Index half = d / 2;
  Mat<T> dh(n, d);
  dh.leftCols(half) = dy.block(1, 0, n, half);
  dh.rightCols(d - half) = dy.block(0, half, n, d - half);

  Mat<T> dx = detail::layer_norm_backward(dh, w.lnf_gain, c.lnf, grad.lnf_gain, grad.lnf_bias);

  const auto heads = static_cast<Eigen::Index>(p.config.n_heads);
  const Eigen::Index dk = d / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dk));
  for (std::size_t li = w.layers.size(); li-- > 0;) {
    const auto& L = w.layers[li];
    const auto& lc = c.layers[li];
    auto& G = grad.layers[li];

    Mat<T> df = dx;
    detail::apply_mask(df, lc.ff_mask);
    G.ff_b2 += df.colwise().sum();
    G.ff_w2 += lc.r.transpose() * df;
    Mat<T> du = df * L.ff_w2.transpose();
    du.array() *= (lc.u.array() > T(0)).template cast<T>();
    G.ff_b1 += du.colwise().sum();
    G.ff_w1 += lc.b.transpose() * du;
    const Mat<T> db = du * L.ff_w1.transpose();
    dx += detail::layer_norm_backward(db, L.ln2_gain, lc.ln2, G.ln2_gain, G.ln2_bias);

    Mat<T> datt = dx;
    detail::apply_mask(datt, lc.attn_mask);
    G.wo += lc.o.transpose() * datt;
    const Mat<T> dout = datt * L.wo.transpose();
    Mat<T> dq(n, d), dkm(n, d), dv(n, d);
    for (Eigen::Index h = 0; h < heads; ++h) {
      const Mat<T>& A = lc.attention[static_cast<std::size_t>(h)];
      const auto dout_h = dout.middleCols(h * dk, dk);
      const Mat<T> dA = dout_h * lc.v.middleCols(h * dk, dk).transpose();
      dv.middleCols(h * dk, dk) = A.transpose() * dout_h;
      const Vec<T> rowdot = dA.cwiseProduct(A).rowwise().sum();
      const Mat<T> dS = (A.array() * (dA.colwise() - rowdot).array()).matrix() * scale;
      dq.middleCols(h * dk, dk) = dS * lc.k.middleCols(h * dk, dk);
      dkm.middleCols(h * dk, dk) = dS.transpose() * lc.q.middleCols(h * dk, dk);
    }
    G.wq += lc.a.transpose() * dq;
    G.wk += lc.a.transpose() * dkm;
    G.wv += lc.a.transpose() * dv;
    const Mat<T> da = dq * L.wq.transpose() + dkm * L.wk.transpose() + dv * L.wv.transpose();
    dx += detail::layer_norm_backward(da, L.ln1_gain, lc.ln1, G.ln1_gain, G.ln1_bias);
  }

  detail::apply_mask(dx, c.input_mask);
  for (Eigen::Index t = 0; t < n; ++t) grad.embedding.row(static_cast<Eigen::Index>(c.ids[static_cast<std::size_t>(t)])) += dx.row(t);
  if (c.external.size() != 0) grad.ext_proj += c.external.transpose() * dx;
}

template <class T>
Mat<T> chart_to_matrix(const SpanScoreChart& chart) {
  const auto S = static_cast<Eigen::Index>(chart.num_spans());
  const auto L = static_cast<Eigen::Index>(chart.num_labels());
  Mat<T> m(S, L);
  const auto& v = chart.scores();
  for (Eigen::Index s = 0; s < S; ++s) {
    for (Eigen::Index l = 0; l < L; ++l) m(s, l) = static_cast<T>(v[static_cast<std::size_t>(s * L + l)]);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Public entry points (inference mode: no dropout)

template <class T>
SequenceRepr<T> encode(const ModelParams<T>& p, std::span<const std::string> sentence,
                       const std::type_identity_t<Mat<T>>* external = nullptr) {
  ForwardCache<T> c;
  encode_ids(p, lookup_ids(p, sentence), external, ForwardOptions{}, c);
  return SequenceRepr<T>{std::move(c.y)};
}

// y_j - y_i for 0 <= i < j <= n.
template <class T>
Vec<T> span_vector(const SequenceRepr<T>& repr, std::size_t i, std::size_t j) {
  if (!(i < j && j <= repr.length())) {
    throw ModelError("invalid span (" + std::to_string(i) + "," + std::to_string(j) + ") for length " +
                     std::to_string(repr.length()));
  }
  return (repr.fenceposts.row(static_cast<Eigen::Index>(j)) - repr.fenceposts.row(static_cast<Eigen::Index>(i)))
      .transpose();
}

template <class T>
SpanScoreChart score_spans(const ModelParams<T>& p, std::span<const std::string> sentence,
                           const std::type_identity_t<Mat<T>>* external = nullptr) {
  ForwardCache<T> c;
  const Mat<T> s = forward_scores(p, lookup_ids(p, sentence), external, ForwardOptions{}, c);
  return to_chart(s, sentence.size(), p.labels);
}

// Gradient of <chart_gradient, score_spans(sentence)> with respect to every
// parameter.
template <class T>
Weights<T> backward(const ModelParams<T>& p, std::span<const std::string> sentence,
                    const SpanScoreChart& chart_gradient, const std::type_identity_t<Mat<T>>* external = nullptr) {
  if (chart_gradient.n() != sentence.size() || chart_gradient.num_labels() != p.labels->size()) {
    throw ModelError("chart gradient shape does not match sentence and label set");
  }
  ForwardCache<T> c;
  forward_scores(p, lookup_ids(p, sentence), external, ForwardOptions{}, c);
  Weights<T> grad = p.weights.zeros_like();
  backward_cached(p, c, chart_to_matrix<T>(chart_gradient), grad);
  return grad;
}

}  // namespace spanparse

#endif  // SPANPARSE_MODEL_HPP_
