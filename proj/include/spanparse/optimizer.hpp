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

#ifndef SPANPARSE_OPTIMIZER_HPP_
#define SPANPARSE_OPTIMIZER_HPP_

// Adam with linear warmup, global-norm clipping and a halve-on-plateau
// learning-rate schedule driven by a dev metric.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>

#include "spanparse/model.hpp"

namespace spanparse {

struct OptimizerConfig {
  double learning_rate = 2e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t warmup_steps = 160;
  double clip_norm = 5.0;  // <= 0 disables clipping
  double decay_factor = 0.5;
  std::size_t decay_patience = 5;  // dev evaluations without improvement
};

template <class T>
class Adam {
 public:
  Adam(const Weights<T>& shape, OptimizerConfig config)
      : config_(config), m_(shape.zeros_like()), v_(shape.zeros_like()), base_lr_(config.learning_rate) {}

  std::size_t steps() const { return step_; }
  double base_learning_rate() const { return base_lr_; }

  double current_learning_rate() const {
    const double warm = config_.warmup_steps == 0
                            ? 1.0
                            : std::min(1.0, static_cast<double>(step_ + 1) / static_cast<double>(config_.warmup_steps));
    return base_lr_ * warm;
  }

  // Global L2 norm of a gradient.
  static double grad_norm(const Weights<T>& g) {
    double sq = 0;
    for (const auto& [name, m] : g.named_tensors()) sq += m->template cast<double>().squaredNorm();
    return std::sqrt(sq);
  }

  // Applies one update; returns the gradient norm before clipping.
  double step(Weights<T>& params, Weights<T>& grad) {
    const double norm = grad_norm(grad);
    const T scale = (config_.clip_norm > 0 && norm > config_.clip_norm) ? static_cast<T>(config_.clip_norm / norm)
                                                                          : T(1);
    const double lr = current_learning_rate();
    ++step_;
    const double bc1 = 1 - std::pow(config_.beta1, static_cast<double>(step_));
    const double bc2 = 1 - std::pow(config_.beta2, static_cast<double>(step_));
    const T b1 = static_cast<T>(config_.beta1), b2 = static_cast<T>(config_.beta2);
    const T step_size = static_cast<T>(lr / bc1);
    const T inv_sqrt_bc2 = static_cast<T>(1.0 / std::sqrt(bc2));
    const T eps = static_cast<T>(config_.epsilon);
    auto p = params.tensors();
    auto g = grad.tensors();
    auto m = m_.tensors();
    auto v = v_.tensors();
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (scale != T(1)) *g[k] *= scale;
      m[k]->array() = b1 * m[k]->array() + (T(1) - b1) * g[k]->array();
      v[k]->array() = b2 * v[k]->array() + (T(1) - b2) * g[k]->array().square();
      p[k]->array() -= step_size * m[k]->array() / (v[k]->array().sqrt() * inv_sqrt_bc2 + eps);
    }
    return norm;
  }

  // Feeds one dev score, compared lexicographically with an optional
  // tie-break score; halves the learning rate after `decay_patience`
  // evaluations without a new best. Returns true when the score is a new best.
  // The tie-break keeps a run from decaying while the primary score is
  // still flat at zero early on.
  bool report_dev(double score, double tie_break = 0) {
    const std::pair<double, double> key{score, tie_break};
    if (!best_ || key > *best_) {
      best_ = key;
      stalled_ = 0;
      return true;
    }
    if (++stalled_ >= config_.decay_patience) {
      base_lr_ *= config_.decay_factor;
      stalled_ = 0;
    }
    return false;
  }

 private:
  OptimizerConfig config_;
  Weights<T> m_, v_;
  double base_lr_;
  std::size_t step_ = 0;
  std::optional<std::pair<double, double>> best_;
  std::size_t stalled_ = 0;
};

}  // namespace spanparse

#endif  // SPANPARSE_OPTIMIZER_HPP_
