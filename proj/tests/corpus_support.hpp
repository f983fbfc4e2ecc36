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

#ifndef SPANPARSE_TESTS_CORPUS_SUPPORT_HPP_
#define SPANPARSE_TESTS_CORPUS_SUPPORT_HPP_

// Small synthetic corpora and model configs for pipeline-level tests.

#include <cstdint>

#include "spanparse/pipeline.hpp"
#include "spanparse/synthgen.hpp"

namespace spanparse::testing {

inline Corpus synthetic_corpus(std::size_t n, std::uint64_t seed, Provenance prov = Provenance::kGold) {
  Rng rng(seed);
  Corpus c;
  c.provenance = prov;
  for (auto& e : generate_annotated(Grammar::conversational(), {}, rng, n)) {
    c.entries.push_back(CorpusEntry{words(e.tree), std::move(e.tree)});
  }
  return c;
}

inline TrainConfig tiny_config(std::size_t epochs = 2) {
  TrainConfig tc;
  tc.encoder.d_model = 16;
  tc.encoder.n_heads = 2;
  tc.encoder.n_layers = 1;
  tc.encoder.d_ff = 32;
  tc.encoder.d_span = 16;
  tc.batch_size = 10;
  tc.epochs = epochs;
  tc.optimizer.warmup_steps = 5;
  tc.optimizer.learning_rate = 3e-3;
  return tc;
}

}  // namespace spanparse::testing

#endif  // SPANPARSE_TESTS_CORPUS_SUPPORT_HPP_
