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


#ifndef SPANPARSE_SPANPARSE_HPP_
#define SPANPARSE_SPANPARSE_HPP_

// Convenience header for the whole library (the CLI lives in cli.hpp).

#include "spanparse/chart.hpp"
#include "spanparse/checkpoint.hpp"
#include "spanparse/error.hpp"
#include "spanparse/eval.hpp"
#include "spanparse/grammars.hpp"
#include "spanparse/model.hpp"
#include "spanparse/optimizer.hpp"
#include "spanparse/pipeline.hpp"
#include "spanparse/rng.hpp"
#include "spanparse/span_chart.hpp"
#include "spanparse/synthgen.hpp"
#include "spanparse/treebank.hpp"

#endif  // SPANPARSE_SPANPARSE_HPP_
