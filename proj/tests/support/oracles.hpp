// Copyright 2026 The solverank Authors
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

// Reference implementations used to check the library. Each one is written
// from the definitions directly and shares no code with src/.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "solverank/logic.hpp"

namespace oracle {

// Three-case cost with answers given by name.
double cost(const std::string& answer, double time, double timeout);

// ---- documents -------------------------------------------------------------

struct GeneratorOptions {
  std::size_t max_theories = 3;
  std::size_t max_decls = 5;
  std::size_t max_depth = 5;
};

solverank::logic::Document random_document(std::mt19937_64& rng,
                                           const GeneratorOptions& opt = {});

// Node counts keyed by the feature-column name of each node kind.
std::map<std::string, std::uint64_t> count_nodes(const solverank::logic::Term& t);
std::size_t height(const solverank::logic::Term& t);
std::uint64_t apply_arguments(const solverank::logic::Term& t);

// ---- splits ----------------------------------------------------------------

struct SplitProblem {
  std::vector<std::vector<double>> x;  // rows x features
  std::vector<std::vector<double>> y;  // rows x outputs
  std::vector<double> w;
};

struct SplitAnswer {
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity = 0.0;
};

// Tries every feature and every cut between distinct sorted values. Impurity
// is weighted SSE around the weighted mean, computed in two passes. Among
// candidates within `tie_tolerance * parent` of the minimum the first in
// (feature, threshold) order wins.
std::optional<SplitAnswer> exhaustive_split(const SplitProblem& p,
                                            const std::vector<std::size_t>& features,
                                            std::size_t min_samples_leaf,
                                            double tie_tolerance);

// ---- rankings --------------------------------------------------------------

using Ranking = std::vector<std::size_t>;
using Relevance = std::function<double(std::size_t position, std::size_t p)>;

double linear_relevance(std::size_t position, std::size_t p);
double reciprocal_relevance(std::size_t position, std::size_t p);

// Gain 2^rel - 1 at 1-based slot i, discounted by log2(i + 1).
double ndcg(const Ranking& ranking, const Ranking& truth, const Relevance& rel);
double ndcg_minimum(std::size_t p, const Relevance& rel);
double mae(const Ranking& ranking, const Ranking& truth);

void for_each_permutation(std::size_t p, const std::function<void(const Ranking&)>& f);

// ---- calibration -----------------------------------------------------------

// Smallest observed time c with at least `percent`% of the values <= c.
double percentile_cutoff(std::vector<double> times, int percent);

}  // namespace oracle
