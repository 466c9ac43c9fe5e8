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

// Multi-output regression forest mapping feature arrays to per-solver cost
// vectors.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "solverank/cost_model.hpp"
#include "solverank/features.hpp"

namespace solverank::forest {

using features::FeatureArray;
using features::kFeatureCount;

struct TrainingRow {
  std::string task_id;
  std::string file;
  FeatureArray features{};
  std::vector<double> costs;
  double weight = 1.0;
};

struct TrainingSet {
  std::vector<cost::SolverId> roster;
  std::vector<TrainingRow> rows;

  // Throws DataError on ragged cost vectors, bad weights or < 2 rows.
  void validate() const;
};

// Population standard deviation of the costs.
double sample_weight(std::span<const double> costs);

// Joins feature rows with recorded results. Every task id must appear in
// both inputs; otherwise DataError lists the symmetric difference.
TrainingSet make_training_set(const std::vector<features::TaskFeatures>& feats,
                              const cost::ResultsTable& results,
                              const cost::CostConfig& cfg, bool weighted);

struct Hyperparameters {
  std::size_t trees = 100;
  std::optional<std::size_t> max_depth;  // unlimited when empty
  std::size_t min_samples_leaf = 1;
  std::size_t max_features = kFeatureCount;
  bool bootstrap = true;
};

// Flat binary tree; nodes[0] is the root. Descend left iff
// x[feature] <= threshold.
struct Tree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::vector<double> value;  // leaves only

    bool is_leaf() const { return feature < 0; }
    friend bool operator==(const Node&, const Node&) = default;
  };
  std::vector<Node> nodes;

  std::span<const double> leaf_for(const FeatureArray& x) const;
  std::size_t depth() const;
  friend bool operator==(const Tree&, const Tree&) = default;
};

struct ForestModel {
  std::vector<cost::SolverId> roster;
  std::vector<std::string> feature_names;
  std::uint64_t seed = 0;
  Hyperparameters hyperparameters;
  std::vector<Tree> trees;
};

// Candidate splits within this relative distance of the best impurity are
// treated as ties and resolved by lowest feature, then lowest threshold.
inline constexpr double kSplitTieTolerance = 1e-10;

struct SplitChoice {
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity = 0.0;  // weighted SSE summed over children and outputs
};

// Best split of `rows` (indices into ts.rows, repeats allowed) over the
// given candidate features, or nullopt when no split leaves at least
// min_samples_leaf rows on each side.
std::optional<SplitChoice> best_split(const TrainingSet& ts,
                                      std::span<const std::size_t> rows,
                                      std::span<const std::size_t> features,
                                      std::size_t min_samples_leaf);

// One tree over all rows of ts (no resampling). The seed drives the
// per-node feature subset when max_features < 28.
Tree train_tree(const TrainingSet& ts, const Hyperparameters& hp,
                std::uint64_t seed);

// Tree i uses seed + i for its bootstrap sample and feature subsets, so the
// result does not depend on `jobs`.
ForestModel train_forest(const TrainingSet& ts, const Hyperparameters& hp,
                         std::uint64_t seed, unsigned jobs = 1);

std::vector<double> predict(const ForestModel& m, const FeatureArray& x);
cost::SolverRanking predict_ranking(const ForestModel& m, const FeatureArray& x);

struct Fold {
  std::vector<std::string> validation_files;
  std::vector<std::size_t> train;       // row indices
  std::vector<std::size_t> validation;  // row indices
};

// Partitions distinct file keys (not rows) into k folds.
std::vector<Fold> kfold_splits(const TrainingSet& ts, std::size_t k,
                               std::uint64_t seed);

TrainingSet subset(const TrainingSet& ts, std::span<const std::size_t> rows);

std::string serialize(const ForestModel& m);
// Throws DataError with a JSON-pointer location on schema violations.
ForestModel deserialize(std::string_view json_text);

// Unbiased draw from [0, n).
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n);

}  // namespace solverank::forest
