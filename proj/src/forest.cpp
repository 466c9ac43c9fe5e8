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

#include "solverank/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "solverank/error.hpp"
#include "solverank/io_util.hpp"

namespace solverank::forest {

namespace {

using Json = nlohmann::ordered_json;

double impurity_of(double w, std::span<const double> wy,
                   std::span<const double> wyy) {
  if (w <= 0.0) return 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < wy.size(); ++j) {
    total += std::max(0.0, wyy[j] - wy[j] * wy[j] / w);
  }
  return total;
}

double midpoint(double a, double b) {
  const double m = a + (b - a) / 2;
  return m < b ? m : a;
}

std::vector<double> leaf_value(const TrainingSet& ts,
                               std::span<const std::size_t> rows) {
  const std::size_t k = ts.roster.size();
  std::vector<double> sum(k, 0.0);
  double w = 0.0;
  for (std::size_t r : rows) w += ts.rows[r].weight;
  const bool weighted = w > 0.0;
  if (!weighted) w = static_cast<double>(rows.size());
  for (std::size_t r : rows) {
    const double rw = weighted ? ts.rows[r].weight : 1.0;
    for (std::size_t j = 0; j < k; ++j) sum[j] += rw * ts.rows[r].costs[j];
  }
  for (double& s : sum) s /= w;
  return sum;
}

bool targets_equal(const TrainingSet& ts, std::span<const std::size_t> rows) {
  for (std::size_t r : rows) {
    if (ts.rows[r].costs != ts.rows[rows.front()].costs) return false;
  }
  return true;
}

class TreeBuilder {
 public:
  TreeBuilder(const TrainingSet& ts, const Hyperparameters& hp,
              std::uint64_t seed)
      : ts_(ts), hp_(hp), rng_(seed) {}

  Tree build(std::vector<std::size_t> rows) {
    if (rows.empty()) throw DataError("cannot train a tree on an empty set");
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  std::vector<std::size_t> candidate_features() {
    std::vector<std::size_t> all(kFeatureCount);
    std::iota(all.begin(), all.end(), std::size_t{0});
    const std::size_t m = std::clamp<std::size_t>(hp_.max_features, 1, kFeatureCount);
    if (m == kFeatureCount) return all;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = i + uniform_index(rng_, kFeatureCount - i);
      std::swap(all[i], all[j]);
    }
    all.resize(m);
    std::sort(all.begin(), all.end());
    return all;
  }

  std::uint32_t grow(std::vector<std::size_t> rows, std::size_t depth) {
    const auto index = static_cast<std::uint32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    auto make_leaf = [&] {
      tree_.nodes[index].value = leaf_value(ts_, rows);
      return index;
    };
    if (rows.size() < 2 * hp_.min_samples_leaf || targets_equal(ts_, rows) ||
        (hp_.max_depth && depth >= *hp_.max_depth)) {
      return make_leaf();
    }
    const auto feats = candidate_features();
    const auto split = best_split(ts_, rows, feats, hp_.min_samples_leaf);
    if (!split) return make_leaf();
    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) {
      (ts_.rows[r].features[split->feature] <= split->threshold ? left : right)
          .push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    tree_.nodes[index].feature = static_cast<int>(split->feature);
    tree_.nodes[index].threshold = split->threshold;
    const std::uint32_t l = grow(std::move(left), depth + 1);
    const std::uint32_t r = grow(std::move(right), depth + 1);
    tree_.nodes[index].left = l;
    tree_.nodes[index].right = r;
    return index;
  }

  const TrainingSet& ts_;
  const Hyperparameters& hp_;
  std::mt19937_64 rng_;
  Tree tree_;
};

Json node_to_json(const Tree& tree, std::uint32_t i) {
  const Tree::Node& n = tree.nodes[i];
  Json j;
  if (n.is_leaf()) {
    j["value"] = n.value;
  } else {
    j["feature"] = n.feature;
    j["threshold"] = n.threshold;
    j["left"] = node_to_json(tree, n.left);
    j["right"] = node_to_json(tree, n.right);
  }
  return j;
}

[[noreturn]] void schema_error(const std::string& path, const std::string& msg) {
  throw DataError(fmt::format("model schema violation at {}: {}",
                              path.empty() ? "/" : path, msg));
}

const Json& member(const Json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(path, fmt::format("missing key '{}'", key));
  return *it;
}

std::uint64_t as_uint(const Json& j, const std::string& path) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
    schema_error(path, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

double as_finite(const Json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) schema_error(path, "expected a finite number");
  return x;
}

std::uint32_t node_from_json(const Json& j, const std::string& path,
                             std::size_t outputs, Tree& tree) {
  if (!j.is_object()) schema_error(path, "expected a tree node object");
  const auto index = static_cast<std::uint32_t>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (j.contains("value")) {
    const Json& v = j["value"];
    if (!v.is_array() || v.size() != outputs) {
      schema_error(path + "/value",
                   fmt::format("expected an array of {} numbers", outputs));
    }
    std::vector<double> value;
    for (std::size_t i = 0; i < v.size(); ++i) {
      value.push_back(as_finite(v[i], fmt::format("{}/value/{}", path, i)));
    }
    tree.nodes[index].value = std::move(value);
    return index;
  }
  const std::uint64_t feature = as_uint(member(j, path, "feature"), path + "/feature");
  if (feature >= kFeatureCount) {
    schema_error(path + "/feature",
                 fmt::format("feature index {} out of range [0, {})", feature,
                             kFeatureCount));
  }
  const double threshold = as_finite(member(j, path, "threshold"), path + "/threshold");
  const Json& left = member(j, path, "left");
  const Json& right = member(j, path, "right");
  const std::uint32_t l = node_from_json(left, path + "/left", outputs, tree);
  const std::uint32_t r = node_from_json(right, path + "/right", outputs, tree);
  Tree::Node& n = tree.nodes[index];
  n.feature = static_cast<int>(feature);
  n.threshold = threshold;
  n.left = l;
  n.right = r;
  return index;
}

}  // namespace

std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  if (n == 0) throw Error("uniform_index: empty range");
  // 2^64 mod n; rejecting draws below it leaves a multiple of n outcomes.
  const std::uint64_t reject_below =
      (std::numeric_limits<std::uint64_t>::max() % n + 1) % n;
  std::uint64_t x = rng();
  while (x < reject_below) x = rng();
  return x % n;
}

void TrainingSet::validate() const {
  if (rows.size() < 2) {
    throw DataError(fmt::format("training needs at least 2 rows, got {}", rows.size()));
  }
  for (const TrainingRow& r : rows) {
    if (r.costs.size() != roster.size()) {
      throw DataError(fmt::format("task '{}' has {} costs for {} solvers",
                                  r.task_id, r.costs.size(), roster.size()));
    }
    if (!std::isfinite(r.weight) || r.weight < 0.0) {
      throw DataError(fmt::format("task '{}' has invalid weight {}", r.task_id,
                                  r.weight));
    }
    for (double x : r.features) {
      if (!std::isfinite(x)) {
        throw DataError(fmt::format("task '{}' has a non-finite feature", r.task_id));
      }
    }
  }
}

double sample_weight(std::span<const double> costs) {
  if (costs.empty()) throw DataError("sample_weight: empty cost vector");
  const double n = static_cast<double>(costs.size());
  const double mean = std::accumulate(costs.begin(), costs.end(), 0.0) / n;
  double ss = 0.0;
  for (double c : costs) ss += (c - mean) * (c - mean);
  return std::sqrt(ss / n);
}

TrainingSet make_training_set(const std::vector<features::TaskFeatures>& feats,
                              const cost::ResultsTable& results,
                              const cost::CostConfig& cfg, bool weighted) {
  std::set<std::string> feature_ids, result_ids;
  for (const auto& f : feats) {
    if (!feature_ids.insert(f.task_id).second) {
      throw DataError(fmt::format("task '{}' appears twice in the features", f.task_id));
    }
  }
  for (const auto& k : results.tasks()) result_ids.insert(k.id());
  if (feature_ids != result_ids) {
    std::vector<std::string> only_features, only_results;
    std::set_difference(feature_ids.begin(), feature_ids.end(), result_ids.begin(),
                        result_ids.end(), std::back_inserter(only_features));
    std::set_difference(result_ids.begin(), result_ids.end(), feature_ids.begin(),
                        feature_ids.end(), std::back_inserter(only_results));
    throw DataError(fmt::format(
        "features and results cover different tasks; only in features: [{}]; "
        "only in results: [{}]",
        fmt::join(only_features, ", "), fmt::join(only_results, ", ")));
  }
  TrainingSet ts;
  ts.roster = results.roster();
  for (const auto& f : feats) {
    const std::size_t task = results.task_index(f.task_id);
    TrainingRow row;
    row.task_id = f.task_id;
    row.file = results.tasks()[task].file;
    row.features = features::to_array(f.features);
    row.costs = cost::cost_vector(results, task, cfg);
    row.weight = weighted ? sample_weight(row.costs) : 1.0;
    ts.rows.push_back(std::move(row));
  }
  return ts;
}

std::span<const double> Tree::leaf_for(const FeatureArray& x) const {
  std::uint32_t i = 0;
  while (!nodes[i].is_leaf()) {
    const Node& n = nodes[i];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[i].value;
}

std::size_t Tree::depth() const {
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
  std::size_t deepest = 0;
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes[i].is_leaf()) {
      stack.push_back({nodes[i].left, d + 1});
      stack.push_back({nodes[i].right, d + 1});
    }
  }
  return deepest;
}

std::optional<SplitChoice> best_split(const TrainingSet& ts,
                                      std::span<const std::size_t> rows,
                                      std::span<const std::size_t> features,
                                      std::size_t min_samples_leaf) {
  const std::size_t n = rows.size();
  const std::size_t k = ts.roster.size();
  const std::size_t msl = std::max<std::size_t>(1, min_samples_leaf);
  if (n < 2 * msl) return std::nullopt;

  // Centre targets on the node mean to limit cancellation in the sums.
  std::vector<double> centre(k, 0.0);
  for (std::size_t r : rows) {
    for (std::size_t j = 0; j < k; ++j) centre[j] += ts.rows[r].costs[j];
  }
  for (double& c : centre) c /= static_cast<double>(n);

  std::vector<double> suffix_w(n + 1, 0.0), suffix_wy((n + 1) * k, 0.0),
      suffix_wyy((n + 1) * k, 0.0);
  std::vector<double> left_wy(k), left_wyy(k);
  std::vector<std::size_t> order(n);
  std::vector<SplitChoice> candidates;
  double parent = -1.0;

  std::vector<std::size_t> sorted_features(features.begin(), features.end());
  std::sort(sorted_features.begin(), sorted_features.end());
  for (std::size_t f : sorted_features) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return ts.rows[rows[a]].features[f] < ts.rows[rows[b]].features[f];
    });
    for (std::size_t p = n; p-- > 0;) {
      const TrainingRow& row = ts.rows[rows[order[p]]];
      suffix_w[p] = suffix_w[p + 1] + row.weight;
      for (std::size_t j = 0; j < k; ++j) {
        const double y = row.costs[j] - centre[j];
        suffix_wy[p * k + j] = suffix_wy[(p + 1) * k + j] + row.weight * y;
        suffix_wyy[p * k + j] = suffix_wyy[(p + 1) * k + j] + row.weight * y * y;
      }
    }
    if (parent < 0.0) {
      parent = impurity_of(suffix_w[0], {suffix_wy.data(), k},
                           {suffix_wyy.data(), k});
    }
    double left_w = 0.0;
    std::fill(left_wy.begin(), left_wy.end(), 0.0);
    std::fill(left_wyy.begin(), left_wyy.end(), 0.0);
    for (std::size_t p = 0; p + 1 < n; ++p) {
      const TrainingRow& row = ts.rows[rows[order[p]]];
      left_w += row.weight;
      for (std::size_t j = 0; j < k; ++j) {
        const double y = row.costs[j] - centre[j];
        left_wy[j] += row.weight * y;
        left_wyy[j] += row.weight * y * y;
      }
      const double here = row.features[f];
      const double next = ts.rows[rows[order[p + 1]]].features[f];
      if (here == next) continue;
      const std::size_t left_count = p + 1;
      if (left_count < msl || n - left_count < msl) continue;
      const double imp =
          impurity_of(left_w, left_wy, left_wyy) +
          impurity_of(suffix_w[p + 1], {suffix_wy.data() + (p + 1) * k, k},
                      {suffix_wyy.data() + (p + 1) * k, k});
      candidates.push_back({f, midpoint(here, next), imp});
    }
  }
  if (candidates.empty()) return std::nullopt;
  double lowest = candidates.front().impurity;
  for (const auto& c : candidates) lowest = std::min(lowest, c.impurity);
  const double tolerance = kSplitTieTolerance * (parent > 0.0 ? parent : 1.0);
  for (const auto& c : candidates) {
    if (c.impurity <= lowest + tolerance) return c;
  }
  return candidates.front();
}

Tree train_tree(const TrainingSet& ts, const Hyperparameters& hp,
                std::uint64_t seed) {
  if (ts.rows.empty()) throw DataError("cannot train a tree on an empty set");
  std::vector<std::size_t> rows(ts.rows.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return TreeBuilder(ts, hp, seed).build(std::move(rows));
}

ForestModel train_forest(const TrainingSet& ts, const Hyperparameters& hp,
                         std::uint64_t seed, unsigned jobs) {
  ts.validate();
  if (hp.trees == 0) throw ConfigError("a forest needs at least one tree");
  ForestModel m;
  m.roster = ts.roster;
  for (auto name : features::feature_names()) m.feature_names.emplace_back(name);
  m.seed = seed;
  m.hyperparameters = hp;
  m.trees.resize(hp.trees);
  io::parallel_for(hp.trees, jobs, [&](std::size_t t) {
    const std::uint64_t tree_seed = seed + t;
    if (!hp.bootstrap) {
      m.trees[t] = train_tree(ts, hp, tree_seed);
      return;
    }
    std::mt19937_64 rng(tree_seed);
    const std::size_t n = ts.rows.size();
    std::vector<std::size_t> sample(n);
    for (auto& s : sample) s = uniform_index(rng, n);
    // The builder continues the same stream for feature subsets.
    TreeBuilder builder(ts, hp, rng());
    m.trees[t] = builder.build(std::move(sample));
  });
  return m;
}

std::vector<double> predict(const ForestModel& m, const FeatureArray& x) {
  std::vector<double> sum(m.roster.size(), 0.0);
  for (const Tree& t : m.trees) {
    const auto leaf = t.leaf_for(x);
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += leaf[j];
  }
  for (double& s : sum) s /= static_cast<double>(m.trees.size());
  return sum;
}

cost::SolverRanking predict_ranking(const ForestModel& m, const FeatureArray& x) {
  return cost::rank_by_cost(predict(m, x));
}

std::vector<Fold> kfold_splits(const TrainingSet& ts, std::size_t k,
                               std::uint64_t seed) {
  if (k < 2) throw ConfigError(fmt::format("need at least 2 folds, got {}", k));
  std::set<std::string> distinct;
  for (const auto& r : ts.rows) distinct.insert(r.file);
  if (distinct.size() < k) {
    throw DataError(fmt::format("{} folds requested but only {} distinct files",
                                k, distinct.size()));
  }
  std::vector<std::string> files(distinct.begin(), distinct.end());
  std::mt19937_64 rng(seed);
  for (std::size_t i = files.size(); i > 1; --i) {
    std::swap(files[i - 1], files[uniform_index(rng, i)]);
  }
  std::vector<Fold> folds(k);
  std::map<std::string, std::size_t> fold_of;
  for (std::size_t i = 0; i < files.size(); ++i) {
    fold_of[files[i]] = i % k;
    folds[i % k].validation_files.push_back(files[i]);
  }
  for (std::size_t r = 0; r < ts.rows.size(); ++r) {
    const std::size_t home = fold_of.at(ts.rows[r].file);
    for (std::size_t f = 0; f < k; ++f) {
      (f == home ? folds[f].validation : folds[f].train).push_back(r);
    }
  }
  return folds;
}

TrainingSet subset(const TrainingSet& ts, std::span<const std::size_t> rows) {
  TrainingSet out;
  out.roster = ts.roster;
  for (std::size_t r : rows) out.rows.push_back(ts.rows.at(r));
  return out;
}

std::string serialize(const ForestModel& m) {
  Json j;
  j["format_version"] = 1;
  Json solvers = Json::array();
  for (const auto& s : m.roster) {
    solvers.push_back(Json{{"name", s.name}, {"version", s.version}});
  }
  j["solvers"] = std::move(solvers);
  j["feature_names"] = m.feature_names;
  j["seed"] = m.seed;
  Json hp;
  hp["trees"] = m.hyperparameters.trees;
  if (m.hyperparameters.max_depth) {
    hp["max_depth"] = *m.hyperparameters.max_depth;
  } else {
    hp["max_depth"] = nullptr;
  }
  hp["min_samples_leaf"] = m.hyperparameters.min_samples_leaf;
  hp["max_features"] = m.hyperparameters.max_features;
  hp["bootstrap"] = m.hyperparameters.bootstrap;
  j["hyperparameters"] = std::move(hp);
  Json trees = Json::array();
  for (const Tree& t : m.trees) trees.push_back(node_to_json(t, 0));
  j["trees"] = std::move(trees);
  return j.dump() + "\n";
}

ForestModel deserialize(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("model is not valid JSON: {}", e.what()));
  }
  ForestModel m;
  const Json& version = member(j, "", "format_version");
  if (!version.is_number_integer() || version.get<std::int64_t>() != 1) {
    schema_error("/format_version", "only format_version 1 is supported");
  }
  const Json& solvers = member(j, "", "solvers");
  if (!solvers.is_array() || solvers.empty()) {
    schema_error("/solvers", "expected a non-empty array");
  }
  for (std::size_t i = 0; i < solvers.size(); ++i) {
    const std::string path = fmt::format("/solvers/{}", i);
    const Json& name = member(solvers[i], path, "name");
    const Json& ver = member(solvers[i], path, "version");
    if (!name.is_string()) schema_error(path + "/name", "expected a string");
    if (!ver.is_string()) schema_error(path + "/version", "expected a string");
    m.roster.push_back({name.get<std::string>(), ver.get<std::string>()});
  }
  const Json& names = member(j, "", "feature_names");
  if (!names.is_array() || names.size() != kFeatureCount) {
    schema_error("/feature_names",
                 fmt::format("expected an array of {} names", kFeatureCount));
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!names[i].is_string() ||
        names[i].get<std::string>() != features::feature_names()[i]) {
      schema_error(fmt::format("/feature_names/{}", i),
                   fmt::format("expected '{}'", features::feature_names()[i]));
    }
    m.feature_names.push_back(names[i].get<std::string>());
  }
  m.seed = as_uint(member(j, "", "seed"), "/seed");
  const Json& hp = member(j, "", "hyperparameters");
  m.hyperparameters.trees = as_uint(member(hp, "/hyperparameters", "trees"),
                                    "/hyperparameters/trees");
  const Json& depth = member(hp, "/hyperparameters", "max_depth");
  if (!depth.is_null()) {
    m.hyperparameters.max_depth = as_uint(depth, "/hyperparameters/max_depth");
  }
  m.hyperparameters.min_samples_leaf =
      as_uint(member(hp, "/hyperparameters", "min_samples_leaf"),
              "/hyperparameters/min_samples_leaf");
  if (hp.contains("max_features")) {
    m.hyperparameters.max_features =
        as_uint(hp["max_features"], "/hyperparameters/max_features");
  }
  if (hp.contains("bootstrap")) {
    if (!hp["bootstrap"].is_boolean()) {
      schema_error("/hyperparameters/bootstrap", "expected a boolean");
    }
    m.hyperparameters.bootstrap = hp["bootstrap"].get<bool>();
  }
  const Json& trees = member(j, "", "trees");
  if (!trees.is_array() || trees.empty()) {
    schema_error("/trees", "expected a non-empty array");
  }
  for (std::size_t i = 0; i < trees.size(); ++i) {
    Tree t;
    node_from_json(trees[i], fmt::format("/trees/{}", i), m.roster.size(), t);
    m.trees.push_back(std::move(t));
  }
  return m;
}

}  // namespace solverank::forest
