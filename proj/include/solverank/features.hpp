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

// Syntactic feature vectors for proof tasks.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "solverank/logic.hpp"

namespace solverank::features {

// Individual node counters, in canonical column order.
enum class Counter : std::size_t {
  And,
  Or,
  Not,
  Let,
  As,
  Eps,
  Func,
  If,
  Iff,
  Imp,
  Case,
  Var,
  True,
  False,
  Wild,
  ZeroAr,
  Int,
  Float,
  Forall,
  Exists,
};

inline constexpr std::size_t kCounterCount = 20;
inline constexpr std::size_t kFeatureCount = 28;

using FeatureArray = std::array<double, kFeatureCount>;

// The counter each AST node kind increments.
Counter counter_for(logic::TermKind kind);

struct FeatureVector {
  std::array<std::uint64_t, kCounterCount> counts{};
  std::uint64_t depth = 0;
  double avg_arity = 0.0;

  std::uint64_t count(Counter c) const {
    return counts[static_cast<std::size_t>(c)];
  }

  std::uint64_t divisor() const;
  std::uint64_t conds() const;
  std::uint64_t ops() const;
  std::uint64_t leaves() const;
  std::uint64_t quants() const;
  std::uint64_t size() const;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// A goal together with the lemmas counted alongside it.
struct TaskScope {
  logic::Declaration goal;
  std::vector<logic::Declaration> context;
};

FeatureVector extract_task_features(const TaskScope& scope);

struct TaskFeatures {
  std::string task_id;  // "file:theory:goal"
  FeatureVector features;
};

// One scope per goal: the goal plus every lemma declared before it in the
// same theory.
std::vector<TaskScope> task_scopes(const logic::Theory& theory);

std::string make_task_id(std::string_view file, std::string_view theory,
                         std::string_view goal);

std::vector<TaskFeatures> extract_document_features(const logic::Document& doc,
                                                    unsigned jobs = 1);

FeatureArray to_array(const FeatureVector& v);

// Inverse of to_array. Throws DataError if the aggregate columns disagree
// with the counters or a counter is not a non-negative integer.
FeatureVector from_array(const FeatureArray& a);

const std::array<std::string_view, kFeatureCount>& feature_names();

// CSV: header task_id,<feature names>.
void write_features_csv(std::ostream& out, const std::vector<TaskFeatures>& rows);
std::vector<TaskFeatures> read_features_csv(std::istream& in,
                                            const std::string& source_name);

}  // namespace solverank::features
