#pragma once
//------------------------------------------------------------------------------
//
//   Copyright 2025-2026 The transitchoice authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include "transitchoice/common.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace tc {

constexpr int kMaxAlternatives = 30;  // 6 categories x 5 fastest routes
constexpr int kLanduseDim = 30;
constexpr int kPolicyDim = 4;      // IVTT, Fare, WT, NoT
constexpr int kCardDim = 3;        // Student, Adult, Senior
constexpr int kContextFeatureDim = kPolicyDim + kCardDim + 3 * kLanduseDim;  // 97

enum class Mode : uint8_t { Bus, Rail };

enum class Category : uint8_t { Bus, BusBus, Rail, BusRail, RailBus, BusRailBus };
constexpr int kNumCategories = 6;

enum class CardType : uint8_t { Student, Adult, Senior };

const char* to_string(Mode m);
const char* to_string(Category c);
const char* to_string(CardType c);
Mode mode_from_string(const std::string& s);
Category category_from_string(const std::string& s);
CardType card_from_string(const std::string& s);

// Transfers implied by the route category.
int category_transfers(Category c);

// Zoning category names for the 30-dimensional land-use vectors.
const std::array<std::string, kLanduseDim>& landuse_names();

using Landuse = std::array<double, kLanduseDim>;

inline Landuse zero_landuse() {
  Landuse z{};
  return z;
}

// One route alternative with raw (untransformed) attributes.
struct Route {
  int64_t ivtt_seconds = 0;
  int64_t fare_cents = 0;
  int64_t walk_transfer_seconds = 0;
  int num_transfers = 0;
  std::vector<int32_t> links;
  std::vector<double> link_costs;  // per-link travel time, seconds
  Category category = Category::Bus;
  Landuse origin_landuse{};
  Landuse dest_landuse{};
  Landuse transfer_landuse{};  // zero vector when the route has no transfer

  void validate() const;  // throws StructuralError
  bool operator==(const Route&) const = default;
};

// One journey: a choice set plus the observed decision.
struct ChoiceObservation {
  std::pair<int32_t, int32_t> od{0, 0};
  std::vector<Route> alternatives;
  int chosen = 0;
  CardType card_type = CardType::Adult;

  void validate() const;  // throws StructuralError
  bool operator==(const ChoiceObservation&) const = default;
};

// Fixed-shape per-observation feature block. Rows beyond the real alternatives
// are zero and masked out.
struct FeatureMatrix {
  Mat values;                  // [kMaxAlternatives x feature_dim]
  std::vector<uint8_t> mask;   // 1 = real alternative
  int chosen = 0;
  int policy_dim = kPolicyDim;
  int n_real = 0;

  int feature_dim() const { return static_cast<int>(values.cols()); }
};

FeatureMatrix pad_and_mask(const ChoiceObservation& obs, const Mat& features);

struct ParameterTable {
  std::vector<std::string> names;
  Vec estimates;
  std::optional<Vec> std_errors;
  std::optional<Vec> t_stats;
  std::vector<uint8_t> frozen;

  size_t size() const { return names.size(); }
  void validate() const;
};

struct SplitMetrics {
  double train_loss = 0;
  double valid_loss = 0;
  double train_acc = 0;
  double valid_acc = 0;
};

struct EvalReport {
  std::string model_id;
  int feature_count = 0;
  int64_t parameter_count = 0;   // utility-head coefficients, frozen included
  int64_t trainable_count = 0;
  std::vector<SplitMetrics> per_fold;
  SplitMetrics mean;
  SplitMetrics stddev;           // sample std over folds (ddof = 1)
  ParameterTable parameters;     // fold-mean estimates; std_errors = fold spread
  double rho_sq_adj = std::numeric_limits<double>::quiet_NaN();  // DCMs only

  void finalize();  // fills mean/stddev from per_fold
};

}  // namespace tc
