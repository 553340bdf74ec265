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

#include "transitchoice/core.hpp"

namespace tc {

// Log transforms applied to the four policy attributes. Floors and offsets keep
// the logs finite; they are part of the modeled utility, not data cleaning.
struct TransformSpec {
  double ivtt_floor_minutes = 2.0;
  double fare_floor_dollars = 0.92;
  double walk_offset_seconds = 1.0;
  double transfers_offset = 1.0;

  void validate() const {
    if (ivtt_floor_minutes <= 0 || fare_floor_dollars <= 0 || walk_offset_seconds <= 0 ||
        transfers_offset <= 0) {
      throw ConfigError("transform floors/offsets must be strictly positive");
    }
  }
};

enum class ExpansionMode : uint8_t { None, JointQuadratic, SeparatedQuadratic };

struct ExpansionSpec {
  ExpansionMode mode = ExpansionMode::None;
  int policy_dim = kPolicyDim;
};

// [ln(max(ivtt_min, floor)), ln(max(fare_$, floor)), ln((walk_s+1)/60), ln(transfers+1)]
Eigen::Vector4d transform_route(const Route& r, const TransformSpec& spec);

// Per-alternative feature row: 4 policy columns, then with context the card-type
// one-hot and the origin/destination/transfer land-use vectors (97 columns total).
void feature_row(const Route& r, CardType card, const TransformSpec& spec, bool with_context,
                 double* out);

FeatureMatrix assemble_features(const ChoiceObservation& obs, const TransformSpec& spec,
                                bool with_context);

// Names for the unexpanded feature columns (4 or 97).
std::vector<std::string> feature_names(bool with_context);

// Expanded column count for a joint quadratic on d inputs: d + d(d+1)/2.
inline int64_t joint_quadratic_dim(int64_t d) { return d + d * (d + 1) / 2; }

// Source-column provenance of one expanded column: (i,-1) for a linear copy of
// input column i, (i,j) with i<=j for the product of input columns i and j.
// Separated expansions index into the original unexpanded layout.
struct ColumnProvenance {
  int i = 0;
  int j = -1;
  bool is_product() const { return j >= 0; }
};

// Row-wise quadratic expansion: all linear columns first, then upper-triangular
// products (i,j), i<=j, in row-major order. Separated mode expands the policy
// block and the remainder independently and concatenates (no cross terms).
Mat expand(const Mat& x, const ExpansionSpec& spec);

// Single-row variant writing into a preallocated buffer (hot path).
void expand_row(const double* x, int d, const ExpansionSpec& spec, double* out);

int64_t expanded_dim(int d, const ExpansionSpec& spec);

std::vector<ColumnProvenance> expansion_provenance(int d, const ExpansionSpec& spec);

std::vector<std::string> expansion_names(const std::vector<std::string>& input_names,
                                         const ExpansionSpec& spec);

FeatureMatrix expand(const FeatureMatrix& fm, const ExpansionSpec& spec);

}  // namespace tc
