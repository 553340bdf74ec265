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

#include "transitchoice/features.hpp"

#include <cmath>

namespace tc {

Eigen::Vector4d transform_route(const Route& r, const TransformSpec& spec) {
  Eigen::Vector4d x;
  const double ivtt_min = static_cast<double>(r.ivtt_seconds) / 60.0;
  const double fare_dollars = static_cast<double>(r.fare_cents) / 100.0;
  x(0) = std::log(std::max(ivtt_min, spec.ivtt_floor_minutes));
  x(1) = std::log(std::max(fare_dollars, spec.fare_floor_dollars));
  x(2) = std::log((static_cast<double>(r.walk_transfer_seconds) + spec.walk_offset_seconds) / 60.0);
  x(3) = std::log(static_cast<double>(r.num_transfers) + spec.transfers_offset);
  return x;
}

void feature_row(const Route& r, CardType card, const TransformSpec& spec, bool with_context,
                 double* out) {
  Eigen::Vector4d x = transform_route(r, spec);
  out[0] = x(0);
  out[1] = x(1);
  out[2] = x(2);
  out[3] = x(3);
  if (!with_context) return;
  double* p = out + kPolicyDim;
  for (int i = 0; i < kCardDim; ++i) p[i] = (static_cast<int>(card) == i) ? 1.0 : 0.0;
  p += kCardDim;
  for (int i = 0; i < kLanduseDim; ++i) p[i] = r.origin_landuse[i];
  p += kLanduseDim;
  for (int i = 0; i < kLanduseDim; ++i) p[i] = r.dest_landuse[i];
  p += kLanduseDim;
  for (int i = 0; i < kLanduseDim; ++i) p[i] = r.transfer_landuse[i];
}

FeatureMatrix assemble_features(const ChoiceObservation& obs, const TransformSpec& spec,
                                bool with_context) {
  obs.validate();
  const int d = with_context ? kContextFeatureDim : kPolicyDim;
  const int n = static_cast<int>(obs.alternatives.size());
  Mat rows(n, d);
  for (int i = 0; i < n; ++i) {
    feature_row(obs.alternatives[i], obs.card_type, spec, with_context, rows.row(i).data());
  }
  FeatureMatrix fm = pad_and_mask(obs, rows);
  fm.policy_dim = kPolicyDim;
  return fm;
}

std::vector<std::string> feature_names(bool with_context) {
  std::vector<std::string> names = {"IVTT", "Fare", "WT", "NoT"};
  if (!with_context) return names;
  for (int i = 0; i < kCardDim; ++i) {
    names.push_back(std::string("Card:") + to_string(static_cast<CardType>(i)));
  }
  for (const char* prefix : {"OrigLU:", "DestLU:", "XferLU:"}) {
    for (const auto& lu : landuse_names()) names.push_back(prefix + lu);
  }
  return names;
}

namespace {

// Joint expansion of one contiguous block: linear copies then products.
void expand_block_row(const double* x, int d, double* out) {
  int64_t k = 0;
  for (int i = 0; i < d; ++i) out[k++] = x[i];
  for (int i = 0; i < d; ++i) {
    const double xi = x[i];
    for (int j = i; j < d; ++j) out[k++] = xi * x[j];
  }
}

void block_provenance(int offset, int d, std::vector<ColumnProvenance>& out) {
  for (int i = 0; i < d; ++i) out.push_back({offset + i, -1});
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) out.push_back({offset + i, offset + j});
  }
}

}  // namespace

int64_t expanded_dim(int d, const ExpansionSpec& spec) {
  switch (spec.mode) {
    case ExpansionMode::None:
      return d;
    case ExpansionMode::JointQuadratic:
      return joint_quadratic_dim(d);
    case ExpansionMode::SeparatedQuadratic: {
      if (d < spec.policy_dim) {
        throw StructuralError("separated expansion needs at least the policy block");
      }
      return joint_quadratic_dim(spec.policy_dim) + joint_quadratic_dim(d - spec.policy_dim);
    }
  }
  return d;
}

void expand_row(const double* x, int d, const ExpansionSpec& spec, double* out) {
  switch (spec.mode) {
    case ExpansionMode::None:
      std::copy(x, x + d, out);
      return;
    case ExpansionMode::JointQuadratic:
      expand_block_row(x, d, out);
      return;
    case ExpansionMode::SeparatedQuadratic: {
      const int p = spec.policy_dim;
      expand_block_row(x, p, out);
      expand_block_row(x + p, d - p, out + joint_quadratic_dim(p));
      return;
    }
  }
}

Mat expand(const Mat& x, const ExpansionSpec& spec) {
  const int d = static_cast<int>(x.cols());
  const int64_t D = expanded_dim(d, spec);
  Mat out(x.rows(), D);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    expand_row(x.row(r).data(), d, spec, out.row(r).data());
  }
  return out;
}

std::vector<ColumnProvenance> expansion_provenance(int d, const ExpansionSpec& spec) {
  std::vector<ColumnProvenance> out;
  out.reserve(static_cast<size_t>(expanded_dim(d, spec)));
  switch (spec.mode) {
    case ExpansionMode::None:
      for (int i = 0; i < d; ++i) out.push_back({i, -1});
      break;
    case ExpansionMode::JointQuadratic:
      block_provenance(0, d, out);
      break;
    case ExpansionMode::SeparatedQuadratic:
      block_provenance(0, spec.policy_dim, out);
      block_provenance(spec.policy_dim, d - spec.policy_dim, out);
      break;
  }
  return out;
}

std::vector<std::string> expansion_names(const std::vector<std::string>& input_names,
                                         const ExpansionSpec& spec) {
  auto prov = expansion_provenance(static_cast<int>(input_names.size()), spec);
  std::vector<std::string> out;
  out.reserve(prov.size());
  for (const auto& p : prov) {
    out.push_back(p.is_product() ? input_names[p.i] + "\xC3\x97" + input_names[p.j]
                                 : input_names[p.i]);
  }
  return out;
}

FeatureMatrix expand(const FeatureMatrix& fm, const ExpansionSpec& spec) {
  const int d = fm.feature_dim();
  const int64_t D = expanded_dim(d, spec);
  if (D > 1000000) throw StructuralError(strf("expansion to %lld columns exceeds budget",
                                              static_cast<long long>(D)));
  FeatureMatrix out;
  out.values = Mat::Zero(fm.values.rows(), D);
  for (int r = 0; r < fm.n_real; ++r) {
    expand_row(fm.values.row(r).data(), d, spec, out.values.row(r).data());
  }
  out.mask = fm.mask;
  out.chosen = fm.chosen;
  out.n_real = fm.n_real;
  out.policy_dim = spec.mode == ExpansionMode::None
                       ? fm.policy_dim
                       : (spec.mode == ExpansionMode::SeparatedQuadratic || d == kPolicyDim
                              ? static_cast<int>(joint_quadratic_dim(fm.policy_dim))
                              : fm.policy_dim);
  return out;
}

}  // namespace tc
