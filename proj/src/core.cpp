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

#include <cmath>

namespace tc {

const char* to_string(Mode m) { return m == Mode::Bus ? "bus" : "rail"; }

const char* to_string(Category c) {
  switch (c) {
    case Category::Bus: return "Bus";
    case Category::BusBus: return "BusBus";
    case Category::Rail: return "Rail";
    case Category::BusRail: return "BusRail";
    case Category::RailBus: return "RailBus";
    case Category::BusRailBus: return "BusRailBus";
  }
  return "?";
}

const char* to_string(CardType c) {
  switch (c) {
    case CardType::Student: return "Student";
    case CardType::Adult: return "Adult";
    case CardType::Senior: return "Senior";
  }
  return "?";
}

Mode mode_from_string(const std::string& s) {
  if (s == "bus") return Mode::Bus;
  if (s == "rail") return Mode::Rail;
  throw DataError("unknown mode: " + s);
}

Category category_from_string(const std::string& s) {
  for (int i = 0; i < kNumCategories; ++i) {
    Category c = static_cast<Category>(i);
    if (s == to_string(c)) return c;
  }
  throw DataError("unknown route category: " + s);
}

CardType card_from_string(const std::string& s) {
  for (int i = 0; i < kCardDim; ++i) {
    CardType c = static_cast<CardType>(i);
    if (s == to_string(c)) return c;
  }
  throw DataError("unknown card type: " + s);
}

int category_transfers(Category c) {
  switch (c) {
    case Category::Bus:
    case Category::Rail: return 0;
    case Category::BusBus:
    case Category::BusRail:
    case Category::RailBus: return 1;
    case Category::BusRailBus: return 2;
  }
  return 0;
}

const std::array<std::string, kLanduseDim>& landuse_names() {
  static const std::array<std::string, kLanduseDim> names = {
      "Utility",
      "Open Space",
      "Place of Worship",
      "Port/Airport",
      "Business 2",
      "Sports",
      "Recreation",
      "Waterbody",
      "Agriculture",
      "Special Use",
      "Commercial",
      "Residential",
      "Transport Facilities",
      "Commercial & Residential",
      "Civic & Community Institution",
      "Health & Medical Center",
      "Residential with Commercial at 1st storey",
      "Park",
      "Mass Rapid Transit",
      "Business 1",
      "Beach Area",
      "Light Rapid Transit",
      "Cemetery",
      "Business Park",
      "White",
      "Hotel",
      "Business 2 - White",
      "Business 1 - White",
      "Residential / Institution",
      "Business Park - White",
  };
  return names;
}

namespace {

void validate_landuse(const Landuse& lu, const char* which) {
  double sum = 0;
  for (double v : lu) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw StructuralError(strf("%s land-use entry %g outside [0,1]", which, v));
    }
    sum += v;
  }
  if (sum > 1.0 + 1e-9) {
    throw StructuralError(strf("%s land-use vector sums to %g > 1", which, sum));
  }
}

}  // namespace

void Route::validate() const {
  if (ivtt_seconds < 0 || fare_cents < 0 || walk_transfer_seconds < 0) {
    throw StructuralError("route has a negative raw attribute");
  }
  if (num_transfers < 0) throw StructuralError("negative transfer count");
  if (num_transfers != category_transfers(category)) {
    throw StructuralError(strf("category %s implies %d transfers, route has %d",
                               to_string(category), category_transfers(category),
                               num_transfers));
  }
  if (links.size() != link_costs.size()) {
    throw StructuralError("links and link_costs lengths differ");
  }
  validate_landuse(origin_landuse, "origin");
  validate_landuse(dest_landuse, "destination");
  validate_landuse(transfer_landuse, "transfer");
  if (num_transfers == 0) {
    for (double v : transfer_landuse) {
      if (v != 0.0) throw StructuralError("transfer land-use must be zero without transfers");
    }
  }
}

void ChoiceObservation::validate() const {
  if (alternatives.empty() || alternatives.size() > kMaxAlternatives) {
    throw StructuralError(strf("od (%d,%d): %zu alternatives outside 1..%d", od.first,
                               od.second, alternatives.size(), kMaxAlternatives));
  }
  if (chosen < 0 || chosen >= static_cast<int>(alternatives.size())) {
    throw StructuralError(strf("od (%d,%d): chosen index %d out of range", od.first,
                               od.second, chosen));
  }
  std::array<int, kNumCategories> per_cat{};
  for (const Route& r : alternatives) {
    r.validate();
    if (++per_cat[static_cast<int>(r.category)] > 5) {
      throw StructuralError(strf("od (%d,%d): more than 5 routes in category %s", od.first,
                                 od.second, to_string(r.category)));
    }
  }
}

FeatureMatrix pad_and_mask(const ChoiceObservation& obs, const Mat& features) {
  const int n = static_cast<int>(obs.alternatives.size());
  if (n > kMaxAlternatives) {
    throw StructuralError(strf("od (%d,%d): %d alternatives exceed the %d-row budget",
                               obs.od.first, obs.od.second, n, kMaxAlternatives));
  }
  if (features.rows() != n) {
    throw StructuralError(strf("od (%d,%d): feature rows %ld != alternatives %d",
                               obs.od.first, obs.od.second, static_cast<long>(features.rows()),
                               n));
  }
  FeatureMatrix fm;
  fm.values = Mat::Zero(kMaxAlternatives, features.cols());
  fm.values.topRows(n) = features;
  fm.mask.assign(kMaxAlternatives, 0);
  for (int i = 0; i < n; ++i) fm.mask[i] = 1;
  fm.chosen = obs.chosen;
  fm.n_real = n;
  return fm;
}

void ParameterTable::validate() const {
  const auto n = names.size();
  if (static_cast<size_t>(estimates.size()) != n || frozen.size() != n) {
    throw StructuralError("parameter table vectors have mismatched lengths");
  }
  if (std_errors && static_cast<size_t>(std_errors->size()) != n) {
    throw StructuralError("std_errors length mismatch");
  }
  if (t_stats && static_cast<size_t>(t_stats->size()) != n) {
    throw StructuralError("t_stats length mismatch");
  }
  if (std_errors && t_stats) {
    for (size_t i = 0; i < n; ++i) {
      double se = (*std_errors)(i), t = (*t_stats)(i);
      if (std::isfinite(se) && std::isfinite(t) && se > 0) {
        double expect = estimates(i) / se;
        if (std::abs(expect - t) > 1e-9 * std::max(1.0, std::abs(expect))) {
          throw StructuralError("t_stat inconsistent with estimate/std_error");
        }
      }
    }
  }
}

void EvalReport::finalize() {
  const int k = static_cast<int>(per_fold.size());
  mean = SplitMetrics{};
  stddev = SplitMetrics{};
  if (k == 0) return;
  for (const auto& f : per_fold) {
    mean.train_loss += f.train_loss;
    mean.valid_loss += f.valid_loss;
    mean.train_acc += f.train_acc;
    mean.valid_acc += f.valid_acc;
  }
  mean.train_loss /= k;
  mean.valid_loss /= k;
  mean.train_acc /= k;
  mean.valid_acc /= k;
  if (k > 1) {
    for (const auto& f : per_fold) {
      stddev.train_loss += (f.train_loss - mean.train_loss) * (f.train_loss - mean.train_loss);
      stddev.valid_loss += (f.valid_loss - mean.valid_loss) * (f.valid_loss - mean.valid_loss);
      stddev.train_acc += (f.train_acc - mean.train_acc) * (f.train_acc - mean.train_acc);
      stddev.valid_acc += (f.valid_acc - mean.valid_acc) * (f.valid_acc - mean.valid_acc);
    }
    stddev.train_loss = std::sqrt(stddev.train_loss / (k - 1));
    stddev.valid_loss = std::sqrt(stddev.valid_loss / (k - 1));
    stddev.train_acc = std::sqrt(stddev.train_acc / (k - 1));
    stddev.valid_acc = std::sqrt(stddev.valid_acc / (k - 1));
  }
}

}  // namespace tc
