#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathloss/features.hpp"
#include "pathloss/raster.hpp"

namespace pathloss {

struct SplitConfig {
  double theta_deg = 0.0;
  double validation_fraction = 0.2;

  void validate() const;
};

/// Bearing of `rx` about `tx`, counter-clockwise from east, in [0, 360).
double bearing_deg(Point tx, Point rx);

/// ceil(fraction * n), robust to the fraction's binary representation.
std::size_t validation_location_count(double fraction, std::size_t n);

struct SplitResult {
  std::vector<std::size_t> train;       ///< indices into the input samples
  std::vector<std::size_t> validation;  ///< indices into the input samples
  std::vector<Point> validation_locations;
  std::size_t location_count = 0;
};

/// Geographic split about the Tx. Distinct Rx locations are ordered by
/// (bearing - theta) mod 360, nearer first on equal angles, then lowest link
/// id; the first ceil(fraction * n) locations and all their samples form the
/// validation set.
SplitResult angular_validation_split(std::span<const SampleMeta> samples, Point tx,
                                     const SplitConfig& config);

/// Diagnostic only: sample-level random split. Leaks spatially correlated
/// samples across the split.
SplitResult diagnostic_random_split(std::span<const SampleMeta> samples, double fraction,
                                    std::uint64_t seed);

/// Draws exactly `per_stratum` samples without replacement from each
/// (city, frequency) stratum. Throws InsufficientDataError naming an undersized
/// stratum. Returned indices are grouped by stratum in sorted stratum order.
std::vector<std::size_t> stratified_subsample(std::span<const SampleMeta> samples,
                                              std::size_t per_stratum, std::uint64_t seed);

struct HoldoutPlan {
  std::string holdout_city;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::uint64_t subsample_seed = 0;
  std::uint64_t init_seed = 0;
  std::uint64_t shuffle_seed = 0;
  std::map<std::string, double> theta_deg;  ///< one per non-holdout city
};

/// One plan per (holdout city, run). Throws InsufficientDataError for fewer
/// than two cities and ConfigError when runs_per_holdout < 1.
std::vector<HoldoutPlan> build_holdout_plan(const std::vector<std::string>& cities,
                                            std::size_t runs_per_holdout,
                                            std::uint64_t master_seed);

nlohmann::json plan_to_json(const HoldoutPlan& plan);
HoldoutPlan plan_from_json(const nlohmann::json& j);

}  // namespace pathloss
