#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathloss/features.hpp"
#include "pathloss/models.hpp"
#include "pathloss/nn/train.hpp"
#include "pathloss/raster.hpp"

namespace pathloss {

struct CitySource {
  std::string name;
  std::vector<std::filesystem::path> rasters;
  std::filesystem::path measurements;
  /// Transmitter used for the angular split; defaults to the first record's.
  std::optional<Point> tx;
};

/// Cited external RMSE figures, reported next to the trained models.
struct CitedBaseline {
  std::string label;
  double rmse_low_db = 0.0;
  double rmse_high_db = 0.0;
};

/// Experiment description. Relative paths are resolved against the directory
/// of the config file.
struct ExperimentConfig {
  std::vector<CitySource> cities;
  std::filesystem::path site_config;
  int width = kDefaultWidth;
  /// Unset: largest link distance over all prepared cities.
  std::optional<double> d_max;
  double f_max = kMaxFrequencyMhz;
  double earth_radius = kDefaultEarthRadius;
  nn::TrainConfig train;
  std::size_t runs_per_holdout = 10;
  /// Base pool per (city, frequency) stratum; unset keeps every sample.
  std::optional<std::size_t> samples_per_stratum;
  /// Per-run re-subsample per stratum; unset keeps the whole pool.
  std::optional<std::size_t> run_samples_per_stratum;
  double validation_fraction = 0.2;
  std::vector<ModelKind> models = {ModelKind::kCnn1d, ModelKind::kCnn2d, ModelKind::kFcn};
  std::uint64_t seed = 0;
  std::vector<CitedBaseline> cited;

  std::vector<std::string> city_names() const;
  const CitySource& city(const std::string& name) const;  ///< throws ConfigError
};

ExperimentConfig parse_experiment_config(const nlohmann::json& j,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace pathloss
