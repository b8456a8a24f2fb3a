#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathloss/raster.hpp"

namespace pathloss::synthetic {

struct Building {
  double e0, n0, e1, n1;  ///< extent relative to the city origin
  double height;
};

/// Procedural city: rolling terrain plus rectangular buildings, Tx at the
/// centre on a mast.
struct City {
  std::string name;
  Point origin;  ///< lower-left corner
  double extent = 1200.0;
  double base_height = 0.0;
  double amp1 = 0.0, amp2 = 0.0;
  double k1e = 0.0, k1n = 0.0, k2e = 0.0, k2n = 0.0;
  double phase1 = 0.0, phase2 = 0.0;
  std::vector<Building> buildings;
  double eirp_dbm = 0.0;
  double rx_gain_dbi = 0.0;
  double mast_height = 25.0;

  Point tx() const { return {origin.east + extent / 2.0, origin.north + extent / 2.0}; }
  double terrain(Point p) const;
  /// Terrain plus the tallest building covering `p`.
  double surface(Point p) const;
  bool in_building(Point p) const;
  /// Rebuilds the building lookup grid; call after editing `buildings`.
  void index_buildings();

 private:
  double building_height(Point p) const;

  std::size_t bucket_side_ = 0;
  std::vector<std::vector<std::uint32_t>> bucket_cells_;
};

struct Spec {
  std::vector<std::string> cities = {"northfield", "southport"};
  double extent = 1200.0;
  std::size_t tiles_per_side = 2;
  std::size_t buildings = 420;
  std::size_t rx_locations = 200;
  std::vector<double> frequencies_mhz = {449.0, 915.0, 1800.0, 2600.0, 3500.0, 5850.0};
  double min_distance = 60.0;
  double max_distance = 550.0;
  double rx_height = 1.5;
  double noise_floor_dbm = -110.0;
  double noise_sd_db = 2.0;
  /// Extra rows per city that the measurement filters must reject.
  std::size_t rejected_rows = 6;
  std::uint64_t seed = 2024;
};

City make_city(const Spec& spec, std::size_t index);

/// Ground-truth path loss of the generator: free space, a log-distance excess
/// and a frequency-dependent loss growing with the obstructed length of the
/// direct path.
double true_path_loss(const City& city, Point rx, double rx_height, double freq_mhz);

/// Length in metres of the direct path lying below the procedural surface,
/// sampled at 1 m steps.
double true_obstruction_depth(const City& city, Point rx, double rx_height);

struct Output {
  std::vector<std::string> cities;
  std::filesystem::path site_config;
};

/// Writes rasters (<city>/tile_<r>_<c>.asc), measurements_<city>.csv and
/// sites.json under `dir`.
Output generate(const Spec& spec, const std::filesystem::path& dir);

/// Experiment config referencing the files of `generate`, relative to `dir`.
nlohmann::json experiment_config(const Spec& spec, const Output& out);

}  // namespace pathloss::synthetic
