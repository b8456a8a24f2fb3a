#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pathloss/config.hpp"
#include "pathloss/features.hpp"
#include "pathloss/measurements.hpp"
#include "pathloss/models.hpp"
#include "pathloss/nn/train.hpp"
#include "pathloss/raster.hpp"

namespace pathloss {

struct PrepStats {
  std::size_t parsed = 0;
  std::size_t skipped_rows = 0;
  std::size_t other_city = 0;
  std::size_t filtered_out = 0;
  std::size_t non_positive_loss = 0;
  std::size_t extraction_failed = 0;
  std::size_t pooled = 0;
};

/// Every usable link of one city plus the surface needed to re-extract its
/// profiles on demand.
struct CityPool {
  std::string name;
  Point tx;
  RasterIndex index;
  std::vector<LinkRecord> records;
  std::vector<SampleMeta> meta;  ///< parallel to records, with obstruction depth
  PrepStats stats;
};

/// Loads rasters and measurements, filters, derives path loss, checks that
/// every link extracts cleanly and computes its obstruction depth. When
/// `per_stratum` is set the pool is reduced to that many links per frequency.
CityPool prepare_city(const CitySource& source, const TxSiteConfig& site, int width,
                      double earth_radius, std::optional<std::size_t> per_stratum,
                      std::uint64_t seed);

struct ExperimentData {
  std::vector<CityPool> cities;
  NormalizationSpec spec;
  int width = kDefaultWidth;
  double earth_radius = kDefaultEarthRadius;

  const CityPool& city(const std::string& name) const;  ///< throws ConfigError
};

using LogFn = std::function<void(const std::string&)>;

ExperimentData prepare_experiment(const ExperimentConfig& config, const LogFn& log = {});

/// Normalized feature tensors of the given pool links at `width` (1 or the
/// full extraction width).
FeatureTable build_feature_table(const CityPool& pool, std::span<const std::size_t> indices,
                                 std::size_t width, const ExperimentData& data);

/// Tensor dataset (4, length, width) from a feature table.
nn::Dataset cnn_dataset(const FeatureTable& table);
/// Normalized (f, d, depth) dataset for the scalar baseline.
nn::Dataset scalar_dataset(std::span<const SampleMeta> meta, const NormalizationSpec& spec);

/// Dataset for `kind` over the given pool links.
nn::Dataset model_dataset(ModelKind kind, const CityPool& pool,
                          std::span<const std::size_t> indices, const ExperimentData& data);

std::vector<SampleMeta> select_meta(const CityPool& pool, std::span<const std::size_t> indices);

}  // namespace pathloss
