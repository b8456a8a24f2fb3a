#include "pathloss/dataset.hpp"

#include <algorithm>

#include "pathloss/errors.hpp"
#include "pathloss/profile.hpp"
#include "pathloss/splits.hpp"

namespace pathloss {

namespace {

PathProfile corrected_profile(const RasterIndex& index, const LinkRecord& record, int width,
                              double earth_radius) {
  return earth_curvature_correct(extract_profile(index, record.geometry(width)), earth_radius);
}

SampleMeta make_meta(const LinkRecord& r, double depth) {
  SampleMeta m;
  m.link_id = r.measurement.link_id;
  m.city = r.measurement.city;
  m.freq_mhz = r.measurement.freq_mhz;
  m.distance_m = r.distance;
  m.obstruction_depth_m = depth;
  m.path_loss_db = r.path_loss_db;
  m.tx = r.measurement.tx;
  m.rx = r.measurement.rx;
  return m;
}

}  // namespace

CityPool prepare_city(const CitySource& source, const TxSiteConfig& site, int width,
                      double earth_radius, std::optional<std::size_t> per_stratum,
                      std::uint64_t seed) {
  CityPool pool;
  pool.name = source.name;
  for (const auto& path : source.rasters) pool.index.add(load_raster(path));

  ParseResult parsed = parse_drive_test(source.measurements, site);
  pool.stats.parsed = parsed.records.size();
  pool.stats.skipped_rows = parsed.skipped;
  std::vector<DriveTestRecord> own;
  for (auto& r : parsed.records) {
    if (r.city == source.name) own.push_back(std::move(r));
  }
  pool.stats.other_city = pool.stats.parsed - own.size();
  const auto kept = filter_measurements(own);
  pool.stats.filtered_out = own.size() - kept.size();
  std::vector<DroppedLink> dropped;
  auto records = make_link_records(kept, site, &dropped);
  pool.stats.non_positive_loss = dropped.size();

  // Links whose full-width strip leaves coverage are dropped here so later
  // feature builds cannot fail.
  std::vector<LinkRecord> usable;
  std::vector<SampleMeta> meta;
  for (auto& r : records) {
    try {
      corrected_profile(pool.index, r, width, earth_radius);
      const double depth =
          total_obstruction_depth(corrected_profile(pool.index, r, 1, earth_radius));
      meta.push_back(make_meta(r, depth));
      usable.push_back(std::move(r));
    } catch (const ExtractionError&) {
      ++pool.stats.extraction_failed;
    } catch (const DegenerateLinkError&) {
      ++pool.stats.extraction_failed;
    }
  }

  if (per_stratum) {
    const auto idx = stratified_subsample(meta, *per_stratum, seed);
    for (std::size_t i : idx) {
      pool.records.push_back(usable[i]);
      pool.meta.push_back(meta[i]);
    }
  } else {
    pool.records = std::move(usable);
    pool.meta = std::move(meta);
  }
  pool.stats.pooled = pool.records.size();
  if (pool.records.empty()) throw InsufficientDataError("city " + source.name + " has no usable links");
  pool.tx = source.tx ? *source.tx : pool.records.front().measurement.tx;
  return pool;
}

const CityPool& ExperimentData::city(const std::string& name) const {
  for (const auto& c : cities) {
    if (c.name == name) return c;
  }
  throw ConfigError("city '" + name + "' was not prepared");
}

ExperimentData prepare_experiment(const ExperimentConfig& config, const LogFn& log) {
  const TxSiteConfig site = load_site_config(config.site_config);
  ExperimentData data;
  data.width = config.width;
  data.earth_radius = config.earth_radius;
  data.spec.f_max = config.f_max;
  for (const auto& source : config.cities) {
    CityPool pool = prepare_city(source, site, config.width, config.earth_radius,
                                 config.samples_per_stratum,
                                 derive_seed(config.seed, "pool:" + source.name));
    if (log) {
      const auto& s = pool.stats;
      log(source.name + ": " + std::to_string(s.parsed) + " parsed, " +
          std::to_string(s.skipped_rows) + " malformed, " + std::to_string(s.filtered_out) +
          " filtered, " + std::to_string(s.parsed - s.other_city - s.filtered_out) + " pass filters, " +
          std::to_string(s.extraction_failed) + " outside coverage, " +
          std::to_string(s.pooled) + " pooled");
    }
    data.cities.push_back(std::move(pool));
  }
  if (config.d_max) {
    data.spec.d_max = *config.d_max;
  } else {
    double d_max = 0.0;
    for (const auto& c : data.cities) {
      for (const auto& m : c.meta) d_max = std::max(d_max, m.distance_m);
    }
    data.spec.d_max = d_max;
  }
  return data;
}

FeatureTable build_feature_table(const CityPool& pool, std::span<const std::size_t> indices,
                                 std::size_t width, const ExperimentData& data) {
  FeatureTable table;
  table.width = width;
  table.spec = data.spec;
  table.values.reserve(indices.size() * table.sample_size());
  table.meta.reserve(indices.size());
  for (std::size_t i : indices) {
    const LinkRecord& r = pool.records.at(i);
    const PathProfile profile = corrected_profile(pool.index, r, data.width, data.earth_radius);
    table.append(make_feature_sample(r, profile, width, data.spec), pool.meta[i]);
  }
  return table;
}

nn::Dataset cnn_dataset(const FeatureTable& table) {
  nn::Dataset d;
  d.sample_shape = {kChannelCount, table.length, table.width};
  d.inputs = table.values;
  for (const auto& m : table.meta) {
    d.labels.push_back(m.path_loss_db);
    d.ids.push_back(m.link_id);
  }
  return d;
}

nn::Dataset scalar_dataset(std::span<const SampleMeta> meta, const NormalizationSpec& spec) {
  nn::Dataset d;
  d.sample_shape = {kScalarFeatureCount};
  d.inputs.reserve(meta.size() * kScalarFeatureCount);
  for (const auto& m : meta) {
    const ScalarFeatureSet s{m.freq_mhz, m.distance_m, m.obstruction_depth_m};
    for (float v : s.normalized(spec)) d.inputs.push_back(v);
    d.labels.push_back(m.path_loss_db);
    d.ids.push_back(m.link_id);
  }
  return d;
}

std::vector<SampleMeta> select_meta(const CityPool& pool, std::span<const std::size_t> indices) {
  std::vector<SampleMeta> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(pool.meta.at(i));
  return out;
}

nn::Dataset model_dataset(ModelKind kind, const CityPool& pool,
                          std::span<const std::size_t> indices, const ExperimentData& data) {
  switch (kind) {
    case ModelKind::kFcn: return scalar_dataset(select_meta(pool, indices), data.spec);
    case ModelKind::kCnn1d: return cnn_dataset(build_feature_table(pool, indices, 1, data));
    case ModelKind::kCnn2d:
      return cnn_dataset(
          build_feature_table(pool, indices, static_cast<std::size_t>(data.width), data));
  }
  throw ConfigError("unknown model kind");
}

}  // namespace pathloss
