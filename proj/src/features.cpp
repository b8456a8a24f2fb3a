#include "pathloss/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <span>

#include <json.hpp>

#include "pathloss/binary_io.hpp"
#include "pathloss/errors.hpp"

namespace pathloss {

double ResampledProfile::source_position(std::size_t i) const {
  if (length < 2) return 0.0;
  return static_cast<double>(i) * static_cast<double>(source_rows - 1) /
         static_cast<double>(length - 1);
}

ResampledProfile resample_profile(const PathProfile& profile, std::size_t target_length) {
  if (profile.rows < 2) {
    throw DegenerateProfileError("profile of link " + std::to_string(profile.geometry.link_id) +
                                 " has fewer than 2 rows");
  }
  if (target_length < 2) throw DomainError("resample target length must be >= 2");
  ResampledProfile out;
  out.length = target_length;
  out.width = profile.width;
  out.source_rows = profile.rows;
  out.source_spacing = profile.geometry.row_spacing();
  out.heights.resize(target_length * profile.width);
  out.datum = profile.at(0, (profile.width - 1) / 2);
  for (std::size_t i = 0; i < target_length; ++i) {
    const double pos = out.source_position(i);
    auto i0 = static_cast<std::size_t>(std::floor(pos));
    double frac = pos - static_cast<double>(i0);
    if (i0 >= profile.rows - 1) {
      i0 = profile.rows - 1;
      frac = 0.0;
    }
    for (std::size_t j = 0; j < profile.width; ++j) {
      // float - float is exact in double here.
      const double h0 = static_cast<double>(profile.at(i0, j)) - out.datum;
      out.heights[i * out.width + j] =
          frac == 0.0 ? h0 : h0 + frac * ((static_cast<double>(profile.at(i0 + 1, j)) - out.datum) - h0);
    }
  }
  return out;
}

FeatureSample build_channels(const LinkRecord& record, const ResampledProfile& resampled,
                             const NormalizationSpec& spec) {
  if (!(spec.d_max > 0.0)) throw DomainError("d_max must be positive");
  if (record.distance > spec.d_max) {
    throw DomainError("link distance " + std::to_string(record.distance) + " m exceeds d_max " +
                      std::to_string(spec.d_max) + " m");
  }
  const double f = record.measurement.freq_mhz;
  if (!(f > 0.0) || f > spec.f_max) {
    throw DomainError("frequency " + std::to_string(f) + " MHz outside (0, f_max]");
  }

  FeatureSample s;
  s.length = resampled.length;
  s.width = resampled.width;
  s.channels.assign(kChannelCount * s.length * s.width, 0.0);
  s.label = record.path_loss_db;
  s.link_id = record.measurement.link_id;
  s.city = record.measurement.city;
  s.freq_mhz = f;

  const double freq_value = f / spec.f_max;
  const std::size_t c = s.center_column();
  const double last = static_cast<double>(s.length - 1);
  const double tx_top = resampled.at(0, c) + record.measurement.tx_height;
  const double rx_top = resampled.at(s.length - 1, c) + record.measurement.rx_height;

  for (std::size_t i = 0; i < s.length; ++i) {
    // Distances use the original (non-resampled) geometry.
    const double along = resampled.source_position(i) * resampled.source_spacing;
    for (std::size_t j = 0; j < s.width; ++j) {
      const double across = static_cast<double>(j) - static_cast<double>(c);
      s.at(kFrequency, i, j) = freq_value;
      s.at(kDistance, i, j) = std::hypot(along, across) / spec.d_max;
      s.at(kSurface, i, j) = resampled.at(i, j);
    }
    s.at(kDirectPath, i, c) = tx_top + (rx_top - tx_top) * (static_cast<double>(i) / last);
  }
  return s;
}

FeatureSample normalize_sample(FeatureSample s, double epsilon) {
  const std::size_t c = s.center_column();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < s.length; ++i) {
    for (std::size_t j = 0; j < s.width; ++j) {
      lo = std::min(lo, s.at(kSurface, i, j));
      hi = std::max(hi, s.at(kSurface, i, j));
    }
    lo = std::min(lo, s.at(kDirectPath, i, c));
    hi = std::max(hi, s.at(kDirectPath, i, c));
  }
  const double range = hi - lo;
  const bool flat = !(range >= epsilon);
  auto map = [&](double h) { return flat ? 0.5 : (h - lo) / range; };
  for (std::size_t i = 0; i < s.length; ++i) {
    for (std::size_t j = 0; j < s.width; ++j) s.at(kSurface, i, j) = map(s.at(kSurface, i, j));
    s.at(kDirectPath, i, c) = map(s.at(kDirectPath, i, c));
  }
  s.normalized = true;
  return s;
}

FeatureSample make_feature_sample(const LinkRecord& record, const PathProfile& profile,
                                  std::size_t width, const NormalizationSpec& spec) {
  if (width == 1 && profile.width != 1) {
    return normalize_sample(
        build_channels(record, resample_profile(crop_direct_path(profile)), spec), spec.epsilon);
  }
  if (width != profile.width) {
    throw ShapeError("requested width " + std::to_string(width) + " but profile has width " +
                     std::to_string(profile.width));
  }
  return normalize_sample(build_channels(record, resample_profile(profile), spec), spec.epsilon);
}

void FeatureTable::append(const FeatureSample& sample, const SampleMeta& m) {
  if (sample.length != length || sample.width != width) {
    throw ShapeError("feature sample shape does not match the table");
  }
  meta.push_back(m);
  values.reserve(values.size() + sample.channels.size());
  for (double v : sample.channels) values.push_back(static_cast<float>(v));
}

namespace {
constexpr char kFeatureMagic[9] = "PLFEAT01";
}

void write_feature_table(std::ostream& out, const FeatureTable& table) {
  using namespace binary;
  nlohmann::json header = {
      {"count", table.size()},
      {"length", table.length},
      {"width", table.width},
      {"channels", std::vector<std::string>(kChannelNames.begin(), kChannelNames.end())},
      {"d_max", table.spec.d_max},
      {"f_max", table.spec.f_max},
      {"epsilon", table.spec.epsilon},
  };
  put_magic(out, kFeatureMagic);
  put_string(out, header.dump());
  put_span<float>(out, table.values);
  for (const auto& m : table.meta) {
    put<std::uint64_t>(out, m.link_id);
    put_string(out, m.city);
    for (double v : {m.freq_mhz, m.distance_m, m.obstruction_depth_m, m.path_loss_db, m.tx.east,
                     m.tx.north, m.rx.east, m.rx.north}) {
      put<double>(out, v);
    }
  }
}

FeatureTable read_feature_table(std::istream& in) {
  using namespace binary;
  expect_magic(in, kFeatureMagic);
  FeatureTable table;
  std::size_t count = 0;
  try {
    const auto header = nlohmann::json::parse(get_string(in));
    count = header.at("count").get<std::size_t>();
    table.length = header.at("length").get<std::size_t>();
    table.width = header.at("width").get<std::size_t>();
    table.spec.d_max = header.at("d_max").get<double>();
    table.spec.f_max = header.at("f_max").get<double>();
    table.spec.epsilon = header.value("epsilon", 1e-6);
    const auto channels = header.at("channels").get<std::vector<std::string>>();
    if (channels != std::vector<std::string>(kChannelNames.begin(), kChannelNames.end())) {
      throw FormatError("feature container has an unsupported channel order");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("feature container header: ") + e.what());
  }
  table.values.resize(count * table.sample_size());
  get_span<float>(in, table.values);
  table.meta.resize(count);
  for (auto& m : table.meta) {
    m.link_id = get<std::uint64_t>(in);
    m.city = get_string(in, 4096);
    for (double* v : {&m.freq_mhz, &m.distance_m, &m.obstruction_depth_m, &m.path_loss_db,
                      &m.tx.east, &m.tx.north, &m.rx.east, &m.rx.north}) {
      *v = get<double>(in);
    }
  }
  return table;
}

void save_feature_table(const std::filesystem::path& path, const FeatureTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_feature_table(out, table);
  if (!out) throw IoError("failed writing " + path.string());
}

FeatureTable load_feature_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_feature_table(in);
}

}  // namespace pathloss
