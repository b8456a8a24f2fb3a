#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pathloss/measurements.hpp"
#include "pathloss/profile.hpp"

namespace pathloss {

inline constexpr std::size_t kProfileLength = 256;
inline constexpr std::size_t kChannelCount = 4;
inline constexpr double kMaxFrequencyMhz = 8000.0;

/// Fixed channel order; part of the checkpoint compatibility contract.
enum Channel : std::size_t { kFrequency = 0, kDistance = 1, kSurface = 2, kDirectPath = 3 };
inline constexpr std::array<const char*, kChannelCount> kChannelNames = {
    "frequency", "distance", "surface", "direct_path"};

struct NormalizationSpec {
  double d_max = 78'000.0;  ///< largest link distance in the dataset, metres
  double f_max = kMaxFrequencyMhz;
  double epsilon = 1e-6;  ///< height range below which a sample counts as flat
};

/// Profile heights resampled along the length axis; keeps what the distance
/// channel needs to recover original-space positions.
///
/// Heights are stored relative to `datum`, the Tx ground height, and every
/// interpolation works on those differences. Shifting all input heights by a
/// constant therefore leaves `heights` bit-identical whenever the shifted
/// inputs are exactly representable.
struct ResampledProfile {
  std::size_t length = 0;
  std::size_t width = 0;
  double datum = 0.0;
  std::vector<double> heights;  ///< length x width, row-major, relative to datum
  std::size_t source_rows = 0;
  double source_spacing = 0.0;

  double at(std::size_t i, std::size_t j) const { return heights[i * width + j]; }
  double absolute(std::size_t i, std::size_t j) const { return datum + at(i, j); }
  /// Fractional source row sampled by output row `i`.
  double source_position(std::size_t i) const;
};

/// Linear resampling of every column to `target_length` rows. Endpoints are
/// kept exactly. Throws DegenerateProfileError for fewer than 2 rows.
ResampledProfile resample_profile(const PathProfile& profile,
                                  std::size_t target_length = kProfileLength);

/// Four-channel tensor, channels x length x width, row-major.
struct FeatureSample {
  std::size_t length = 0;
  std::size_t width = 0;
  std::vector<double> channels;
  double label = 0.0;
  std::uint64_t link_id = 0;
  std::string city;
  double freq_mhz = 0.0;
  bool normalized = false;

  std::size_t index(std::size_t c, std::size_t i, std::size_t j) const {
    return (c * length + i) * width + j;
  }
  double& at(std::size_t c, std::size_t i, std::size_t j) { return channels[index(c, i, j)]; }
  double at(std::size_t c, std::size_t i, std::size_t j) const { return channels[index(c, i, j)]; }
  std::size_t center_column() const { return (width - 1) / 2; }
};

/// Builds the frequency, distance, surface and direct-path channels. Heights
/// are left in metres above the Tx ground. Throws DomainError when d > d_max or f is outside (0, f_max].
FeatureSample build_channels(const LinkRecord& record, const ResampledProfile& resampled,
                             const NormalizationSpec& spec);

/// Per-sample min-max scaling of the surface channel and the center column of
/// the direct-path channel; off-center direct-path cells stay 0.
FeatureSample normalize_sample(FeatureSample sample, double epsilon = 1e-6);

/// Crop (when width == 1), resample, build and normalize in one call.
FeatureSample make_feature_sample(const LinkRecord& record, const PathProfile& profile,
                                  std::size_t width, const NormalizationSpec& spec);

/// Per-sample metadata carried next to the feature tensors.
struct SampleMeta {
  std::uint64_t link_id = 0;
  std::string city;
  double freq_mhz = 0.0;
  double distance_m = 0.0;
  double obstruction_depth_m = 0.0;
  double path_loss_db = 0.0;
  Point tx;
  Point rx;
};

/// A set of normalized samples stored as contiguous float32 tensors.
struct FeatureTable {
  std::size_t length = kProfileLength;
  std::size_t width = 1;
  NormalizationSpec spec;
  std::vector<SampleMeta> meta;
  std::vector<float> values;  ///< meta.size() x 4 x length x width

  std::size_t sample_size() const { return kChannelCount * length * width; }
  std::size_t size() const { return meta.size(); }
  void append(const FeatureSample& sample, const SampleMeta& m);
  std::span<const float> sample(std::size_t k) const {
    return std::span<const float>(values).subspan(k * sample_size(), sample_size());
  }
};

// Feature container: "PLFEAT01", JSON header (count, length, width, channel
// order, d_max, f_max), float32 tensors, then the label/metadata table.
void write_feature_table(std::ostream& out, const FeatureTable& table);
FeatureTable read_feature_table(std::istream& in);
void save_feature_table(const std::filesystem::path& path, const FeatureTable& table);
FeatureTable load_feature_table(const std::filesystem::path& path);

}  // namespace pathloss
