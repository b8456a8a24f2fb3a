#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pathloss/features.hpp"
#include "pathloss/nn/checkpoint.hpp"
#include "pathloss/nn/model.hpp"
#include "pathloss/nn/train.hpp"
#include "pathloss/profile.hpp"

namespace pathloss {

enum class Dims { k1D, k2D };

Dims parse_dims(std::string_view text);  ///< "1d" or "2d"; throws ConfigError
const char* dims_name(Dims dims);
/// Profile width a CNN of the given dimensionality consumes.
std::size_t dims_width(Dims dims, std::size_t full_width = kDefaultWidth);

enum class ModelKind { kCnn1d, kCnn2d, kFcn };

ModelKind parse_model_kind(std::string_view text);  ///< "cnn1d", "cnn2d" or "fcn"
const char* model_kind_name(ModelKind kind);

inline constexpr std::array<std::size_t, 6> kCnnChannels = {32, 64, 128, 256, 512, 1024};
inline constexpr std::size_t kHeadUnits = 256;
inline constexpr double kDefaultDropout = 0.25;

/// Six conv(k3, s2, p1) -> ReLU -> maxpool-same(k3) blocks, flatten, dropout,
/// dense 4096->256, ReLU, dense 256->1. 1D kernels act along the length axis
/// only, over an input of shape (4, 256, 1).
nn::Topology cnn_topology(Dims dims, double dropout = kDefaultDropout,
                          std::size_t width = kDefaultWidth);

inline constexpr std::size_t kScalarFeatureCount = 3;

/// Dense 3->256, ReLU, dense 256->1 over normalized (f, d, depth).
nn::Topology fcn_topology();

nn::Topology model_topology(ModelKind kind, double dropout = kDefaultDropout,
                            std::size_t width = kDefaultWidth);

/// Builds and initializes a model from `seed`.
nn::Sequential<float> build_cnn(Dims dims, std::uint64_t seed, double dropout = kDefaultDropout);
nn::Sequential<float> build_fcn_baseline(std::uint64_t seed);
nn::Sequential<float> build_model(ModelKind kind, std::uint64_t seed,
                                  double dropout = kDefaultDropout);

/// Free-space path loss in dB, frequency in MHz and distance in km. Throws
/// DomainError for non-positive arguments.
double fspl_db(double freq_mhz, double distance_km);

struct ScalarFeatureSet {
  double freq_mhz = 0.0;
  double distance_m = 0.0;
  double obstruction_depth_m = 0.0;

  /// Throws DomainError unless all values are finite, non-negative and
  /// depth <= distance.
  void validate() const;
  /// (f / f_max, d / d_max, depth / d_max).
  std::array<float, kScalarFeatureCount> normalized(const NormalizationSpec& spec) const;
};

/// Number of samples of `surface` strictly above the straight line running
/// from `tx_top` at index 0 to `rx_top` at the last index.
std::size_t obstruction_depth(std::span<const double> surface, double tx_top, double rx_top);

/// Obstruction depth in metres along the center column of a curvature
/// corrected profile, between the antenna tops at both ends. Samples sit one
/// metre apart, so the count is the depth.
double total_obstruction_depth(const PathProfile& profile);

/// Evaluation-mode predictions in dB. Throws ContractError when the sample
/// shape does not match the checkpoint topology.
std::vector<double> predict(const nn::Checkpoint& checkpoint, const nn::Dataset& samples,
                            std::size_t micro_batch = 64);

}  // namespace pathloss
