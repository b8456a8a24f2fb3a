#include "pathloss/models.hpp"

#include <cmath>

#include "pathloss/errors.hpp"

namespace pathloss {

using nn::LayerSpec;
using nn::Window;

Dims parse_dims(std::string_view text) {
  if (text == "1d" || text == "1D") return Dims::k1D;
  if (text == "2d" || text == "2D") return Dims::k2D;
  throw ConfigError("dimensionality must be 1d or 2d, got '" + std::string(text) + "'");
}

const char* dims_name(Dims dims) { return dims == Dims::k1D ? "1d" : "2d"; }

std::size_t dims_width(Dims dims, std::size_t full_width) {
  return dims == Dims::k1D ? 1 : full_width;
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "cnn1d") return ModelKind::kCnn1d;
  if (text == "cnn2d") return ModelKind::kCnn2d;
  if (text == "fcn") return ModelKind::kFcn;
  throw ConfigError("unknown model kind '" + std::string(text) + "'");
}

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kCnn1d: return "cnn1d";
    case ModelKind::kCnn2d: return "cnn2d";
    case ModelKind::kFcn: return "fcn";
  }
  return "?";
}

nn::Topology cnn_topology(Dims dims, double dropout, std::size_t width) {
  const bool two_d = dims == Dims::k2D;
  const Window kernel{3, two_d ? 3u : 1u};
  const Window stride{2, two_d ? 2u : 1u};
  const Window padding{1, two_d ? 1u : 0u};
  const Window pool{3, two_d ? 3u : 1u};

  nn::Topology t;
  t.kind = two_d ? "cnn2d" : "cnn1d";
  t.input_shape = {kChannelCount, kProfileLength, two_d ? width : 1};
  std::size_t in = kChannelCount;
  for (std::size_t out : kCnnChannels) {
    t.layers.push_back(LayerSpec::conv(in, out, kernel, stride, padding));
    t.layers.push_back(LayerSpec::relu());
    t.layers.push_back(LayerSpec::maxpool_same(pool));
    in = out;
  }
  t.layers.push_back(LayerSpec::flatten());
  t.layers.push_back(LayerSpec::dropout(dropout));
  const std::size_t flat = nn::element_count(t.shape_trace()[t.layers.size() - 1]);
  t.layers.push_back(LayerSpec::dense(flat, kHeadUnits));
  t.layers.push_back(LayerSpec::relu());
  t.layers.push_back(LayerSpec::dense(kHeadUnits, 1));
  return t;
}

nn::Topology fcn_topology() {
  nn::Topology t;
  t.kind = "fcn";
  t.input_shape = {kScalarFeatureCount};
  t.layers = {LayerSpec::dense(kScalarFeatureCount, kHeadUnits), LayerSpec::relu(),
              LayerSpec::dense(kHeadUnits, 1)};
  return t;
}

nn::Topology model_topology(ModelKind kind, double dropout, std::size_t width) {
  switch (kind) {
    case ModelKind::kCnn1d: return cnn_topology(Dims::k1D, dropout, width);
    case ModelKind::kCnn2d: return cnn_topology(Dims::k2D, dropout, width);
    case ModelKind::kFcn: return fcn_topology();
  }
  throw ConfigError("unknown model kind");
}

nn::Sequential<float> build_cnn(Dims dims, std::uint64_t seed, double dropout) {
  nn::Sequential<float> model(cnn_topology(dims, dropout));
  model.initialize(seed);
  return model;
}

nn::Sequential<float> build_fcn_baseline(std::uint64_t seed) {
  nn::Sequential<float> model(fcn_topology());
  model.initialize(seed);
  return model;
}

nn::Sequential<float> build_model(ModelKind kind, std::uint64_t seed, double dropout) {
  nn::Sequential<float> model(model_topology(kind, dropout));
  model.initialize(seed);
  return model;
}

double fspl_db(double freq_mhz, double distance_km) {
  if (!(freq_mhz > 0.0) || !(distance_km > 0.0) || !std::isfinite(freq_mhz) ||
      !std::isfinite(distance_km)) {
    throw DomainError("free-space path loss needs positive frequency and distance");
  }
  return 32.45 + 20.0 * std::log10(freq_mhz) + 20.0 * std::log10(distance_km);
}

void ScalarFeatureSet::validate() const {
  for (double v : {freq_mhz, distance_m, obstruction_depth_m}) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError("scalar features must be finite and >= 0");
  }
  if (obstruction_depth_m > distance_m) {
    throw DomainError("obstruction depth exceeds link distance");
  }
}

std::array<float, kScalarFeatureCount> ScalarFeatureSet::normalized(
    const NormalizationSpec& spec) const {
  validate();
  return {static_cast<float>(freq_mhz / spec.f_max), static_cast<float>(distance_m / spec.d_max),
          static_cast<float>(obstruction_depth_m / spec.d_max)};
}

std::size_t obstruction_depth(std::span<const double> surface, double tx_top, double rx_top) {
  const std::size_t n = surface.size();
  if (n == 0) return 0;
  if (n == 1) return surface[0] > tx_top ? 1 : 0;
  std::size_t count = 0;
  const double last = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / last;
    const double line = tx_top + (rx_top - tx_top) * t;
    if (surface[i] > line) ++count;
  }
  return count;
}

double total_obstruction_depth(const PathProfile& profile) {
  if (profile.rows == 0) return 0.0;
  const std::size_t c = profile.center_column();
  std::vector<double> surface(profile.rows);
  for (std::size_t i = 0; i < profile.rows; ++i) surface[i] = profile.at(i, c);
  const double tx_top = surface.front() + profile.geometry.tx_antenna_height;
  const double rx_top = surface.back() + profile.geometry.rx_antenna_height;
  return static_cast<double>(obstruction_depth(surface, tx_top, rx_top));
}

std::vector<double> predict(const nn::Checkpoint& checkpoint, const nn::Dataset& samples,
                            std::size_t micro_batch) {
  if (samples.sample_shape != checkpoint.topology.input_shape) {
    throw ContractError("samples of shape " + nn::to_string(samples.sample_shape) +
                        " do not fit a model expecting " +
                        nn::to_string(checkpoint.topology.input_shape));
  }
  auto model = nn::restore(checkpoint);
  return nn::predict_dataset(model, samples, micro_batch);
}

}  // namespace pathloss
