#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathloss/nn/layers.hpp"

namespace pathloss::nn {

/// Layer sequence plus the per-sample input shape it consumes.
struct Topology {
  std::string kind;
  Shape input_shape;
  std::vector<LayerSpec> layers;

  /// Per-sample output shape after every layer.
  std::vector<Shape> shape_trace() const;
  std::size_t parameter_count() const;
  friend bool operator==(const Topology&, const Topology&) = default;
};

nlohmann::json to_json(const Topology& topology);
Topology topology_from_json(const nlohmann::json& j);

/// Feed-forward stack with a fixed affine map on its scalar output:
/// prediction = output_offset + output_scale * network output.
template <typename T>
class Sequential {
 public:
  explicit Sequential(Topology topology);

  const Topology& topology() const { return topology_; }
  std::size_t layer_count() const { return layers_.size(); }
  Layer<T>& layer(std::size_t i) { return *layers_[i]; }

  /// Batch forward; input shape is (batch, input_shape...). Throws NumericError
  /// if any activation is non-finite.
  Tensor<T> forward(const Tensor<T>& batch, Mode mode);
  /// Accumulates parameter gradients and returns the input gradient.
  Tensor<T> backward(const Tensor<T>& grad_output);

  /// Predictions in output units (affine applied), evaluation mode.
  std::vector<double> predict(const Tensor<T>& batch);

  std::vector<Parameter<T>*> parameters();
  std::vector<const Parameter<T>*> parameters() const;
  std::size_t parameter_count() const;
  void zero_grad();

  /// He-style uniform weights, bound sqrt(6 / fan_in); zero biases.
  void initialize(std::uint64_t seed);
  void set_dropout_seed(std::uint64_t seed) { dropout_rng_ = Rng(seed); }

  double output_offset = 0.0;
  double output_scale = 1.0;

  /// Copy with parameters converted to another scalar type.
  template <typename U>
  Sequential<U> cast() const {
    Sequential<U> other(topology_);
    other.output_offset = output_offset;
    other.output_scale = output_scale;
    auto dst = other.parameters();
    auto src = parameters();
    for (std::size_t k = 0; k < src.size(); ++k) {
      for (std::size_t i = 0; i < src[k]->value.size(); ++i) {
        dst[k]->value[i] = static_cast<U>(src[k]->value[i]);
      }
    }
    return other;
  }

 private:
  Topology topology_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
  Rng dropout_rng_{0};
};

extern template class Sequential<float>;
extern template class Sequential<double>;

}  // namespace pathloss::nn
