#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathloss/nn/tensor.hpp"
#include "pathloss/rng.hpp"

namespace pathloss::nn {

enum class LayerKind { kConv, kMaxPoolSame, kRelu, kDropout, kFlatten, kDense };

/// Extent along the (length, width) spatial axes. 1D layers use width 1.
struct Window {
  std::size_t h = 1;
  std::size_t w = 1;
  friend bool operator==(const Window&, const Window&) = default;
};

struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  std::size_t in_channels = 0;   ///< conv input channels, or dense input features
  std::size_t out_channels = 0;  ///< conv output channels, or dense units
  Window kernel;
  Window stride;
  Window padding;
  double rate = 0.0;  ///< dropout probability

  static LayerSpec conv(std::size_t in, std::size_t out, Window kernel, Window stride,
                        Window padding);
  static LayerSpec maxpool_same(Window kernel);
  static LayerSpec relu();
  static LayerSpec dropout(double rate);
  static LayerSpec flatten();
  static LayerSpec dense(std::size_t in, std::size_t out);

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

const char* kind_name(LayerKind kind);
nlohmann::json to_json(const LayerSpec& spec);
LayerSpec layer_from_json(const nlohmann::json& j);

/// Output spatial size of a strided, zero-padded window.
std::size_t conv_output_size(std::size_t size, std::size_t kernel, std::size_t stride,
                             std::size_t padding);

enum class Mode { kTrain, kEval };

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
};

/// A layer consumes a batch whose leading axis is the sample index. Forward
/// caches what backward needs; backward accumulates into parameter gradients.
template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual const LayerSpec& spec() const = 0;
  /// Output shape of one sample given one sample's input shape.
  virtual Shape output_shape(const Shape& input) const = 0;
  virtual Tensor<T> forward(const Tensor<T>& input, Mode mode, Rng& rng) = 0;
  virtual Tensor<T> backward(const Tensor<T>& grad_output) = 0;
  virtual std::vector<Parameter<T>*> parameters() { return {}; }
};

/// Cross-correlation with zero padding over (batch, channels, length, width).
template <typename T>
class Conv : public Layer<T> {
 public:
  Conv(const LayerSpec& spec, const std::string& name);
  const LayerSpec& spec() const override { return spec_; }
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& input, Mode mode, Rng& rng) override;
  Tensor<T> backward(const Tensor<T>& grad_output) override;
  std::vector<Parameter<T>*> parameters() override { return {&weight_, &bias_}; }

 private:
  struct Geometry {
    std::size_t batch, channels, h, w, out_h, out_w;
  };
  Geometry geometry(const Shape& input) const;
  /// Column matrix of samples [b0, b0 + nb): K rows of nb * out_h * out_w.
  void im2col(const T* x, const Geometry& g, std::size_t b0, std::size_t nb, T* cols) const;
  void col2im(const T* cols, const Geometry& g, std::size_t b0, std::size_t nb, T* dx) const;
  /// Samples per GEMM chunk; keeps the column buffer cache-sized.
  std::size_t chunk_samples(const Geometry& g) const;

  LayerSpec spec_;
  Parameter<T> weight_;  ///< (out, in, kh, kw)
  Parameter<T> bias_;    ///< (out)
  Tensor<T> input_;
};

/// Stride-1 max pooling whose zero padding keeps the spatial shape.
template <typename T>
class MaxPoolSame : public Layer<T> {
 public:
  explicit MaxPoolSame(const LayerSpec& spec);
  const LayerSpec& spec() const override { return spec_; }
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor<T> forward(const Tensor<T>& input, Mode mode, Rng& rng) override;
  Tensor<T> backward(const Tensor<T>& grad_output) override;

 private:
  LayerSpec spec_;
  Shape input_shape_;
  std::vector<std::int32_t> argmax_;  ///< plane offset of the winner, -1 for padding
};

template <typename T>
class Relu : public Layer<T> {
 public:
  Relu() : spec_(LayerSpec::relu()) {}
  const LayerSpec& spec() const override { return spec_; }
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor<T> forward(const Tensor<T>& input, Mode mode, Rng& rng) override;
  Tensor<T> backward(const Tensor<T>& grad_output) override;

 private:
  LayerSpec spec_;
  std::vector<std::uint8_t> active_;
};

/// Inverted dropout: survivors are scaled by 1/(1-rate) in training mode;
/// evaluation mode is the identity.
template <typename T>
class Dropout : public Layer<T> {
 public:
  explicit Dropout(const LayerSpec& spec);
  const LayerSpec& spec() const override { return spec_; }
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor<T> forward(const Tensor<T>& input, Mode mode, Rng& rng) override;
  Tensor<T> backward(const Tensor<T>& grad_output) override;

 private:
  LayerSpec spec_;
  std::vector<T> scale_;  ///< empty when the last forward was the identity
};

template <typename T>
class Flatten : public Layer<T> {
 public:
  Flatten() : spec_(LayerSpec::flatten()) {}
  const LayerSpec& spec() const override { return spec_; }
  Shape output_shape(const Shape& input) const override { return {element_count(input)}; }
  Tensor<T> forward(const Tensor<T>& input, Mode mode, Rng& rng) override;
  Tensor<T> backward(const Tensor<T>& grad_output) override;

 private:
  LayerSpec spec_;
  Shape input_shape_;
};

/// y = x W^T + b with W stored (units, features).
template <typename T>
class Dense : public Layer<T> {
 public:
  Dense(const LayerSpec& spec, const std::string& name);
  const LayerSpec& spec() const override { return spec_; }
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& input, Mode mode, Rng& rng) override;
  Tensor<T> backward(const Tensor<T>& grad_output) override;
  std::vector<Parameter<T>*> parameters() override { return {&weight_, &bias_}; }

 private:
  LayerSpec spec_;
  Parameter<T> weight_;
  Parameter<T> bias_;
  Tensor<T> input_;
};

template <typename T>
std::unique_ptr<Layer<T>> make_layer(const LayerSpec& spec, const std::string& name);

/// Parameter elements a layer of this spec owns.
std::size_t parameter_count(const LayerSpec& spec);

}  // namespace pathloss::nn
