#include "pathloss/nn/model.hpp"

#include <cmath>

namespace pathloss::nn {

std::vector<Shape> Topology::shape_trace() const {
  std::vector<Shape> trace;
  Shape shape = input_shape;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    // Shapes only depend on the spec, so a throwaway double layer suffices.
    auto layer = make_layer<double>(layers[i], "probe");
    shape = layer->output_shape(shape);
    trace.push_back(shape);
  }
  return trace;
}

std::size_t Topology::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += nn::parameter_count(l);
  return n;
}

nlohmann::json to_json(const Topology& t) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : t.layers) layers.push_back(to_json(l));
  return {{"kind", t.kind}, {"input_shape", t.input_shape}, {"layers", layers}};
}

Topology topology_from_json(const nlohmann::json& j) {
  try {
    Topology t;
    t.kind = j.at("kind").get<std::string>();
    t.input_shape = j.at("input_shape").get<Shape>();
    for (const auto& l : j.at("layers")) t.layers.push_back(layer_from_json(l));
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("topology: ") + e.what());
  }
}

template <typename T>
Sequential<T>::Sequential(Topology topology) : topology_(std::move(topology)) {
  topology_.shape_trace();  // validates the chain
  for (std::size_t i = 0; i < topology_.layers.size(); ++i) {
    layers_.push_back(make_layer<T>(topology_.layers[i], "layer" + std::to_string(i)));
  }
}

template <typename T>
Tensor<T> Sequential<T>::forward(const Tensor<T>& batch, Mode mode) {
  Shape expected = topology_.input_shape;
  expected.insert(expected.begin(), batch.rank() ? batch.dim(0) : 0);
  if (batch.shape() != expected) {
    throw ContractError("model expects input " + to_string(expected) + ", got " +
                        to_string(batch.shape()));
  }
  Tensor<T> x = batch;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i]->forward(x, mode, dropout_rng_);
    if (!all_finite<T>(x.values())) {
      throw NumericError("non-finite activation after layer " + std::to_string(i) + " (" +
                         kind_name(topology_.layers[i].kind) + ")");
    }
  }
  return x;
}

template <typename T>
Tensor<T> Sequential<T>::backward(const Tensor<T>& grad_output) {
  Tensor<T> g = grad_output;
  for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g);
  return g;
}

template <typename T>
std::vector<double> Sequential<T>::predict(const Tensor<T>& batch) {
  const Tensor<T> out = forward(batch, Mode::kEval);
  std::vector<double> pred(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    pred[i] = output_offset + output_scale * static_cast<double>(out[i]);
  }
  return pred;
}

template <typename T>
std::vector<Parameter<T>*> Sequential<T>::parameters() {
  std::vector<Parameter<T>*> out;
  for (auto& l : layers_) {
    for (auto* p : l->parameters()) out.push_back(p);
  }
  return out;
}

template <typename T>
std::vector<const Parameter<T>*> Sequential<T>::parameters() const {
  std::vector<const Parameter<T>*> out;
  for (auto& l : layers_) {
    for (auto* p : l->parameters()) out.push_back(p);
  }
  return out;
}

template <typename T>
std::size_t Sequential<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->value.size();
  return n;
}

template <typename T>
void Sequential<T>::zero_grad() {
  for (auto* p : parameters()) p->grad.fill(T(0));
}

template <typename T>
void Sequential<T>::initialize(std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& s = topology_.layers[i];
    if (s.kind != LayerKind::kConv && s.kind != LayerKind::kDense) continue;
    const std::size_t fan_in = s.kind == LayerKind::kConv
                                   ? s.in_channels * s.kernel.h * s.kernel.w
                                   : s.in_channels;
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    auto params = layers_[i]->parameters();
    for (auto& w : params[0]->value.values()) w = static_cast<T>(rng.uniform(-bound, bound));
    params[1]->value.fill(T(0));
  }
}

template class Sequential<float>;
template class Sequential<double>;

}  // namespace pathloss::nn
