#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pathloss/nn/layers.hpp"

namespace pathloss::nn {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam. Moments are held in double regardless of the
/// parameter precision.
template <typename T>
class Adam {
 public:
  Adam(std::vector<Parameter<T>*> params, AdamConfig config = {});

  /// Applies one update from each parameter's accumulated gradient.
  void step();

  std::uint64_t step_count() const { return steps_; }
  const AdamConfig& config() const { return config_; }
  const std::vector<double>& first_moment(std::size_t k) const { return m_[k]; }
  const std::vector<double>& second_moment(std::size_t k) const { return v_[k]; }

 private:
  std::vector<Parameter<T>*> params_;
  AdamConfig config_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::uint64_t steps_ = 0;
};

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace pathloss::nn
