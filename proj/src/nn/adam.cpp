#include "pathloss/nn/adam.hpp"

#include <cmath>

namespace pathloss::nn {

template <typename T>
Adam<T>::Adam(std::vector<Parameter<T>*> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  for (auto* p : params_) {
    if (p->grad.shape() != p->value.shape()) {
      throw ShapeError("parameter " + p->name + " has mismatched gradient shape");
    }
    m_.emplace_back(p->value.size(), 0.0);
    v_.emplace_back(p->value.size(), 0.0);
  }
}

template <typename T>
void Adam<T>::step() {
  ++steps_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);
  const double lr = config_.learning_rate;
  const double eps = config_.epsilon;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter<T>& p = *params_[k];
    if (p.grad.size() != p.value.size()) throw ShapeError("parameter " + p.name + " changed shape");
    double* m = m_[k].data();
    double* v = v_[k].data();
    T* w = p.value.data();
    const T* g = p.grad.data();
    const std::size_t n = p.value.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double gi = static_cast<double>(g[i]);
      m[i] = b1 * m[i] + (1.0 - b1) * gi;
      v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      w[i] = static_cast<T>(static_cast<double>(w[i]) - lr * m_hat / (std::sqrt(v_hat) + eps));
    }
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace pathloss::nn
