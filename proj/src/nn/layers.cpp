#include "pathloss/nn/layers.hpp"

#include <Eigen/Core>
#include <limits>

namespace pathloss::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

void require_rank(const Shape& shape, std::size_t rank, const char* what) {
  if (shape.size() != rank) {
    throw ShapeError(std::string(what) + " expects rank " + std::to_string(rank) + " input, got " +
                     to_string(shape));
  }
}

}  // namespace

LayerSpec LayerSpec::conv(std::size_t in, std::size_t out, Window kernel, Window stride,
                          Window padding) {
  if (in == 0 || out == 0 || kernel.h == 0 || kernel.w == 0 || stride.h == 0 || stride.w == 0) {
    throw ShapeError("conv layer needs positive channels, kernel and stride");
  }
  LayerSpec s;
  s.kind = LayerKind::kConv;
  s.in_channels = in;
  s.out_channels = out;
  s.kernel = kernel;
  s.stride = stride;
  s.padding = padding;
  return s;
}

LayerSpec LayerSpec::maxpool_same(Window kernel) {
  if (kernel.h % 2 == 0 || kernel.w % 2 == 0) throw ShapeError("same max pool needs odd kernels");
  LayerSpec s;
  s.kind = LayerKind::kMaxPoolSame;
  s.kernel = kernel;
  s.padding = {(kernel.h - 1) / 2, (kernel.w - 1) / 2};
  return s;
}

LayerSpec LayerSpec::relu() {
  LayerSpec s;
  s.kind = LayerKind::kRelu;
  return s;
}

LayerSpec LayerSpec::dropout(double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) throw DomainError("dropout rate must lie in [0, 1)");
  LayerSpec s;
  s.kind = LayerKind::kDropout;
  s.rate = rate;
  return s;
}

LayerSpec LayerSpec::flatten() {
  LayerSpec s;
  s.kind = LayerKind::kFlatten;
  return s;
}

LayerSpec LayerSpec::dense(std::size_t in, std::size_t out) {
  if (in == 0 || out == 0) throw ShapeError("dense layer needs positive sizes");
  LayerSpec s;
  s.kind = LayerKind::kDense;
  s.in_channels = in;
  s.out_channels = out;
  return s;
}

const char* kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv: return "conv";
    case LayerKind::kMaxPoolSame: return "maxpool_same";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kDropout: return "dropout";
    case LayerKind::kFlatten: return "flatten";
    case LayerKind::kDense: return "dense";
  }
  return "?";
}

nlohmann::json to_json(const LayerSpec& s) {
  nlohmann::json j = {{"kind", kind_name(s.kind)}};
  switch (s.kind) {
    case LayerKind::kConv:
      j["in"] = s.in_channels;
      j["out"] = s.out_channels;
      j["kernel"] = {s.kernel.h, s.kernel.w};
      j["stride"] = {s.stride.h, s.stride.w};
      j["padding"] = {s.padding.h, s.padding.w};
      break;
    case LayerKind::kMaxPoolSame:
      j["kernel"] = {s.kernel.h, s.kernel.w};
      break;
    case LayerKind::kDropout:
      j["rate"] = s.rate;
      break;
    case LayerKind::kDense:
      j["in"] = s.in_channels;
      j["out"] = s.out_channels;
      break;
    default:
      break;
  }
  return j;
}

LayerSpec layer_from_json(const nlohmann::json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    auto window = [&](const char* key) {
      const auto v = j.at(key).get<std::vector<std::size_t>>();
      if (v.size() != 2) throw FormatError(std::string("layer ") + key + " needs 2 entries");
      return Window{v[0], v[1]};
    };
    if (kind == "conv") {
      return LayerSpec::conv(j.at("in"), j.at("out"), window("kernel"), window("stride"),
                             window("padding"));
    }
    if (kind == "maxpool_same") return LayerSpec::maxpool_same(window("kernel"));
    if (kind == "relu") return LayerSpec::relu();
    if (kind == "dropout") return LayerSpec::dropout(j.at("rate").get<double>());
    if (kind == "flatten") return LayerSpec::flatten();
    if (kind == "dense") return LayerSpec::dense(j.at("in"), j.at("out"));
    throw FormatError("unknown layer kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("layer spec: ") + e.what());
  }
}

std::size_t conv_output_size(std::size_t size, std::size_t kernel, std::size_t stride,
                             std::size_t padding) {
  if (size + 2 * padding < kernel) throw ShapeError("conv window larger than padded input");
  return (size + 2 * padding - kernel) / stride + 1;
}

std::size_t parameter_count(const LayerSpec& s) {
  switch (s.kind) {
    case LayerKind::kConv:
      return s.out_channels * s.in_channels * s.kernel.h * s.kernel.w + s.out_channels;
    case LayerKind::kDense:
      return s.out_channels * s.in_channels + s.out_channels;
    default:
      return 0;
  }
}

// ---------------------------------------------------------------------------
// Conv

template <typename T>
Conv<T>::Conv(const LayerSpec& spec, const std::string& name) : spec_(spec) {
  weight_.name = name + ".weight";
  weight_.value = Tensor<T>({spec.out_channels, spec.in_channels, spec.kernel.h, spec.kernel.w});
  weight_.grad = Tensor<T>(weight_.value.shape());
  bias_.name = name + ".bias";
  bias_.value = Tensor<T>({spec.out_channels});
  bias_.grad = Tensor<T>({spec.out_channels});
}

template <typename T>
Shape Conv<T>::output_shape(const Shape& input) const {
  require_rank(input, 3, "conv");
  if (input[0] != spec_.in_channels) {
    throw ShapeError("conv expects " + std::to_string(spec_.in_channels) + " channels, got " +
                     std::to_string(input[0]));
  }
  return {spec_.out_channels,
          conv_output_size(input[1], spec_.kernel.h, spec_.stride.h, spec_.padding.h),
          conv_output_size(input[2], spec_.kernel.w, spec_.stride.w, spec_.padding.w)};
}

template <typename T>
typename Conv<T>::Geometry Conv<T>::geometry(const Shape& input) const {
  require_rank(input, 4, "conv");
  const Shape out = output_shape({input[1], input[2], input[3]});
  return {input[0], input[1], input[2], input[3], out[1], out[2]};
}

template <typename T>
void Conv<T>::im2col(const T* x, const Geometry& g, std::size_t b0, std::size_t nb, T* cols) const {
  const std::size_t P = g.out_h * g.out_w;
  const std::size_t N = nb * P;
  const auto H = static_cast<std::ptrdiff_t>(g.h);
  const auto W = static_cast<std::ptrdiff_t>(g.w);
  std::size_t r = 0;
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t ki = 0; ki < spec_.kernel.h; ++ki) {
      for (std::size_t kj = 0; kj < spec_.kernel.w; ++kj, ++r) {
        T* row = cols + r * N;
        for (std::size_t b = 0; b < nb; ++b) {
          const T* plane = x + ((b0 + b) * g.channels + c) * g.h * g.w;
          for (std::size_t oy = 0; oy < g.out_h; ++oy) {
            T* dst = row + b * P + oy * g.out_w;
            const auto iy = static_cast<std::ptrdiff_t>(oy * spec_.stride.h + ki) -
                            static_cast<std::ptrdiff_t>(spec_.padding.h);
            if (iy < 0 || iy >= H) {
              std::fill(dst, dst + g.out_w, T(0));
              continue;
            }
            const T* src = plane + iy * W;
            for (std::size_t ox = 0; ox < g.out_w; ++ox) {
              const auto ix = static_cast<std::ptrdiff_t>(ox * spec_.stride.w + kj) -
                              static_cast<std::ptrdiff_t>(spec_.padding.w);
              dst[ox] = (ix >= 0 && ix < W) ? src[ix] : T(0);
            }
          }
        }
      }
    }
  }
}

template <typename T>
void Conv<T>::col2im(const T* cols, const Geometry& g, std::size_t b0, std::size_t nb, T* dx) const {
  const std::size_t P = g.out_h * g.out_w;
  const std::size_t N = nb * P;
  const auto H = static_cast<std::ptrdiff_t>(g.h);
  const auto W = static_cast<std::ptrdiff_t>(g.w);
  std::size_t r = 0;
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t ki = 0; ki < spec_.kernel.h; ++ki) {
      for (std::size_t kj = 0; kj < spec_.kernel.w; ++kj, ++r) {
        const T* row = cols + r * N;
        for (std::size_t b = 0; b < nb; ++b) {
          T* plane = dx + ((b0 + b) * g.channels + c) * g.h * g.w;
          for (std::size_t oy = 0; oy < g.out_h; ++oy) {
            const auto iy = static_cast<std::ptrdiff_t>(oy * spec_.stride.h + ki) -
                            static_cast<std::ptrdiff_t>(spec_.padding.h);
            if (iy < 0 || iy >= H) continue;
            const T* src = row + b * P + oy * g.out_w;
            T* dst = plane + iy * W;
            for (std::size_t ox = 0; ox < g.out_w; ++ox) {
              const auto ix = static_cast<std::ptrdiff_t>(ox * spec_.stride.w + kj) -
                              static_cast<std::ptrdiff_t>(spec_.padding.w);
              if (ix >= 0 && ix < W) dst[ix] += src[ox];
            }
          }
        }
      }
    }
  }
}

template <typename T>
std::size_t Conv<T>::chunk_samples(const Geometry& g) const {
  constexpr std::size_t kTargetColumns = 2048;
  const std::size_t P = g.out_h * g.out_w;
  return std::clamp<std::size_t>(kTargetColumns / std::max<std::size_t>(P, 1), 1, g.batch);
}

template <typename T>
Tensor<T> Conv<T>::forward(const Tensor<T>& input, Mode, Rng&) {
  const Geometry g = geometry(input.shape());
  const std::size_t K = spec_.in_channels * spec_.kernel.h * spec_.kernel.w;
  const std::size_t P = g.out_h * g.out_w;
  const std::size_t C_out = spec_.out_channels;
  const std::size_t chunk = chunk_samples(g);

  Tensor<T> out({g.batch, C_out, g.out_h, g.out_w});
  std::vector<T> cols(K * chunk * P);
  std::vector<T> y(C_out * chunk * P);
  const ConstMatMap<T> w(weight_.value.data(), C_out, K);
  for (std::size_t b0 = 0; b0 < g.batch; b0 += chunk) {
    const std::size_t nb = std::min(chunk, g.batch - b0);
    const std::size_t N = nb * P;
    im2col(input.data(), g, b0, nb, cols.data());
    if (nb == 1) {
      // One sample: the product already has the output layout.
      MatMap<T>(out.data() + b0 * C_out * P, C_out, N).noalias() = w * ConstMatMap<T>(cols.data(), K, N);
      for (std::size_t co = 0; co < C_out; ++co) {
        T* dst = out.data() + (b0 * C_out + co) * P;
        const T bias = bias_.value[co];
        for (std::size_t p = 0; p < P; ++p) dst[p] += bias;
      }
      continue;
    }
    MatMap<T>(y.data(), C_out, N).noalias() = w * ConstMatMap<T>(cols.data(), K, N);
    for (std::size_t b = 0; b < nb; ++b) {
      for (std::size_t co = 0; co < C_out; ++co) {
        const T bias = bias_.value[co];
        const T* src = y.data() + co * N + b * P;
        T* dst = out.data() + ((b0 + b) * C_out + co) * P;
        for (std::size_t p = 0; p < P; ++p) dst[p] = src[p] + bias;
      }
    }
  }
  input_ = input;
  return out;
}

template <typename T>
Tensor<T> Conv<T>::backward(const Tensor<T>& grad_output) {
  const Geometry g = geometry(input_.shape());
  const std::size_t K = spec_.in_channels * spec_.kernel.h * spec_.kernel.w;
  const std::size_t P = g.out_h * g.out_w;
  const std::size_t C_out = spec_.out_channels;
  if (grad_output.size() != g.batch * C_out * P) throw ShapeError("conv backward: gradient shape");
  const std::size_t chunk = chunk_samples(g);

  const T* go = grad_output.data();
  for (std::size_t co = 0; co < C_out; ++co) {
    double acc = 0.0;
    for (std::size_t b = 0; b < g.batch; ++b) {
      const T* row = go + (b * C_out + co) * P;
      for (std::size_t p = 0; p < P; ++p) acc += static_cast<double>(row[p]);
    }
    bias_.grad[co] += static_cast<T>(acc);
  }

  Tensor<T> dx(input_.shape());
  std::vector<T> cols(K * chunk * P);
  std::vector<T> dy(C_out * chunk * P);
  const ConstMatMap<T> w(weight_.value.data(), C_out, K);
  MatMap<T> dw(weight_.grad.data(), C_out, K);
  for (std::size_t b0 = 0; b0 < g.batch; b0 += chunk) {
    const std::size_t nb = std::min(chunk, g.batch - b0);
    const std::size_t N = nb * P;
    for (std::size_t b = 0; b < nb; ++b) {
      for (std::size_t co = 0; co < C_out; ++co) {
        std::copy_n(go + ((b0 + b) * C_out + co) * P, P, dy.data() + co * N + b * P);
      }
    }
    const ConstMatMap<T> dY(dy.data(), C_out, N);
    im2col(input_.data(), g, b0, nb, cols.data());
    dw.noalias() += dY * ConstMatMap<T>(cols.data(), K, N).transpose();
    MatMap<T>(cols.data(), K, N).noalias() = w.transpose() * dY;
    col2im(cols.data(), g, b0, nb, dx.data());
  }
  return dx;
}

// ---------------------------------------------------------------------------
// MaxPoolSame

template <typename T>
MaxPoolSame<T>::MaxPoolSame(const LayerSpec& spec) : spec_(spec) {}

// Separable window max: a pass along the width, then along the length. Both
// passes keep the first strict maximum, which equals the first maximum in
// row-major window order. Padding cells read as 0 with index -1.
template <typename T>
Tensor<T> MaxPoolSame<T>::forward(const Tensor<T>& input, Mode, Rng&) {
  require_rank(input.shape(), 4, "max pool");
  input_shape_ = input.shape();
  const std::size_t planes = input_shape_[0] * input_shape_[1];
  const auto H = static_cast<std::ptrdiff_t>(input_shape_[2]);
  const auto W = static_cast<std::ptrdiff_t>(input_shape_[3]);
  const auto ph = static_cast<std::ptrdiff_t>(spec_.padding.h);
  const auto pw = static_cast<std::ptrdiff_t>(spec_.padding.w);
  const std::size_t plane_size = static_cast<std::size_t>(H * W);

  Tensor<T> out(input_shape_);
  argmax_.resize(input.size());
  std::vector<T> row_max(plane_size);
  std::vector<std::int32_t> row_arg(plane_size);
  for (std::size_t p = 0; p < planes; ++p) {
    const T* x = input.data() + p * plane_size;
    for (std::ptrdiff_t iy = 0; iy < H; ++iy) {
      const T* src = x + iy * W;
      T* m = row_max.data() + iy * W;
      std::int32_t* a = row_arg.data() + iy * W;
      const auto base = static_cast<std::int32_t>(iy * W);
      for (std::ptrdiff_t ox = 0; ox < W; ++ox) {
        if (pw == 1 && ox >= 1 && ox + 1 < W) {
          // Branch-free interior of the common 3-wide window.
          const T v0 = src[ox - 1], v1 = src[ox], v2 = src[ox + 1];
          const auto i0 = base + static_cast<std::int32_t>(ox) - 1;
          const bool g1 = v1 > v0;
          T best = g1 ? v1 : v0;
          std::int32_t at = g1 ? i0 + 1 : i0;
          const bool g2 = v2 > best;
          m[ox] = g2 ? v2 : best;
          a[ox] = g2 ? i0 + 2 : at;
          continue;
        }
        T best = -std::numeric_limits<T>::infinity();
        std::int32_t best_at = -1;
        for (std::ptrdiff_t dx = -pw; dx <= pw; ++dx) {
          const std::ptrdiff_t ix = ox + dx;
          const bool inside = ix >= 0 && ix < W;
          const T v = inside ? src[ix] : T(0);
          if (v > best) {
            best = v;
            best_at = inside ? static_cast<std::int32_t>(iy * W + ix) : -1;
          }
        }
        m[ox] = best;
        a[ox] = best_at;
      }
    }
    T* y = out.data() + p * plane_size;
    std::int32_t* arg = argmax_.data() + p * plane_size;
    for (std::ptrdiff_t oy = 0; oy < H; ++oy) {
      if (ph == 1 && oy >= 1 && oy + 1 < H) {
        const T* m0 = row_max.data() + (oy - 1) * W;
        const T* m1 = m0 + W;
        const T* m2 = m1 + W;
        const std::int32_t* a0 = row_arg.data() + (oy - 1) * W;
        const std::int32_t* a1 = a0 + W;
        const std::int32_t* a2 = a1 + W;
        T* yr = y + oy * W;
        std::int32_t* ar = arg + oy * W;
        for (std::ptrdiff_t ox = 0; ox < W; ++ox) {
          const bool g1 = m1[ox] > m0[ox];
          const T best = g1 ? m1[ox] : m0[ox];
          const std::int32_t at = g1 ? a1[ox] : a0[ox];
          const bool g2 = m2[ox] > best;
          yr[ox] = g2 ? m2[ox] : best;
          ar[ox] = g2 ? a2[ox] : at;
        }
        continue;
      }
      for (std::ptrdiff_t ox = 0; ox < W; ++ox) {
        T best = -std::numeric_limits<T>::infinity();
        std::int32_t best_at = -1;
        for (std::ptrdiff_t dy = -ph; dy <= ph; ++dy) {
          const std::ptrdiff_t iy = oy + dy;
          if (iy < 0 || iy >= H) {
            // A padding row contributes zeros.
            if (T(0) > best) {
              best = T(0);
              best_at = -1;
            }
            continue;
          }
          const T v = row_max[iy * W + ox];
          if (v > best) {
            best = v;
            best_at = row_arg[iy * W + ox];
          }
        }
        y[oy * W + ox] = best;
        arg[oy * W + ox] = best_at;
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> MaxPoolSame<T>::backward(const Tensor<T>& grad_output) {
  if (grad_output.shape() != input_shape_) throw ShapeError("max pool backward: gradient shape");
  Tensor<T> dx(input_shape_);
  const std::size_t plane_size = input_shape_[2] * input_shape_[3];
  const std::size_t planes = input_shape_[0] * input_shape_[1];
  for (std::size_t p = 0; p < planes; ++p) {
    const T* g = grad_output.data() + p * plane_size;
    T* d = dx.data() + p * plane_size;
    const std::int32_t* arg = argmax_.data() + p * plane_size;
    for (std::size_t k = 0; k < plane_size; ++k) {
      if (arg[k] >= 0) d[arg[k]] += g[k];
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Relu, Dropout, Flatten

template <typename T>
Tensor<T> Relu<T>::forward(const Tensor<T>& input, Mode, Rng&) {
  Tensor<T> out(input.shape());
  active_.resize(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    const bool on = input[i] > T(0);
    active_[i] = on;
    out[i] = on ? input[i] : T(0);
  }
  return out;
}

template <typename T>
Tensor<T> Relu<T>::backward(const Tensor<T>& grad_output) {
  if (grad_output.size() != active_.size()) throw ShapeError("relu backward: gradient shape");
  Tensor<T> dx(grad_output.shape());
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = active_[i] ? grad_output[i] : T(0);
  return dx;
}

template <typename T>
Dropout<T>::Dropout(const LayerSpec& spec) : spec_(spec) {}

template <typename T>
Tensor<T> Dropout<T>::forward(const Tensor<T>& input, Mode mode, Rng& rng) {
  if (mode == Mode::kEval || spec_.rate == 0.0) {
    scale_.clear();
    return input;
  }
  const T keep_scale = static_cast<T>(1.0 / (1.0 - spec_.rate));
  scale_.resize(input.size());
  Tensor<T> out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) {
    scale_[i] = rng.uniform() < spec_.rate ? T(0) : keep_scale;
    out[i] = input[i] * scale_[i];
  }
  return out;
}

template <typename T>
Tensor<T> Dropout<T>::backward(const Tensor<T>& grad_output) {
  if (scale_.empty()) return grad_output;
  if (grad_output.size() != scale_.size()) throw ShapeError("dropout backward: gradient shape");
  Tensor<T> dx(grad_output.shape());
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = grad_output[i] * scale_[i];
  return dx;
}

template <typename T>
Tensor<T> Flatten<T>::forward(const Tensor<T>& input, Mode, Rng&) {
  if (input.rank() < 1) throw ShapeError("flatten needs a batch axis");
  input_shape_ = input.shape();
  Tensor<T> out = input;
  out.reshape({input_shape_[0], input.size() / std::max<std::size_t>(1, input_shape_[0])});
  return out;
}

template <typename T>
Tensor<T> Flatten<T>::backward(const Tensor<T>& grad_output) {
  Tensor<T> dx = grad_output;
  dx.reshape(input_shape_);
  return dx;
}

// ---------------------------------------------------------------------------
// Dense

template <typename T>
Dense<T>::Dense(const LayerSpec& spec, const std::string& name) : spec_(spec) {
  weight_.name = name + ".weight";
  weight_.value = Tensor<T>({spec.out_channels, spec.in_channels});
  weight_.grad = Tensor<T>(weight_.value.shape());
  bias_.name = name + ".bias";
  bias_.value = Tensor<T>({spec.out_channels});
  bias_.grad = Tensor<T>({spec.out_channels});
}

template <typename T>
Shape Dense<T>::output_shape(const Shape& input) const {
  if (input.size() != 1 || input[0] != spec_.in_channels) {
    throw ShapeError("dense expects " + std::to_string(spec_.in_channels) + " features, got " +
                     to_string(input));
  }
  return {spec_.out_channels};
}

template <typename T>
Tensor<T> Dense<T>::forward(const Tensor<T>& input, Mode, Rng&) {
  require_rank(input.shape(), 2, "dense");
  output_shape({input.dim(1)});
  const std::size_t B = input.dim(0);
  const std::size_t F = spec_.in_channels;
  const std::size_t U = spec_.out_channels;
  Tensor<T> out({B, U});
  MatMap<T> y(out.data(), B, U);
  y.noalias() = ConstMatMap<T>(input.data(), B, F) *
                ConstMatMap<T>(weight_.value.data(), U, F).transpose();
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t u = 0; u < U; ++u) y(b, u) += bias_.value[u];
  }
  input_ = input;
  return out;
}

template <typename T>
Tensor<T> Dense<T>::backward(const Tensor<T>& grad_output) {
  const std::size_t B = input_.dim(0);
  const std::size_t F = spec_.in_channels;
  const std::size_t U = spec_.out_channels;
  if (grad_output.size() != B * U) throw ShapeError("dense backward: gradient shape");
  ConstMatMap<T> dy(grad_output.data(), B, U);
  MatMap<T>(weight_.grad.data(), U, F).noalias() +=
      dy.transpose() * ConstMatMap<T>(input_.data(), B, F);
  for (std::size_t u = 0; u < U; ++u) {
    double acc = 0.0;
    for (std::size_t b = 0; b < B; ++b) acc += static_cast<double>(dy(b, u));
    bias_.grad[u] += static_cast<T>(acc);
  }
  Tensor<T> dx(input_.shape());
  MatMap<T>(dx.data(), B, F).noalias() = dy * ConstMatMap<T>(weight_.value.data(), U, F);
  return dx;
}

template <typename T>
std::unique_ptr<Layer<T>> make_layer(const LayerSpec& spec, const std::string& name) {
  switch (spec.kind) {
    case LayerKind::kConv: return std::make_unique<Conv<T>>(spec, name);
    case LayerKind::kMaxPoolSame: return std::make_unique<MaxPoolSame<T>>(spec);
    case LayerKind::kRelu: return std::make_unique<Relu<T>>();
    case LayerKind::kDropout: return std::make_unique<Dropout<T>>(spec);
    case LayerKind::kFlatten: return std::make_unique<Flatten<T>>();
    case LayerKind::kDense: return std::make_unique<Dense<T>>(spec, name);
  }
  throw ShapeError("unknown layer kind");
}

#define PATHLOSS_INSTANTIATE_LAYERS(T)                                               \
  template class Conv<T>;                                                            \
  template class MaxPoolSame<T>;                                                     \
  template class Relu<T>;                                                            \
  template class Dropout<T>;                                                         \
  template class Flatten<T>;                                                         \
  template class Dense<T>;                                                           \
  template std::unique_ptr<Layer<T>> make_layer<T>(const LayerSpec&, const std::string&);

PATHLOSS_INSTANTIATE_LAYERS(float)
PATHLOSS_INSTANTIATE_LAYERS(double)

}  // namespace pathloss::nn
