#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dupscope/cnn/tensor.hpp"
#include "dupscope/error.hpp"

namespace dupscope::cnn {

inline constexpr int kPairChannels = 6;
inline constexpr int kConvLayers = 5;
inline constexpr int kKernel = 3;

enum class PoolKind { Max, Average };

/// Five 3x3 convolutions (padding 1) and one single-neuron fully connected layer.
/// Block i: conv -> [batchnorm, blocks 2-4] -> [LeakyReLU, blocks 1-4] -> [2x2 pool where enabled].
/// Block 5 is linear and feeds the FC layer directly; the output is a sigmoid.
struct ModelConfig {
  std::uint32_t input_size = 128;
  std::array<int, kConvLayers> filters{64, 32, 16, 6, 1};
  std::array<int, kConvLayers> strides{4, 1, 1, 1, 1};
  std::array<bool, kConvLayers> pooled{true, true, true, true, false};
  PoolKind pooling = PoolKind::Max;
  double leaky_slope = 0.2;
  double batchnorm_eps = 1e-5;
  double batchnorm_momentum = 0.1;

  /// Small network for gradient checks: 16x16 input, filters [2,2,2,2,1], unit strides.
  static ModelConfig tiny() {
    ModelConfig c;
    c.input_size = 16;
    c.filters = {2, 2, 2, 2, 1};
    c.strides = {1, 1, 1, 1, 1};
    return c;
  }

  static constexpr bool has_batchnorm(int layer) { return layer >= 1 && layer <= 3; }
  static constexpr bool has_bias(int layer) { return !has_batchnorm(layer); }
  static constexpr bool has_activation(int layer) { return layer < kConvLayers - 1; }

  struct LayerShape {
    int in_channels = 0, out_channels = 0;
    int in_size = 0, conv_size = 0, out_size = 0;
  };

  std::array<LayerShape, kConvLayers> layer_shapes() const {
    std::array<LayerShape, kConvLayers> s{};
    int size = static_cast<int>(input_size), channels = kPairChannels;
    for (int i = 0; i < kConvLayers; ++i) {
      auto& l = s[static_cast<std::size_t>(i)];
      const auto idx = static_cast<std::size_t>(i);
      l.in_channels = channels;
      l.out_channels = filters[idx];
      l.in_size = size;
      l.conv_size = (size - 1) / strides[idx] + 1;
      l.out_size = pooled[idx] ? l.conv_size / 2 : l.conv_size;
      require(l.out_size >= 1, Errc::InvalidConfig,
              "input_size " + std::to_string(input_size) + " shrinks to zero at conv layer " + std::to_string(i + 1));
      size = l.out_size;
      channels = l.out_channels;
    }
    return s;
  }

  std::size_t fc_inputs() const {
    const auto last = layer_shapes().back();
    return static_cast<std::size_t>(last.out_channels) * static_cast<std::size_t>(last.out_size * last.out_size);
  }

  void validate() const {
    require(input_size >= 1, Errc::InvalidConfig, "input_size must be positive");
    for (std::size_t i = 0; i < filters.size(); ++i) {
      require(filters[i] >= 1, Errc::InvalidConfig, "filter counts must be positive");
      require(strides[i] >= 1, Errc::InvalidConfig, "strides must be positive");
    }
    require(leaky_slope >= 0 && leaky_slope < 1, Errc::InvalidConfig, "leaky_slope must lie in [0,1)");
    require(batchnorm_eps > 0, Errc::InvalidConfig, "batchnorm_eps must be positive");
    require(batchnorm_momentum > 0 && batchnorm_momentum <= 1, Errc::InvalidConfig, "batchnorm_momentum must lie in (0,1]");
    (void)layer_shapes();
  }

  bool operator==(const ModelConfig&) const = default;
};

template <typename T>
struct ParamGroup {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<T> value;
};

/// One gradient vector per parameter group, in the model's group order.
template <typename T>
using Gradients = std::vector<std::vector<T>>;

/// Intermediate values kept by a training-mode forward pass for backpropagation.
template <typename T>
struct ForwardCache {
  std::size_t batch = 0;
  std::array<std::vector<T>, kConvLayers> inputs;    // block inputs [N,C,H,W]
  std::array<std::vector<T>, kConvLayers> xhat;      // normalized conv output (batchnorm blocks)
  std::array<std::vector<T>, kConvLayers> inv_std;   // per channel (batchnorm blocks)
  std::array<std::vector<T>, kConvLayers> pre_act;   // LeakyReLU input
  std::array<std::vector<std::uint32_t>, kConvLayers> pool_arg;  // max-pool source index per output
  std::array<std::size_t, kConvLayers> pre_pool_size{};
  std::vector<T> flat;  // FC input [N,F]
  std::vector<T> prob;  // [N]
};

namespace detail {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
void im2col(const T* x, int c, int h, int stride, int out, RowMat<T>& cols) {
  cols.resize(c * kKernel * kKernel, out * out);
  for (int ch = 0; ch < c; ++ch)
    for (int ky = 0; ky < kKernel; ++ky)
      for (int kx = 0; kx < kKernel; ++kx) {
        T* row = cols.row((ch * kKernel + ky) * kKernel + kx).data();
        for (int oy = 0; oy < out; ++oy) {
          const int iy = oy * stride + ky - 1;
          for (int ox = 0; ox < out; ++ox) {
            const int ix = ox * stride + kx - 1;
            row[oy * out + ox] = (iy < 0 || iy >= h || ix < 0 || ix >= h) ? T(0) : x[(ch * h + iy) * h + ix];
          }
        }
      }
}

template <typename T>
void col2im_add(const RowMat<T>& cols, int c, int h, int stride, int out, T* dx) {
  for (int ch = 0; ch < c; ++ch)
    for (int ky = 0; ky < kKernel; ++ky)
      for (int kx = 0; kx < kKernel; ++kx) {
        const T* row = cols.row((ch * kKernel + ky) * kKernel + kx).data();
        for (int oy = 0; oy < out; ++oy) {
          const int iy = oy * stride + ky - 1;
          if (iy < 0 || iy >= h) continue;
          for (int ox = 0; ox < out; ++ox) {
            const int ix = ox * stride + kx - 1;
            if (ix < 0 || ix >= h) continue;
            dx[(ch * h + iy) * h + ix] += row[oy * out + ox];
          }
        }
      }
}

template <typename T>
T open_unit(T v) {
  const T lo = std::nextafter(T(0), T(1)), hi = std::nextafter(T(1), T(0));
  return std::clamp(v, lo, hi);
}

}  // namespace detail

template <typename T>
class BasicModel {
 public:
  explicit BasicModel(const ModelConfig& config = {}, std::uint64_t seed = 0) : config_(config) {
    config_.validate();
    shapes_ = config_.layer_shapes();
    for (int i = 0; i < kConvLayers; ++i) {
      const auto& s = shapes_[static_cast<std::size_t>(i)];
      const std::string id = std::to_string(i + 1);
      const auto k = static_cast<std::size_t>(s.out_channels);
      conv_w_[i] = add("conv" + id + ".weight", {k, static_cast<std::size_t>(s.in_channels * kKernel * kKernel)});
      conv_b_[i] = ModelConfig::has_bias(i) ? add("conv" + id + ".bias", {k}) : -1;
      if (ModelConfig::has_batchnorm(i)) {
        bn_gamma_[i] = add("bn" + id + ".gamma", {k});
        bn_beta_[i] = add("bn" + id + ".beta", {k});
        running_mean_[static_cast<std::size_t>(i)].assign(k, T(0));
        running_var_[static_cast<std::size_t>(i)].assign(k, T(1));
      }
    }
    fc_w_ = add("fc.weight", {config_.fc_inputs()});
    fc_b_ = add("fc.bias", {1});
    initialize(seed);
  }

  const ModelConfig& config() const noexcept { return config_; }
  std::vector<ParamGroup<T>>& params() noexcept { return params_; }
  const std::vector<ParamGroup<T>>& params() const noexcept { return params_; }
  std::array<std::vector<T>, kConvLayers>& running_mean() noexcept { return running_mean_; }
  std::array<std::vector<T>, kConvLayers>& running_var() noexcept { return running_var_; }
  const std::array<std::vector<T>, kConvLayers>& running_mean() const noexcept { return running_mean_; }
  const std::array<std::vector<T>, kConvLayers>& running_var() const noexcept { return running_var_; }

  ParamGroup<T>& param(const std::string& name) {
    for (auto& p : params_)
      if (p.name == name) return p;
    fail(Errc::InvalidArgument, "no parameter group named " + name);
  }

  /// Kaiming-normal conv weights (LeakyReLU gain), uniform FC weights, zero biases, unit BN scale.
  void initialize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double a = config_.leaky_slope;
    for (int i = 0; i < kConvLayers; ++i) {
      auto& w = params_[static_cast<std::size_t>(conv_w_[i])];
      const double fan_in = static_cast<double>(w.shape[1]);
      std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / ((1.0 + a * a) * fan_in)));
      for (auto& v : w.value) v = static_cast<T>(dist(rng));
      if (conv_b_[i] >= 0) std::fill(group(conv_b_[i]).begin(), group(conv_b_[i]).end(), T(0));
      if (bn_gamma_[i] >= 0) {
        std::fill(group(bn_gamma_[i]).begin(), group(bn_gamma_[i]).end(), T(1));
        std::fill(group(bn_beta_[i]).begin(), group(bn_beta_[i]).end(), T(0));
        std::fill(running_mean_[static_cast<std::size_t>(i)].begin(), running_mean_[static_cast<std::size_t>(i)].end(), T(0));
        std::fill(running_var_[static_cast<std::size_t>(i)].begin(), running_var_[static_cast<std::size_t>(i)].end(), T(1));
      }
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(config_.fc_inputs()));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (auto& v : group(fc_w_)) v = static_cast<T>(u(rng));
    group(fc_b_)[0] = T(0);
  }

  /// Training mode normalizes with batch statistics and folds them into the running averages.
  BasicTensor<T> forward(const BasicTensor<T>& input, bool training, ForwardCache<T>* cache = nullptr) {
    if (!training) return predict(input);
    std::array<std::vector<T>, kConvLayers> mean, var;
    auto out = run(input, true, cache, &mean, &var);
    update_running(mean, var, input.dim(0));
    return out;
  }

  /// Inference with running statistics; read-only and safe to call concurrently.
  BasicTensor<T> predict(const BasicTensor<T>& input) const { return run(input, false, nullptr, nullptr, nullptr); }

  /// Training-mode pass that leaves the running statistics untouched.
  BasicTensor<T> forward_pure(const BasicTensor<T>& input, ForwardCache<T>* cache = nullptr) const {
    return run(input, true, cache, nullptr, nullptr);
  }

  /// Gradients of the mean binary cross-entropy with respect to every parameter group.
  Gradients<T> backward(const ForwardCache<T>& cache, const std::vector<int>& labels) const {
    const std::size_t n = cache.batch;
    require(labels.size() == n, Errc::LengthMismatch, "label count differs from batch size");
    Gradients<T> grads(params_.size());
    for (std::size_t g = 0; g < params_.size(); ++g) grads[g].assign(params_[g].value.size(), T(0));

    // d(mean BCE)/d(logit) = (p - y) / N.
    const std::size_t f = config_.fc_inputs();
    std::vector<T> dflat(n * f);
    const auto& w = group(fc_w_);
    auto& gw = grads[static_cast<std::size_t>(fc_w_)];
    auto& gb = grads[static_cast<std::size_t>(fc_b_)];
    for (std::size_t i = 0; i < n; ++i) {
      const T dlogit = (cache.prob[i] - static_cast<T>(labels[i])) / static_cast<T>(n);
      gb[0] += dlogit;
      for (std::size_t j = 0; j < f; ++j) {
        gw[j] += dlogit * cache.flat[i * f + j];
        dflat[i * f + j] = dlogit * w[j];
      }
    }

    std::vector<T> dout = std::move(dflat);
    for (int li = kConvLayers - 1; li >= 0; --li) {
      const auto l = static_cast<std::size_t>(li);
      const auto& s = shapes_[l];
      const int k = s.out_channels, cs = s.conv_size;
      const std::size_t plane = static_cast<std::size_t>(cs * cs);
      // Undo pooling.
      std::vector<T> dact(cache.pre_pool_size[l], T(0));
      if (config_.pooled[l]) {
        const int os = s.out_size;
        if (config_.pooling == PoolKind::Max) {
          for (std::size_t idx = 0; idx < dout.size(); ++idx) dact[cache.pool_arg[l][idx]] += dout[idx];
        } else {
          for (std::size_t i = 0; i < n; ++i)
            for (int c = 0; c < k; ++c)
              for (int oy = 0; oy < os; ++oy)
                for (int ox = 0; ox < os; ++ox) {
                  const T g = dout[((i * static_cast<std::size_t>(k) + static_cast<std::size_t>(c)) * static_cast<std::size_t>(os) +
                                    static_cast<std::size_t>(oy)) * static_cast<std::size_t>(os) + static_cast<std::size_t>(ox)] / T(4);
                  const std::size_t base = (i * static_cast<std::size_t>(k) + static_cast<std::size_t>(c)) * plane;
                  for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx)
                      dact[base + static_cast<std::size_t>((2 * oy + dy) * cs + 2 * ox + dx)] += g;
                }
        }
      } else {
        dact = std::move(dout);
      }
      // LeakyReLU.
      if (ModelConfig::has_activation(li)) {
        const T slope = static_cast<T>(config_.leaky_slope);
        const auto& y = cache.pre_act[l];
        for (std::size_t idx = 0; idx < dact.size(); ++idx)
          if (!(y[idx] > T(0))) dact[idx] *= slope;
      }
      // Batchnorm.
      std::vector<T>& dz = dact;
      if (ModelConfig::has_batchnorm(li)) {
        const auto& gamma = group(bn_gamma_[li]);
        auto& ggamma = grads[static_cast<std::size_t>(bn_gamma_[li])];
        auto& gbeta = grads[static_cast<std::size_t>(bn_beta_[li])];
        const auto& xhat = cache.xhat[l];
        const T m = static_cast<T>(n * plane);
        for (int c = 0; c < k; ++c) {
          const auto cc = static_cast<std::size_t>(c);
          T sum_dy = 0, sum_dy_xhat = 0;
          for (std::size_t i = 0; i < n; ++i) {
            const std::size_t base = (i * static_cast<std::size_t>(k) + cc) * plane;
            for (std::size_t p = 0; p < plane; ++p) {
              sum_dy += dz[base + p];
              sum_dy_xhat += dz[base + p] * xhat[base + p];
            }
          }
          ggamma[cc] += sum_dy_xhat;
          gbeta[cc] += sum_dy;
          const T scale = gamma[cc] * cache.inv_std[l][cc] / m;
          for (std::size_t i = 0; i < n; ++i) {
            const std::size_t base = (i * static_cast<std::size_t>(k) + cc) * plane;
            for (std::size_t p = 0; p < plane; ++p)
              dz[base + p] = scale * (m * dz[base + p] - sum_dy - xhat[base + p] * sum_dy_xhat);
          }
        }
      }
      // Convolution.
      const int c_in = s.in_channels, h = s.in_size, stride = config_.strides[l];
      const std::size_t in_plane = static_cast<std::size_t>(c_in * h * h);
      Eigen::Map<const detail::RowMat<T>> wm(group(conv_w_[li]).data(), k, c_in * kKernel * kKernel);
      Eigen::Map<detail::RowMat<T>> gwm(grads[static_cast<std::size_t>(conv_w_[li])].data(), k, c_in * kKernel * kKernel);
      std::vector<T> dx(li > 0 ? n * in_plane : 0, T(0));
      detail::RowMat<T> cols, dcols;
      for (std::size_t i = 0; i < n; ++i) {
        Eigen::Map<const detail::RowMat<T>> dzm(dz.data() + i * static_cast<std::size_t>(k) * plane, k,
                                                static_cast<Eigen::Index>(plane));
        detail::im2col(cache.inputs[l].data() + i * in_plane, c_in, h, stride, cs, cols);
        gwm.noalias() += dzm * cols.transpose();
        if (conv_b_[li] >= 0) {
          auto& gbias = grads[static_cast<std::size_t>(conv_b_[li])];
          for (int c = 0; c < k; ++c) gbias[static_cast<std::size_t>(c)] += dzm.row(c).sum();
        }
        if (li > 0) {
          dcols.noalias() = wm.transpose() * dzm;
          detail::col2im_add(dcols, c_in, h, stride, cs, dx.data() + i * in_plane);
        }
      }
      dout = std::move(dx);
    }
    return grads;
  }

  /// Runs a non-updating training-mode pass and backpropagates; returns the mean loss.
  T loss_and_gradients(const BasicTensor<T>& input, const std::vector<int>& labels, Gradients<T>& grads) const;

 private:
  int add(const std::string& name, std::vector<std::size_t> shape) {
    ParamGroup<T> g;
    g.name = name;
    g.shape = std::move(shape);
    g.value.assign(BasicTensor<T>::element_count(g.shape), T(0));
    params_.push_back(std::move(g));
    return static_cast<int>(params_.size() - 1);
  }

  std::vector<T>& group(int idx) { return params_[static_cast<std::size_t>(idx)].value; }
  const std::vector<T>& group(int idx) const { return params_[static_cast<std::size_t>(idx)].value; }

  void update_running(const std::array<std::vector<T>, kConvLayers>& mean, const std::array<std::vector<T>, kConvLayers>& var,
                      std::size_t batch) {
    const T mom = static_cast<T>(config_.batchnorm_momentum);
    for (int li = 0; li < kConvLayers; ++li) {
      if (!ModelConfig::has_batchnorm(li)) continue;
      const auto l = static_cast<std::size_t>(li);
      const double m = static_cast<double>(batch) * shapes_[l].conv_size * shapes_[l].conv_size;
      const T unbias = static_cast<T>(m > 1 ? m / (m - 1) : 1.0);
      for (std::size_t c = 0; c < mean[l].size(); ++c) {
        running_mean_[l][c] = (T(1) - mom) * running_mean_[l][c] + mom * mean[l][c];
        running_var_[l][c] = (T(1) - mom) * running_var_[l][c] + mom * var[l][c] * unbias;
      }
    }
  }

  BasicTensor<T> run(const BasicTensor<T>& input, bool training, ForwardCache<T>* cache,
                     std::array<std::vector<T>, kConvLayers>* batch_mean,
                     std::array<std::vector<T>, kConvLayers>* batch_var) const {
    input.check();
    const auto in_size = static_cast<std::size_t>(config_.input_size);
    require(input.rank() == 4 && input.dim(1) == kPairChannels && input.dim(2) == in_size && input.dim(3) == in_size,
            Errc::ShapeMismatch,
            "expected input [N,6," + std::to_string(in_size) + "," + std::to_string(in_size) + "], got " +
                shape_string(input.shape));
    const std::size_t n = input.dim(0);
    require(n >= 1, Errc::ShapeMismatch, "batch must contain at least one item");
    if (cache) cache->batch = n;

    std::vector<T> x = input.data;
    for (int li = 0; li < kConvLayers; ++li) {
      const auto l = static_cast<std::size_t>(li);
      const auto& s = shapes_[l];
      const int k = s.out_channels, cs = s.conv_size, c_in = s.in_channels, h = s.in_size;
      const std::size_t plane = static_cast<std::size_t>(cs * cs), in_plane = static_cast<std::size_t>(c_in * h * h);
      std::vector<T> z(n * static_cast<std::size_t>(k) * plane);
      Eigen::Map<const detail::RowMat<T>> wm(group(conv_w_[li]).data(), k, c_in * kKernel * kKernel);
      detail::RowMat<T> cols;
      for (std::size_t i = 0; i < n; ++i) {
        detail::im2col(x.data() + i * in_plane, c_in, h, config_.strides[l], cs, cols);
        Eigen::Map<detail::RowMat<T>> zm(z.data() + i * static_cast<std::size_t>(k) * plane, k,
                                         static_cast<Eigen::Index>(plane));
        zm.noalias() = wm * cols;
        if (conv_b_[li] >= 0) {
          const auto& b = group(conv_b_[li]);
          for (int c = 0; c < k; ++c) zm.row(c).array() += b[static_cast<std::size_t>(c)];
        }
      }
      if (cache) cache->inputs[l] = std::move(x);

      if (ModelConfig::has_batchnorm(li)) {
        const auto& gamma = group(bn_gamma_[li]);
        const auto& beta = group(bn_beta_[li]);
        std::vector<T> xhat(training && cache ? z.size() : 0), inv_std(static_cast<std::size_t>(k));
        if (batch_mean) (*batch_mean)[l].assign(static_cast<std::size_t>(k), T(0));
        if (batch_var) (*batch_var)[l].assign(static_cast<std::size_t>(k), T(0));
        for (int c = 0; c < k; ++c) {
          const auto cc = static_cast<std::size_t>(c);
          T mu, var;
          if (training) {
            double sum = 0;
            for (std::size_t i = 0; i < n; ++i)
              for (std::size_t p = 0; p < plane; ++p) sum += static_cast<double>(z[(i * static_cast<std::size_t>(k) + cc) * plane + p]);
            const double m = static_cast<double>(n * plane);
            const double mean = sum / m;
            double sq = 0;
            for (std::size_t i = 0; i < n; ++i)
              for (std::size_t p = 0; p < plane; ++p) {
                const double d = static_cast<double>(z[(i * static_cast<std::size_t>(k) + cc) * plane + p]) - mean;
                sq += d * d;
              }
            mu = static_cast<T>(mean);
            var = static_cast<T>(sq / m);
            if (batch_mean) (*batch_mean)[l][cc] = mu;
            if (batch_var) (*batch_var)[l][cc] = var;
          } else {
            mu = running_mean_[l][cc];
            var = running_var_[l][cc];
          }
          const T is = T(1) / std::sqrt(var + static_cast<T>(config_.batchnorm_eps));
          inv_std[cc] = is;
          for (std::size_t i = 0; i < n; ++i) {
            const std::size_t base = (i * static_cast<std::size_t>(k) + cc) * plane;
            for (std::size_t p = 0; p < plane; ++p) {
              const T xh = (z[base + p] - mu) * is;
              if (!xhat.empty()) xhat[base + p] = xh;
              z[base + p] = gamma[cc] * xh + beta[cc];
            }
          }
        }
        if (cache) {
          cache->xhat[l] = std::move(xhat);
          cache->inv_std[l] = std::move(inv_std);
        }
      }

      if (ModelConfig::has_activation(li)) {
        if (cache) cache->pre_act[l] = z;
        const T slope = static_cast<T>(config_.leaky_slope);
        for (auto& v : z)
          if (!(v > T(0))) v *= slope;
      }

      if (cache) cache->pre_pool_size[l] = z.size();
      if (config_.pooled[l]) {
        const int os = s.out_size;
        std::vector<T> pooled(n * static_cast<std::size_t>(k * os * os));
        std::vector<std::uint32_t> arg(cache && config_.pooling == PoolKind::Max ? pooled.size() : 0);
        for (std::size_t i = 0; i < n; ++i)
          for (int c = 0; c < k; ++c) {
            const std::size_t base = (i * static_cast<std::size_t>(k) + static_cast<std::size_t>(c)) * plane;
            for (int oy = 0; oy < os; ++oy)
              for (int ox = 0; ox < os; ++ox) {
                const std::size_t o =
                    ((i * static_cast<std::size_t>(k) + static_cast<std::size_t>(c)) * static_cast<std::size_t>(os) +
                     static_cast<std::size_t>(oy)) * static_cast<std::size_t>(os) + static_cast<std::size_t>(ox);
                if (config_.pooling == PoolKind::Max) {
                  std::size_t best = base + static_cast<std::size_t>(2 * oy * cs + 2 * ox);
                  for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx) {
                      const std::size_t idx = base + static_cast<std::size_t>((2 * oy + dy) * cs + 2 * ox + dx);
                      if (z[idx] > z[best]) best = idx;
                    }
                  pooled[o] = z[best];
                  if (!arg.empty()) arg[o] = static_cast<std::uint32_t>(best);
                } else {
                  T sum = 0;
                  for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx) sum += z[base + static_cast<std::size_t>((2 * oy + dy) * cs + 2 * ox + dx)];
                  pooled[o] = sum / T(4);
                }
              }
          }
        if (cache) cache->pool_arg[l] = std::move(arg);
        z = std::move(pooled);
      }
      x = std::move(z);
    }

    const std::size_t f = config_.fc_inputs();
    const auto& w = group(fc_w_);
    const T b = group(fc_b_)[0];
    BasicTensor<T> out({n, 1});
    for (std::size_t i = 0; i < n; ++i) {
      T logit = b;
      for (std::size_t j = 0; j < f; ++j) logit += w[j] * x[i * f + j];
      out.data[i] = detail::open_unit(T(1) / (T(1) + std::exp(-logit)));
    }
    if (cache) {
      cache->flat = std::move(x);
      cache->prob = out.data;
    }
    return out;
  }

  ModelConfig config_;
  std::array<ModelConfig::LayerShape, kConvLayers> shapes_{};
  std::vector<ParamGroup<T>> params_;
  std::array<int, kConvLayers> conv_w_{-1, -1, -1, -1, -1};
  std::array<int, kConvLayers> conv_b_{-1, -1, -1, -1, -1};
  std::array<int, kConvLayers> bn_gamma_{-1, -1, -1, -1, -1};
  std::array<int, kConvLayers> bn_beta_{-1, -1, -1, -1, -1};
  int fc_w_ = -1, fc_b_ = -1;
  std::array<std::vector<T>, kConvLayers> running_mean_, running_var_;
};

using Model = BasicModel<float>;

/// Mean binary cross-entropy; predictions are clamped to [1e-7, 1-1e-7] before the logarithm.
template <typename T>
T bce_loss(const std::vector<T>& pred, const std::vector<int>& labels) {
  require(pred.size() == labels.size(), Errc::LengthMismatch, "prediction and label counts differ");
  require(!pred.empty(), Errc::LengthMismatch, "empty batch");
  double sum = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = std::clamp(static_cast<double>(pred[i]), 1e-7, 1.0 - 1e-7);
    sum += labels[i] ? std::log(p) : std::log(1.0 - p);
  }
  return static_cast<T>(-sum / static_cast<double>(pred.size()));
}

template <typename T>
T bce_loss(const BasicTensor<T>& pred, const std::vector<int>& labels) {
  return bce_loss(pred.data, labels);
}

template <typename T>
T BasicModel<T>::loss_and_gradients(const BasicTensor<T>& input, const std::vector<int>& labels, Gradients<T>& grads) const {
  ForwardCache<T> cache;
  const auto out = forward_pure(input, &cache);
  grads = backward(cache, labels);
  return bce_loss(out, labels);
}

}  // namespace dupscope::cnn
