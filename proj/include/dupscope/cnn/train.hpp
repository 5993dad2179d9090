#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dupscope/augment.hpp"
#include "dupscope/cnn/align.hpp"
#include "dupscope/cnn/model.hpp"
#include "dupscope/codec.hpp"
#include "dupscope/parallel.hpp"

namespace dupscope::cnn {

struct TrainConfig {
  int epochs = 35;
  int batch_size = 16;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t rng_seed = 0;
  // Stop once an epoch reaches this loss with every training item classified correctly.
  std::optional<double> target_loss;
  // Write a checkpoint every N epochs (0 disables); requires checkpoint_path.
  int checkpoint_every = 0;
  std::string checkpoint_path;

  void validate() const {
    require(epochs >= 1, Errc::InvalidConfig, "epochs must be >= 1");
    require(batch_size >= 1, Errc::InvalidConfig, "batch_size must be >= 1");
    require(learning_rate > 0, Errc::InvalidConfig, "learning_rate must be positive");
    require(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1, Errc::InvalidConfig, "Adam betas must lie in [0,1)");
    require(epsilon > 0, Errc::InvalidConfig, "epsilon must be positive");
    require(checkpoint_every >= 0, Errc::InvalidConfig, "checkpoint_every must be >= 0");
    require(checkpoint_every == 0 || !checkpoint_path.empty(), Errc::InvalidConfig,
            "checkpoint_every needs a checkpoint_path");
  }
};

struct EpochStats {
  int epoch = 0;
  double loss = 0;
  double accuracy = 0;  // training-mode predictions at threshold 0.5
};

using History = std::vector<EpochStats>;

/// One aligned pair tensor [6,s,s] with its label (1 = similar).
struct Sample {
  Tensor input;
  int label = 0;
};

struct TrainResult {
  History history;
  std::size_t skipped = 0;  // unreadable pairs
};

template <typename T>
class Adam {
 public:
  Adam(const std::vector<ParamGroup<T>>& params, double lr, double b1, double b2, double eps)
      : lr_(lr), b1_(b1), b2_(b2), eps_(eps) {
    for (const auto& p : params) {
      m_.emplace_back(p.value.size(), 0.0);
      v_.emplace_back(p.value.size(), 0.0);
    }
  }

  void step(std::vector<ParamGroup<T>>& params, const Gradients<T>& grads) {
    require(grads.size() == params.size(), Errc::ShapeMismatch, "gradient group count differs from parameters");
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    for (std::size_t g = 0; g < params.size(); ++g) {
      auto& p = params[g].value;
      require(grads[g].size() == p.size(), Errc::ShapeMismatch, "gradient size differs for " + params[g].name);
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double gi = static_cast<double>(grads[g][i]);
        m_[g][i] = b1_ * m_[g][i] + (1 - b1_) * gi;
        v_[g][i] = b2_ * v_[g][i] + (1 - b2_) * gi * gi;
        const double mh = m_[g][i] / c1, vh = v_[g][i] / c2;
        p[i] = static_cast<T>(static_cast<double>(p[i]) - lr_ * mh / (std::sqrt(vh) + eps_));
      }
    }
  }

  long long steps() const noexcept { return t_; }

 private:
  double lr_, b1_, b2_, eps_;
  long long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

using EpochCallback = std::function<void(const EpochStats&, const Model&, const History&)>;

/// Adam over seeded-shuffled mini-batches of pre-aligned samples.
inline History train(Model& model, const std::vector<Sample>& samples, const TrainConfig& cfg,
                     const EpochCallback& on_epoch = {}) {
  cfg.validate();
  require(!samples.empty(), Errc::EmptyDataset, "training set is empty");
  const std::size_t s = model.config().input_size;
  for (const auto& smp : samples)
    require(smp.input.shape == std::vector<std::size_t>{static_cast<std::size_t>(kPairChannels), s, s}, Errc::ShapeMismatch,
            "sample shape " + shape_string(smp.input.shape) + " does not match the model input");

  Adam<float> opt(model.params(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon);
  std::mt19937_64 rng(cfg.rng_seed);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  History history;
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      std::vector<const Tensor*> items;
      std::vector<int> labels;
      for (std::size_t i = start; i < end; ++i) {
        items.push_back(&samples[order[i]].input);
        labels.push_back(samples[order[i]].label);
      }
      ForwardCache<float> cache;
      const Tensor out = model.forward(stack(items), true, &cache);
      loss_sum += static_cast<double>(bce_loss(out, labels)) * static_cast<double>(labels.size());
      for (std::size_t i = 0; i < labels.size(); ++i) correct += ((out.data[i] >= 0.5f) == (labels[i] == 1));
      opt.step(model.params(), model.backward(cache, labels));
    }
    EpochStats st{epoch, loss_sum / static_cast<double>(samples.size()),
                  static_cast<double>(correct) / static_cast<double>(samples.size())};
    history.push_back(st);
    if (on_epoch) on_epoch(st, model, history);
    if (cfg.target_loss && st.loss < *cfg.target_loss && correct == samples.size()) break;
  }
  return history;
}

/// Aligns every readable manifest pair; unreadable pairs are skipped and counted.
inline std::vector<Sample> prepare_samples(const std::vector<LabeledPair>& pairs, std::uint32_t size,
                                           std::size_t* skipped = nullptr) {
  std::vector<std::optional<Sample>> slots(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    try {
      const auto a = load_image(pairs[i].image_a);
      const auto b = load_image(pairs[i].image_b);
      slots[i] = Sample{align_pair(a, b, size), pairs[i].label == PairLabel::Similar ? 1 : 0};
    } catch (const Error& e) {
      std::cerr << "warning: skipping pair " << pairs[i].image_a << " / " << pairs[i].image_b << ": " << e.what() << '\n';
    }
  });
  std::vector<Sample> out;
  std::size_t bad = 0;
  for (auto& s : slots) {
    if (s)
      out.push_back(std::move(*s));
    else
      ++bad;
  }
  if (skipped) *skipped = bad;
  return out;
}

}  // namespace dupscope::cnn
