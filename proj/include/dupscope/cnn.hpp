#pragma once

#include "dupscope/cnn/align.hpp"
#include "dupscope/cnn/checkpoint.hpp"
#include "dupscope/cnn/model.hpp"
#include "dupscope/cnn/tensor.hpp"
#include "dupscope/cnn/train.hpp"
#include "dupscope/verdict.hpp"

namespace dupscope::cnn {

/// Trains on every readable manifest pair, writing checkpoints as configured.
inline TrainResult train(Model& model, const std::vector<LabeledPair>& pairs, const TrainConfig& cfg) {
  cfg.validate();
  require(!pairs.empty(), Errc::EmptyDataset, "manifest contains no pairs");
  TrainResult result;
  const auto samples = prepare_samples(pairs, model.config().input_size, &result.skipped);
  require(!samples.empty(), Errc::EmptyDataset, "no readable pairs in manifest");
  EpochCallback cb;
  if (cfg.checkpoint_every > 0)
    cb = [&](const EpochStats& st, const Model& m, const History& h) {
      if (st.epoch % cfg.checkpoint_every == 0) save_checkpoint(cfg.checkpoint_path, m, h);
    };
  result.history = train(model, samples, cfg, cb);
  return result;
}

/// Probability that the aligned pair depicts the same image; similar when >= threshold.
inline SimilarityVerdict cnn_similarity(const Model& model, const RasterImage& a, const RasterImage& b,
                                        double threshold = default_threshold(MethodKind::Cnn)) {
  const Tensor x = align_pair(a, b, model.config().input_size);
  const Tensor batch = stack<float>({&x});
  return SimilarityVerdict::make(MethodKind::Cnn, static_cast<double>(model.predict(batch).data[0]), threshold);
}

/// Inference-mode scores for already aligned samples, in order.
inline std::vector<float> predict_samples(const Model& model, const std::vector<Sample>& samples, std::size_t batch = 32) {
  std::vector<float> out;
  out.reserve(samples.size());
  for (std::size_t start = 0; start < samples.size(); start += batch) {
    std::vector<const Tensor*> items;
    for (std::size_t i = start; i < std::min(samples.size(), start + batch); ++i) items.push_back(&samples[i].input);
    const auto p = model.predict(stack(items));
    out.insert(out.end(), p.data.begin(), p.data.end());
  }
  return out;
}

}  // namespace dupscope::cnn
