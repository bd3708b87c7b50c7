#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "feel/types.hpp"

namespace feel {

/// Two fully connected layers: input -> hidden (ReLU) -> classes (softmax).
/// Parameters live in one flat vector laid out as
///   [W1 (input x hidden, column-major), b1, W2 (hidden x classes), b2]
/// so aggregation and checkpointing stay shape-agnostic.
struct ModelDims {
  int input_dim = 0;
  int hidden_dim = 0;
  int num_classes = 0;

  Eigen::Index param_count() const {
    return static_cast<Eigen::Index>(input_dim) * hidden_dim + hidden_dim +
           static_cast<Eigen::Index>(hidden_dim) * num_classes + num_classes;
  }
  void validate() const;
  bool operator==(const ModelDims &) const = default;
};

struct GlobalModel {
  ModelDims dims;
  Vec params;
  int version = 0;
};

struct Dataset {
  Mat features; ///< samples x feature_dim, values in [0,1]
  std::vector<int> labels;
  int num_classes = 0;

  Eigen::Index size() const { return features.rows(); }
  void validate() const;
};

struct LocalUpdate {
  int device_id = 0;
  Vec params;
  std::int64_t dataset_size = 0;
  double train_loss = 0; ///< mean loss of the final epoch
};

/// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
/// Identical seeds give bit-identical models.
GlobalModel init_model(const ModelDims &dims, std::uint64_t seed);

/// Mean softmax cross-entropy over the batch and its gradient wrt the flat
/// parameter vector. Returns the loss; writes the gradient into `grad`.
double loss_and_gradient(const ModelDims &dims, const Vec &params,
                         const Mat &features, std::span<const int> labels,
                         Vec &grad);

double batch_loss(const ModelDims &dims, const Vec &params,
                  const Mat &features, std::span<const int> labels);

/// Mini-batch SGD for `epochs` passes, shuffling per epoch from the seeded
/// stream. Throws (with the epoch index) if the loss turns non-finite.
LocalUpdate local_train(const GlobalModel &model, const Dataset &data,
                        int epochs, double learning_rate, int batch_size,
                        std::uint64_t seed, int device_id = 0);

/// Dataset-size-weighted average of the updates; the result's version is
/// `version`. All updates must match `dims`.
GlobalModel fedavg_aggregate(const std::vector<LocalUpdate> &updates,
                             const ModelDims &dims, int version);

struct EvalResult {
  double accuracy = 0; ///< argmax ties resolve to the lowest class id
  double loss = 0;     ///< mean cross-entropy
};

EvalResult evaluate(const GlobalModel &model, const Dataset &test);

/// Versioned text checkpoint; numbers round-trip bit-exactly.
void save_model(const GlobalModel &model, const std::string &path);
GlobalModel load_model(const std::string &path);

} // namespace feel
