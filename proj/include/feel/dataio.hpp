#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "feel/fl.hpp"
#include "feel/types.hpp"

namespace feel {

class IdxError : public std::runtime_error {
public:
  enum class Kind { Io, BadMagic, Truncated, CountMismatch };

  IdxError(Kind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

/// Reads an IDX image/label file pair (the MNIST container format):
/// big-endian uint32 magic (0x00000803 images, 0x00000801 labels), dimension
/// sizes, then raw bytes. Pixels are scaled to [0,1] by /255.
Dataset load_idx(const std::string &images_path, const std::string &labels_path);

/// Gaussian class clusters in [0,1]^d: one uniform center per class,
/// isotropic spread, samples clipped to the unit box. Labels come out
/// grouped by class; deterministic per seed.
Dataset synthetic_dataset(int num_classes, int samples_per_class,
                          int feature_dim, double cluster_spread,
                          std::uint64_t seed);

/// Assignment of dataset rows to devices via label-sorted shards.
struct Partition {
  std::vector<std::vector<int>> device_samples; ///< disjoint row indices
  std::vector<int> shard_to_device; ///< -1 for shards left unassigned
  int num_shards = 0;
  int shard_size = 0;
};

/// Sorts rows by label, slices them into fixed-size shards (a trailing
/// short shard is dropped), draws each device's shard demand uniformly from
/// [min_shards, max_shards], and deals shards in seeded random order.
/// Later devices' minimum demands are reserved, so every device ends with a
/// shard count inside the configured range; surplus shards stay unassigned.
Partition shard_partition(const Dataset &data, int shard_size, int min_shards,
                          int max_shards, int num_devices, std::uint64_t seed);

struct TrainTestSplit {
  std::vector<std::vector<int>> device_train; ///< per-device training rows
  std::vector<int> test_indices;              ///< pooled global test rows
};

/// Holds out a seeded `test_fraction` of every device's rows into one
/// global test pool. Throws if a device would lose all training data.
TrainTestSplit train_test_split(const Partition &partition,
                                double test_fraction, std::uint64_t seed);

/// Copies the given rows into a standalone dataset.
Dataset gather(const Dataset &data, std::span<const int> rows);

} // namespace feel
