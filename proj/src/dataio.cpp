#include "feel/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "feel/rng.hpp"

namespace feel {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(std::istream &in, const std::string &path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char *>(b), 4))
    throw IdxError(IdxError::Kind::Truncated, "idx: truncated header in " + path);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

} // namespace

Dataset load_idx(const std::string &images_path, const std::string &labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img)
    throw IdxError(IdxError::Kind::Io, "idx: cannot open " + images_path);
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab)
    throw IdxError(IdxError::Kind::Io, "idx: cannot open " + labels_path);

  const std::uint32_t img_magic = read_be32(img, images_path);
  if (img_magic != kImageMagic)
    throw IdxError(IdxError::Kind::BadMagic,
                   "idx: bad magic in " + images_path + " (expected 0x00000803)");
  const std::uint32_t num_images = read_be32(img, images_path);
  const std::uint32_t rows = read_be32(img, images_path);
  const std::uint32_t cols = read_be32(img, images_path);

  const std::uint32_t lab_magic = read_be32(lab, labels_path);
  if (lab_magic != kLabelMagic)
    throw IdxError(IdxError::Kind::BadMagic,
                   "idx: bad magic in " + labels_path + " (expected 0x00000801)");
  const std::uint32_t num_labels = read_be32(lab, labels_path);

  if (num_images != num_labels)
    throw IdxError(IdxError::Kind::CountMismatch,
                   "idx: " + std::to_string(num_images) + " images vs " +
                       std::to_string(num_labels) + " labels");

  const std::size_t dim = std::size_t(rows) * cols;
  std::vector<unsigned char> pixel_buf(dim);
  Dataset data;
  data.features.resize(num_images, static_cast<Eigen::Index>(dim));
  data.labels.resize(num_images);
  data.num_classes = 10;

  for (std::uint32_t i = 0; i < num_images; ++i) {
    if (!img.read(reinterpret_cast<char *>(pixel_buf.data()),
                  static_cast<std::streamsize>(dim)))
      throw IdxError(IdxError::Kind::Truncated,
                     "idx: truncated image data in " + images_path);
    for (std::size_t j = 0; j < dim; ++j)
      data.features(i, static_cast<Eigen::Index>(j)) = pixel_buf[j] / 255.0;
    unsigned char label;
    if (!lab.read(reinterpret_cast<char *>(&label), 1))
      throw IdxError(IdxError::Kind::Truncated,
                     "idx: truncated label data in " + labels_path);
    data.labels[i] = label;
  }
  data.validate();
  return data;
}

Dataset synthetic_dataset(int num_classes, int samples_per_class,
                          int feature_dim, double cluster_spread,
                          std::uint64_t seed) {
  if (num_classes <= 0 || samples_per_class <= 0 || feature_dim <= 0)
    throw std::invalid_argument("synthetic_dataset: counts must be positive");
  if (cluster_spread < 0)
    throw std::invalid_argument("synthetic_dataset: negative spread");

  Rng rng(seed);
  Dataset data;
  data.num_classes = num_classes;
  const Eigen::Index n = static_cast<Eigen::Index>(num_classes) * samples_per_class;
  data.features.resize(n, feature_dim);
  data.labels.resize(static_cast<std::size_t>(n));

  Eigen::Index row = 0;
  for (int c = 0; c < num_classes; ++c) {
    Vec center(feature_dim);
    for (int d = 0; d < feature_dim; ++d)
      center[d] = rng.uniform();
    for (int s = 0; s < samples_per_class; ++s, ++row) {
      for (int d = 0; d < feature_dim; ++d) {
        const double v = center[d] + cluster_spread * rng.normal();
        data.features(row, d) = std::clamp(v, 0.0, 1.0);
      }
      data.labels[static_cast<std::size_t>(row)] = c;
    }
  }
  return data;
}

Partition shard_partition(const Dataset &data, int shard_size, int min_shards,
                          int max_shards, int num_devices, std::uint64_t seed) {
  data.validate();
  if (shard_size <= 0)
    throw std::invalid_argument("shard_partition: shard size must be positive");
  if (min_shards < 1 || max_shards < min_shards)
    throw std::invalid_argument("shard_partition: invalid shards-per-device range");
  if (num_devices < 1)
    throw std::invalid_argument("shard_partition: need at least one device");
  if (data.size() < shard_size)
    throw std::invalid_argument("shard_partition: dataset smaller than one shard");

  // Label-sorted sample order; ties keep the original row order.
  std::vector<int> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return data.labels[static_cast<std::size_t>(a)] <
           data.labels[static_cast<std::size_t>(b)];
  });

  const int num_shards = static_cast<int>(data.size()) / shard_size;
  const std::int64_t needed =
      static_cast<std::int64_t>(num_devices) * min_shards;
  if (num_shards < needed)
    throw std::invalid_argument(
        "shard_partition: " + std::to_string(num_shards) + " shards cannot cover " +
        std::to_string(num_devices) + " devices x " + std::to_string(min_shards) +
        " minimum shards");

  Rng rng(seed);
  std::vector<int> demand(static_cast<std::size_t>(num_devices));
  for (int &d : demand)
    d = min_shards + static_cast<int>(rng.uniform_int(
                         static_cast<std::uint64_t>(max_shards - min_shards + 1)));

  std::vector<int> shard_order(static_cast<std::size_t>(num_shards));
  std::iota(shard_order.begin(), shard_order.end(), 0);
  rng.shuffle(shard_order);

  Partition part;
  part.num_shards = num_shards;
  part.shard_size = shard_size;
  part.shard_to_device.assign(static_cast<std::size_t>(num_shards), -1);
  part.device_samples.resize(static_cast<std::size_t>(num_devices));

  int cursor = 0;
  for (int dev = 0; dev < num_devices; ++dev) {
    // Reserve the minimum for every later device so nobody is starved.
    const int reserve = (num_devices - 1 - dev) * min_shards;
    const int give = std::min(demand[static_cast<std::size_t>(dev)],
                              num_shards - cursor - reserve);
    auto &samples = part.device_samples[static_cast<std::size_t>(dev)];
    samples.reserve(static_cast<std::size_t>(give) * shard_size);
    for (int j = 0; j < give; ++j, ++cursor) {
      const int shard = shard_order[static_cast<std::size_t>(cursor)];
      part.shard_to_device[static_cast<std::size_t>(shard)] = dev;
      const int begin = shard * shard_size;
      for (int i = 0; i < shard_size; ++i)
        samples.push_back(order[static_cast<std::size_t>(begin + i)]);
    }
    std::sort(samples.begin(), samples.end());
  }
  return part;
}

TrainTestSplit train_test_split(const Partition &partition,
                                double test_fraction, std::uint64_t seed) {
  if (test_fraction <= 0.0 || test_fraction >= 1.0)
    throw std::invalid_argument("train_test_split: fraction must lie in (0,1)");
  Rng rng(seed);
  TrainTestSplit split;
  split.device_train.resize(partition.device_samples.size());
  for (std::size_t dev = 0; dev < partition.device_samples.size(); ++dev) {
    std::vector<int> rows = partition.device_samples[dev];
    const std::size_t n = rows.size();
    const std::size_t holdout =
        static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    if (n > 0 && holdout >= n)
      throw std::invalid_argument("train_test_split: device " + std::to_string(dev) +
                                  " left with zero training samples");
    rng.shuffle(rows);
    split.test_indices.insert(split.test_indices.end(), rows.begin(),
                              rows.begin() + static_cast<std::ptrdiff_t>(holdout));
    auto &train = split.device_train[dev];
    train.assign(rows.begin() + static_cast<std::ptrdiff_t>(holdout), rows.end());
    std::sort(train.begin(), train.end());
  }
  std::sort(split.test_indices.begin(), split.test_indices.end());
  return split;
}

Dataset gather(const Dataset &data, std::span<const int> rows) {
  Dataset out;
  out.num_classes = data.num_classes;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), data.features.cols());
  out.labels.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = data.features.row(rows[i]);
    out.labels[i] = data.labels[static_cast<std::size_t>(rows[i])];
  }
  return out;
}

} // namespace feel
