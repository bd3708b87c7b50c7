#include "feel/diversity.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace feel {

namespace {
constexpr double kSumTolerance = 1e-9;
}

void LabelDistribution::validate() const {
  if (is_empty) {
    if (total != 0)
      throw std::invalid_argument("label distribution flagged empty but has samples");
    return;
  }
  if (num_classes <= 0)
    throw std::invalid_argument("label distribution needs a positive class count");
  if (probabilities.size() != num_classes)
    throw std::invalid_argument("label distribution length does not match num_classes");
  if ((probabilities < 0.0).any())
    throw std::invalid_argument("label distribution has a negative entry");
  const double sum = probabilities.sum();
  if (std::abs(sum - 1.0) > kSumTolerance)
    throw std::invalid_argument("label distribution sums to " + std::to_string(sum) +
                                ", expected 1");
}

LabelDistribution make_distribution(const Arr &probabilities) {
  LabelDistribution dist;
  dist.probabilities = probabilities;
  dist.num_classes = static_cast<int>(probabilities.size());
  dist.is_empty = probabilities.size() == 0;
  dist.validate();
  return dist;
}

LabelDistribution label_distribution(std::span<const int> labels,
                                     int num_classes) {
  if (num_classes <= 0)
    throw std::invalid_argument("label_distribution: num_classes must be positive");
  LabelDistribution dist;
  dist.num_classes = num_classes;
  dist.counts.assign(static_cast<std::size_t>(num_classes), 0);
  for (int label : labels) {
    if (label < 0 || label >= num_classes)
      throw std::invalid_argument("label_distribution: label " + std::to_string(label) +
                                  " outside [0, " + std::to_string(num_classes) + ")");
    ++dist.counts[static_cast<std::size_t>(label)];
    ++dist.total;
  }
  dist.probabilities = Arr::Zero(num_classes);
  if (dist.total == 0) {
    dist.is_empty = true;
    return dist;
  }
  for (int j = 0; j < num_classes; ++j)
    dist.probabilities[j] = static_cast<double>(dist.counts[static_cast<std::size_t>(j)]) /
                            static_cast<double>(dist.total);
  return dist;
}

double gini_simpson(const LabelDistribution &dist) {
  if (dist.is_empty)
    throw std::invalid_argument("gini_simpson: empty distribution, no data to score");
  dist.validate();
  if (!dist.counts.empty() && dist.total > 0) {
    // 1 - sum (c_j/n)^2 == 1 - (sum c_j^2)/n^2, one correctly rounded
    // division instead of a sum of squared quotients.
    double sum_sq = 0.0;
    for (std::int64_t c : dist.counts)
      sum_sq += static_cast<double>(c) * static_cast<double>(c);
    const double n = static_cast<double>(dist.total);
    return 1.0 - sum_sq / (n * n);
  }
  return 1.0 - dist.probabilities.square().sum();
}

double shannon_entropy(const LabelDistribution &dist) {
  if (dist.is_empty)
    throw std::invalid_argument("shannon_entropy: empty distribution, no data to score");
  dist.validate();
  if (dist.num_classes == 1)
    return 0.0;
  double h = 0.0;
  for (Eigen::Index j = 0; j < dist.probabilities.size(); ++j) {
    const double p = dist.probabilities[j];
    if (p > 0.0)
      h -= p * std::log(p);
  }
  return h / std::log(static_cast<double>(dist.num_classes));
}

double dataset_diversity(const LabelDistribution &dist, DiversityMeasure m) {
  return m == DiversityMeasure::GiniSimpson ? gini_simpson(dist)
                                            : shannon_entropy(dist);
}

Arr normalize_metric(const Arr &values) {
  if ((values < 0.0).any())
    throw std::invalid_argument("normalize_metric: negative measurement");
  if (values.size() == 0)
    return values;
  const double max = values.maxCoeff();
  if (max <= 0.0)
    return Arr::Zero(values.size());
  return values / max;
}

void MetricWeights::validate() const {
  if (gamma_diversity < 0 || gamma_size < 0 || gamma_age < 0)
    throw std::invalid_argument("metric weights must be non-negative");
}

std::vector<DiversityReport>
diversity_index(const std::vector<DeviceMetrics> &reports,
                const MetricWeights &weights) {
  weights.validate();
  if (reports.empty())
    throw std::invalid_argument("diversity_index: at least one device report required");
  const Eigen::Index n = static_cast<Eigen::Index>(reports.size());
  Arr div(n), size(n), age(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const DeviceMetrics &m = reports[static_cast<std::size_t>(i)];
    if (m.dataset_diversity < 0.0 || m.dataset_diversity > 1.0)
      throw std::invalid_argument("diversity_index: dataset_diversity outside [0,1]");
    if (m.dataset_size < 0)
      throw std::invalid_argument("diversity_index: negative dataset size");
    if (m.age < 0)
      throw std::invalid_argument("diversity_index: negative age");
    div[i] = m.dataset_diversity;
    size[i] = static_cast<double>(m.dataset_size);
    age[i] = static_cast<double>(m.age);
  }
  const Arr v_div = normalize_metric(div);
  const Arr v_size = normalize_metric(size);
  const Arr v_age = normalize_metric(age);

  std::vector<DiversityReport> out(reports.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    DiversityReport &r = out[static_cast<std::size_t>(i)];
    r.device_id = static_cast<int>(i);
    r.metrics = reports[static_cast<std::size_t>(i)];
    r.v_diversity = v_div[i];
    r.v_size = v_size[i];
    r.v_age = v_age[i];
    r.index = r.v_diversity * weights.gamma_diversity +
              r.v_size * weights.gamma_size + r.v_age * weights.gamma_age;
  }
  return out;
}

} // namespace feel
