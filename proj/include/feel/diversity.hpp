#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "feel/types.hpp"

namespace feel {

/// Empirical per-class label proportions of one device's dataset.
/// When built from labels the integer counts are kept alongside the
/// proportions so index computations can stay exact.
struct LabelDistribution {
  Arr probabilities;                ///< length num_classes, sums to 1
  std::vector<std::int64_t> counts; ///< empty when constructed from raw probs
  std::int64_t total = 0;
  int num_classes = 0;
  bool is_empty = false;

  void validate() const; ///< throws std::invalid_argument on violation
};

/// Builds a LabelDistribution from raw probabilities (no counts attached).
LabelDistribution make_distribution(const Arr &probabilities);

/// Empirical frequencies of `labels` over `num_classes` classes.
/// An empty label list yields a distribution flagged as empty.
LabelDistribution label_distribution(std::span<const int> labels,
                                     int num_classes);

/// Gini-Simpson index 1 - sum p_j^2: the probability that two samples
/// drawn with replacement carry different labels. 0 for a single class,
/// 1 - 1/m for the uniform distribution over m classes.
/// Computed from integer counts when available so those anchor cases are
/// exact in floating point.
double gini_simpson(const LabelDistribution &dist);

/// Shannon entropy normalized to [0,1] by log(num_classes); 0*log(0) := 0.
/// Returns 0 for a single-class universe (log 1 guarded).
double shannon_entropy(const LabelDistribution &dist);

enum class DiversityMeasure { GiniSimpson, Entropy };

double dataset_diversity(const LabelDistribution &dist, DiversityMeasure m);

/// Divides every value by the population maximum: v_i = value_i / max.
/// All-zero populations map to all zeros (0/0 := 0). Negative input throws.
Arr normalize_metric(const Arr &values);

/// Server-side weights for the three reported metrics. The server may tune
/// them; equal thirds is the stock configuration.
struct MetricWeights {
  double gamma_diversity = 1.0 / 3.0;
  double gamma_size = 1.0 / 3.0;
  double gamma_age = 1.0 / 3.0;

  double sum() const { return gamma_diversity + gamma_size + gamma_age; }
  void validate() const;
};

/// One device's raw metric report for a round.
struct DeviceMetrics {
  double dataset_diversity = 0; ///< in [0,1]
  std::int64_t dataset_size = 0;
  int age = 0; ///< rounds since the device last uploaded an update
};

/// Per-device result of the index computation.
struct DiversityReport {
  int device_id = 0;
  DeviceMetrics metrics;
  double v_diversity = 0, v_size = 0, v_age = 0; ///< max-normalized values
  double index = 0; ///< sum of gamma_i * v_i, in [0, sum gamma]
};

/// Normalizes each metric across the reporting population, then scores
/// each device with index = gamma_div*v_div + gamma_size*v_size +
/// gamma_age*v_age. Requires at least one report.
std::vector<DiversityReport>
diversity_index(const std::vector<DeviceMetrics> &reports,
                const MetricWeights &weights);

} // namespace feel
