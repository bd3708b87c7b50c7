#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "feel/dataio.hpp"
#include "feel/diversity.hpp"
#include "feel/fl.hpp"
#include "feel/radio.hpp"
#include "feel/rng.hpp"
#include "feel/scheduler.hpp"
#include "feel/types.hpp"

namespace feel {

enum class SchedulerKind { Das, Abs, Random, All };

std::string to_string(SchedulerKind kind);
std::optional<SchedulerKind> scheduler_from_string(const std::string &name);

struct FlConfig {
  int hidden_dim = 64;
  double learning_rate = 0.01;
  int batch_size = 32;
  int epochs = 1;
};

struct DataConfig {
  enum class Source { Synthetic, Idx };
  Source source = Source::Synthetic;
  int num_classes = 10;
  int samples_per_class = 600;
  int feature_dim = 16;
  double cluster_spread = 0.15;
  std::string idx_images;
  std::string idx_labels;
  int shard_size = 50;
  int min_shards = 1;
  int max_shards = 30;
  double test_fraction = 0.1;
};

/// Ranges the per-device capability draws come from.
struct DeviceRanges {
  double cpu_hz_min = 1e9, cpu_hz_max = 3e9;
  double cycles_per_bit_min = 10, cycles_per_bit_max = 30;
  double power_min_w = 1, power_max_w = 5;
};

struct SimConfig {
  std::string id = "exp";
  int num_devices = 100; ///< K; the minimum N lives in sched.min_devices
  int rounds_max = 15;
  double target_accuracy = 1.0;
  SchedulerKind scheduler = SchedulerKind::Das;
  SchedulerConfig sched;
  RadioParams radio;
  FlConfig fl;
  DataConfig data;
  DeviceRanges ranges;
  MetricWeights weights;
  DiversityMeasure measure = DiversityMeasure::GiniSimpson;
  double bits_per_sample = 6272; ///< beta in the training-time model
  double selected_fraction_cap = 0.25; ///< observability threshold only
  std::uint64_t seed = 0;

  void validate() const;
};

struct RoundMetrics {
  int round = 0; ///< 1-based
  std::vector<int> selected_ids;
  std::vector<double> alpha;    ///< K-wide, zero for unselected
  std::vector<double> energy_j; ///< K-wide, zero for unselected
  double duration_s = 0;
  double accuracy = 0;
  double loss = 0;
  double round_energy_j = 0;
  double cumulative_energy_j = 0;
  double cumulative_time_s = 0;
};

struct ExperimentResult {
  std::vector<RoundMetrics> rounds;
  std::optional<int> rounds_to_target;
  double total_energy_j = 0;
  double completion_time_s = 0;
  std::vector<int> selection_counts; ///< per device
  double mean_selected_fraction = 0;
  double final_accuracy = 0;
};

/// K positions i.i.d. uniform over the square, distances measured to the
/// base station at the center. Positions closer than 1 m to the center are
/// re-drawn (pathloss singularity guard).
std::vector<std::array<double, 2>> place_devices(int num_devices,
                                                 double cell_side_m, Rng &rng);

/// One seeded experiment: synchronous rounds of report -> schedule ->
/// train -> aggregate -> evaluate, with ages reset for selected devices and
/// incremented for the rest at the end of every round.
class Experiment {
public:
  explicit Experiment(const SimConfig &cfg);

  RoundMetrics run_round(int round); ///< rounds count from 1
  ExperimentResult run();

  const std::vector<int> &ages() const { return ages_; }
  const Dataset &test_set() const { return test_; }
  const GlobalModel &model() const { return model_; }
  const std::vector<DeviceRadioState> &device_states() const { return devices_; }
  const Dataset &device_data(int k) const {
    return device_data_[static_cast<std::size_t>(k)];
  }

private:
  ScheduleDecision schedule(const std::vector<SchedDevice> &devs, int round);

  SimConfig cfg_;
  Dataset test_;
  std::vector<Dataset> device_data_;
  std::vector<DeviceRadioState> devices_;
  std::vector<int> ages_;
  std::vector<int> selection_counts_;
  GlobalModel model_;
  double cum_energy_ = 0;
  double cum_time_ = 0;
  double fraction_sum_ = 0;
  int rounds_run_ = 0;
};

ExperimentResult run_experiment(const SimConfig &cfg);

struct SweepRunOutcome {
  int run_index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  ExperimentResult result;
};

struct SweepRoundStat {
  int round = 0;
  double mean_accuracy = 0;
  double std_accuracy = 0;
  double mean_energy = 0;
  double std_energy = 0;
  double mean_duration = 0;
  double std_duration = 0;
  int num_runs = 0; ///< runs that reached this round
};

struct SweepResult {
  std::vector<SweepRunOutcome> runs;
  std::vector<SweepRoundStat> curve;
  int num_failures = 0;
};

/// Independent runs with seeds base_seed .. base_seed + num_runs - 1,
/// optionally spread over `jobs` worker threads. Failed runs are recorded
/// and excluded from the averaged curves.
SweepResult run_sweep(const SimConfig &cfg, int num_runs,
                      std::uint64_t base_seed, int jobs = 1);

} // namespace feel
