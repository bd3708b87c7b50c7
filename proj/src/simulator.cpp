#include "feel/simulator.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace feel {

std::string to_string(SchedulerKind kind) {
  switch (kind) {
  case SchedulerKind::Das:
    return "das";
  case SchedulerKind::Abs:
    return "abs";
  case SchedulerKind::Random:
    return "random";
  case SchedulerKind::All:
    return "all";
  }
  return "?";
}

std::optional<SchedulerKind> scheduler_from_string(const std::string &name) {
  if (name == "das")
    return SchedulerKind::Das;
  if (name == "abs")
    return SchedulerKind::Abs;
  if (name == "random")
    return SchedulerKind::Random;
  if (name == "all")
    return SchedulerKind::All;
  return std::nullopt;
}

void SimConfig::validate() const {
  sched.validate();
  radio.validate();
  weights.validate();
  if (num_devices < 1)
    throw std::invalid_argument("sim: need at least one device");
  if (num_devices < sched.min_devices)
    throw std::invalid_argument("sim: fewer devices than the scheduling minimum");
  if (rounds_max < 1)
    throw std::invalid_argument("sim: rounds_max must be >= 1");
  if (target_accuracy < 0 || target_accuracy > 1)
    throw std::invalid_argument("sim: target accuracy outside [0,1]");
  if (fl.hidden_dim < 1 || fl.batch_size < 1 || fl.epochs < 1)
    throw std::invalid_argument("sim: fl settings must be positive");
  if (bits_per_sample < 1)
    throw std::invalid_argument("sim: bits_per_sample must be >= 1");
  if (ranges.cpu_hz_min <= 0 || ranges.cpu_hz_max < ranges.cpu_hz_min ||
      ranges.cycles_per_bit_min <= 0 ||
      ranges.cycles_per_bit_max < ranges.cycles_per_bit_min ||
      ranges.power_min_w <= 0 || ranges.power_max_w < ranges.power_min_w)
    throw std::invalid_argument("sim: invalid device capability ranges");
}

std::vector<std::array<double, 2>> place_devices(int num_devices,
                                                 double cell_side_m, Rng &rng) {
  if (num_devices < 1)
    throw std::invalid_argument("place_devices: need at least one device");
  if (cell_side_m <= 0)
    throw std::invalid_argument("place_devices: cell side must be positive");
  const double cx = cell_side_m / 2, cy = cell_side_m / 2;
  std::vector<std::array<double, 2>> out;
  out.reserve(static_cast<std::size_t>(num_devices));
  while (static_cast<int>(out.size()) < num_devices) {
    const double x = rng.uniform(0, cell_side_m);
    const double y = rng.uniform(0, cell_side_m);
    if (std::hypot(x - cx, y - cy) < 1.0)
      continue; // too close to the base station, draw again
    out.push_back({x, y});
  }
  return out;
}

Experiment::Experiment(const SimConfig &cfg) : cfg_(cfg) {
  cfg_.validate();
  const int K = cfg_.num_devices;

  Dataset data;
  if (cfg_.data.source == DataConfig::Source::Synthetic) {
    data = synthetic_dataset(cfg_.data.num_classes, cfg_.data.samples_per_class,
                             cfg_.data.feature_dim, cfg_.data.cluster_spread,
                             mix_seed(cfg_.seed, stream::kData));
  } else {
    data = load_idx(cfg_.data.idx_images, cfg_.data.idx_labels);
  }
  const Partition partition =
      shard_partition(data, cfg_.data.shard_size, cfg_.data.min_shards,
                      cfg_.data.max_shards, K, mix_seed(cfg_.seed, stream::kPartition));
  const TrainTestSplit split = train_test_split(
      partition, cfg_.data.test_fraction, mix_seed(cfg_.seed, stream::kSplit));
  test_ = gather(data, split.test_indices);
  if (test_.size() == 0)
    throw std::invalid_argument("sim: empty global test set");
  device_data_.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k)
    device_data_.push_back(gather(data, split.device_train[static_cast<std::size_t>(k)]));

  Rng placement_rng(mix_seed(cfg_.seed, stream::kPlacement));
  const auto positions = place_devices(K, cfg_.radio.cell_side_m, placement_rng);
  Rng caps(mix_seed(cfg_.seed, stream::kCapabilities));
  devices_.resize(static_cast<std::size_t>(K));
  const double cx = cfg_.radio.cell_side_m / 2;
  for (int k = 0; k < K; ++k) {
    DeviceRadioState &d = devices_[static_cast<std::size_t>(k)];
    d.x = positions[static_cast<std::size_t>(k)][0];
    d.y = positions[static_cast<std::size_t>(k)][1];
    d.distance_m = std::hypot(d.x - cx, d.y - cx);
    d.transmit_power_w = caps.uniform(cfg_.ranges.power_min_w, cfg_.ranges.power_max_w);
    d.cpu_hz = caps.uniform(cfg_.ranges.cpu_hz_min, cfg_.ranges.cpu_hz_max);
    d.cycles_per_bit =
        caps.uniform(cfg_.ranges.cycles_per_bit_min, cfg_.ranges.cycles_per_bit_max);
    d.bits_per_sample = cfg_.bits_per_sample;
  }

  const ModelDims dims{static_cast<int>(data.features.cols()), cfg_.fl.hidden_dim,
                       data.num_classes};
  model_ = init_model(dims, mix_seed(cfg_.seed, stream::kModelInit));
  ages_.assign(static_cast<std::size_t>(K), 0);
  selection_counts_.assign(static_cast<std::size_t>(K), 0);
}

ScheduleDecision Experiment::schedule(const std::vector<SchedDevice> &devs,
                                      int round) {
  switch (cfg_.scheduler) {
  case SchedulerKind::Das:
    return schedule_das(devs, cfg_.radio, cfg_.sched);
  case SchedulerKind::All:
    return schedule_all(devs, cfg_.radio, cfg_.sched);
  case SchedulerKind::Abs:
  case SchedulerKind::Random: {
    std::vector<int> feasible;
    for (std::size_t k = 0; k < devs.size(); ++k)
      if (devs[k].schedulable())
        feasible.push_back(static_cast<int>(k));
    const int m = cfg_.sched.max_devices > 0 ? cfg_.sched.max_devices
                                             : cfg_.sched.min_devices;
    Rng rng(mix_seed(cfg_.seed, stream::kScheduler, static_cast<std::uint64_t>(round)));
    std::vector<int> picked;
    if (cfg_.scheduler == SchedulerKind::Abs) {
      std::vector<int> ages;
      ages.reserve(feasible.size());
      for (int p : feasible)
        ages.push_back(ages_[static_cast<std::size_t>(p)]);
      picked = schedule_abs(ages, m, rng);
    } else {
      picked = schedule_random(static_cast<int>(feasible.size()), m, rng);
    }
    std::vector<int> positions;
    positions.reserve(picked.size());
    for (int p : picked)
      positions.push_back(feasible[static_cast<std::size_t>(p)]);
    return make_decision(devs, cfg_.radio, cfg_.sched, positions);
  }
  }
  throw std::logic_error("unknown scheduler kind");
}

RoundMetrics Experiment::run_round(int round) {
  const int K = cfg_.num_devices;

  // Block fading: fresh channel realizations every round.
  Rng fading(mix_seed(cfg_.seed, stream::kFading, static_cast<std::uint64_t>(round)));
  for (DeviceRadioState &d : devices_)
    d.channel_gain_sq =
        channel_gain(d.distance_m, cfg_.radio.pathloss_exponent, fading.exponential());

  // Device reports: dataset diversity, size, age-of-update.
  std::vector<DeviceMetrics> metrics(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    const Dataset &local = device_data_[static_cast<std::size_t>(k)];
    const LabelDistribution dist =
        label_distribution(local.labels, local.num_classes);
    DeviceMetrics &m = metrics[static_cast<std::size_t>(k)];
    m.dataset_diversity = dataset_diversity(dist, cfg_.measure);
    m.dataset_size = local.size();
    m.age = ages_[static_cast<std::size_t>(k)];
  }
  const std::vector<DiversityReport> reports = diversity_index(metrics, cfg_.weights);

  std::vector<SchedDevice> devs(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    const DeviceRadioState &st = devices_[static_cast<std::size_t>(k)];
    SchedDevice &d = devs[static_cast<std::size_t>(k)];
    d.id = k;
    d.gain_sq = st.channel_gain_sq;
    d.power_w = st.transmit_power_w;
    d.cpu_hz = st.cpu_hz;
    d.cycles_per_bit = st.cycles_per_bit;
    d.dataset_size = device_data_[static_cast<std::size_t>(k)].size();
    d.train_time_s = training_time(cfg_.fl.epochs,
                                   static_cast<double>(d.dataset_size), st);
    d.index = reports[static_cast<std::size_t>(k)].index;
  }

  const ScheduleDecision decision = schedule(devs, round);

  RoundMetrics rm;
  rm.round = round;
  rm.alpha = decision.alpha;
  rm.energy_j = decision.energy_j;
  rm.duration_s = decision.predicted_duration_s;
  for (int k = 0; k < K; ++k)
    if (decision.selection[static_cast<std::size_t>(k)])
      rm.selected_ids.push_back(k);

  std::vector<LocalUpdate> updates;
  updates.reserve(rm.selected_ids.size());
  for (int k : rm.selected_ids)
    updates.push_back(local_train(
        model_, device_data_[static_cast<std::size_t>(k)], cfg_.fl.epochs,
        cfg_.fl.learning_rate, cfg_.fl.batch_size,
        mix_seed(cfg_.seed, stream::kTraining, static_cast<std::uint64_t>(round),
                 static_cast<std::uint64_t>(k)),
        k));
  model_ = fedavg_aggregate(updates, model_.dims, round);
  const EvalResult eval = evaluate(model_, test_);
  rm.accuracy = eval.accuracy;
  rm.loss = eval.loss;

  for (int k = 0; k < K; ++k) {
    if (decision.selection[static_cast<std::size_t>(k)]) {
      ages_[static_cast<std::size_t>(k)] = 0;
      ++selection_counts_[static_cast<std::size_t>(k)];
    } else {
      ++ages_[static_cast<std::size_t>(k)];
    }
  }

  for (double e : rm.energy_j)
    rm.round_energy_j += e;
  cum_energy_ += rm.round_energy_j;
  cum_time_ += rm.duration_s;
  rm.cumulative_energy_j = cum_energy_;
  rm.cumulative_time_s = cum_time_;
  fraction_sum_ += static_cast<double>(rm.selected_ids.size()) / K;
  ++rounds_run_;
  return rm;
}

ExperimentResult Experiment::run() {
  ExperimentResult res;
  for (int round = 1; round <= cfg_.rounds_max; ++round) {
    RoundMetrics rm;
    try {
      rm = run_round(round);
    } catch (const InfeasibleError &e) {
      throw std::runtime_error("round " + std::to_string(round) +
                               " aborted: " + e.what());
    }
    res.rounds.push_back(std::move(rm));
    if (res.rounds.back().accuracy >= cfg_.target_accuracy) {
      res.rounds_to_target = round;
      break;
    }
  }
  res.total_energy_j = cum_energy_;
  res.completion_time_s = cum_time_;
  res.selection_counts = selection_counts_;
  res.mean_selected_fraction =
      rounds_run_ > 0 ? fraction_sum_ / rounds_run_ : 0.0;
  res.final_accuracy = res.rounds.empty() ? 0.0 : res.rounds.back().accuracy;
  return res;
}

ExperimentResult run_experiment(const SimConfig &cfg) {
  Experiment exp(cfg);
  return exp.run();
}

SweepResult run_sweep(const SimConfig &cfg, int num_runs,
                      std::uint64_t base_seed, int jobs) {
  if (num_runs < 1)
    throw std::invalid_argument("run_sweep: num_runs must be >= 1");
  jobs = std::max(1, std::min(jobs, num_runs));

  SweepResult sweep;
  sweep.runs.resize(static_cast<std::size_t>(num_runs));
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= num_runs)
        return;
      SweepRunOutcome &out = sweep.runs[static_cast<std::size_t>(i)];
      out.run_index = i;
      out.seed = base_seed + static_cast<std::uint64_t>(i);
      SimConfig run_cfg = cfg;
      run_cfg.seed = out.seed;
      try {
        out.result = run_experiment(run_cfg);
        out.ok = true;
      } catch (const std::exception &e) {
        out.ok = false;
        out.error = e.what();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back(worker);
    for (std::thread &t : pool)
      t.join();
  }

  int max_rounds = 0;
  for (const SweepRunOutcome &run : sweep.runs) {
    if (!run.ok) {
      ++sweep.num_failures;
      continue;
    }
    max_rounds = std::max(max_rounds, static_cast<int>(run.result.rounds.size()));
  }
  for (int r = 1; r <= max_rounds; ++r) {
    SweepRoundStat stat;
    stat.round = r;
    std::vector<double> accs, energies, durations;
    for (const SweepRunOutcome &run : sweep.runs) {
      if (!run.ok || static_cast<int>(run.result.rounds.size()) < r)
        continue;
      const RoundMetrics &rm = run.result.rounds[static_cast<std::size_t>(r - 1)];
      accs.push_back(rm.accuracy);
      energies.push_back(rm.round_energy_j);
      durations.push_back(rm.duration_s);
      ++stat.num_runs;
    }
    if (stat.num_runs == 0)
      continue;
    const auto mean_of = [&](const std::vector<double> &v) {
      double sum = 0;
      for (double x : v)
        sum += x;
      return sum / static_cast<double>(v.size());
    };
    const auto std_of = [&](const std::vector<double> &v, double mean) {
      if (v.size() < 2)
        return 0.0;
      double ss = 0;
      for (double x : v)
        ss += (x - mean) * (x - mean);
      return std::sqrt(ss / static_cast<double>(v.size() - 1));
    };
    stat.mean_accuracy = mean_of(accs);
    stat.std_accuracy = std_of(accs, stat.mean_accuracy);
    stat.mean_energy = mean_of(energies);
    stat.std_energy = std_of(energies, stat.mean_energy);
    stat.mean_duration = mean_of(durations);
    stat.std_duration = std_of(durations, stat.mean_duration);
    sweep.curve.push_back(stat);
  }
  return sweep;
}

} // namespace feel
