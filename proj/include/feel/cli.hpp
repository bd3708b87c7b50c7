#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "feel/simulator.hpp"

namespace feel {

/// One rounds.csv row; columns are fixed in this order.
struct OutputRecord {
  std::string experiment_id;
  std::string scheduler;
  int round = 0;
  double accuracy = 0;
  double round_duration_s = 0;
  double round_energy_j = 0;
  int num_selected = 0;
  double cumulative_energy_j = 0;
  double cumulative_time_s = 0;

  bool operator==(const OutputRecord &) const = default;
};

std::vector<OutputRecord> to_records(const SimConfig &cfg,
                                     const ExperimentResult &result);

/// Numbers are written with round-trip precision, so read-after-write
/// reproduces the records exactly.
void write_rounds_csv(const std::string &path,
                      const std::vector<OutputRecord> &records);
std::vector<OutputRecord> read_rounds_csv(const std::string &path);

void write_mean_curves_csv(const std::string &path,
                           const std::vector<SweepRoundStat> &curve);

// Exit codes: 0 success, 1 check/runtime failure, 2 usage or config error.
int cmd_run(const std::string &config_path, const std::string &out_dir,
            std::optional<std::uint64_t> seed_override);
int cmd_sweep(const std::string &config_path, const std::string &out_dir,
              int runs, int jobs, std::optional<std::uint64_t> seed_override);
int cmd_oracle(const std::string &instance_path, double gap_threshold);
int cmd_partition(const std::string &config_path, const std::string &csv_path,
                  std::optional<std::uint64_t> seed_override);

int cli_main(int argc, const char *const *argv);

} // namespace feel
