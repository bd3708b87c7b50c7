#pragma once

#include <string>
#include <vector>

#include "feel/scheduler.hpp"

namespace feel {

/// Standalone scheduling problem: a device population with fixed channel
/// gains plus solver weights, as consumed by the oracle subcommand and the
/// golden scheduler tests. Training times follow |D| * C / f (one epoch,
/// one bit per sample) so instances stay self-contained.
struct SchedInstance {
  std::vector<SchedDevice> devices;
  RadioParams params;
  SchedulerConfig config;
};

SchedInstance load_instance(const std::string &path);
void save_instance(const SchedInstance &instance, const std::string &path);

} // namespace feel
