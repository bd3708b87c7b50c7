#pragma once

// Independent reference computations used only by tests: brute grid search
// for the bandwidth program and random instance generation. These avoid the
// production solver's search logic on purpose.

#include <limits>
#include <vector>

#include "feel/radio.hpp"
#include "feel/rng.hpp"
#include "feel/scheduler.hpp"

namespace feel::testing {

/// Uplink-heavy random instance in the style of the simulator's device
/// draws (uniform placement distances, Rayleigh fading, uniform power and
/// compute capabilities). cpu_hz is drawn low so training time is on the
/// same footing as upload time.
inline std::vector<SchedDevice> random_sched_instance(int num_devices, Rng &rng,
                                                      const RadioParams &params) {
  std::vector<SchedDevice> devs(static_cast<std::size_t>(num_devices));
  for (int k = 0; k < num_devices; ++k) {
    SchedDevice &d = devs[static_cast<std::size_t>(k)];
    d.id = k;
    const double distance = rng.uniform(5.0, 350.0);
    d.gain_sq = channel_gain(distance, params.pathloss_exponent, rng.exponential());
    d.power_w = rng.uniform(1.0, 5.0);
    d.cpu_hz = rng.uniform(1e5, 3e5);
    d.cycles_per_bit = rng.uniform(10.0, 30.0);
    d.dataset_size = 50 * (1 + static_cast<std::int64_t>(rng.uniform_int(30)));
    d.train_time_s =
        static_cast<double>(d.dataset_size) * d.cycles_per_bit / d.cpu_hz;
    d.index = rng.uniform();
  }
  return devs;
}

struct GridOracleResult {
  double objective = std::numeric_limits<double>::infinity();
  std::vector<double> alpha;
};

/// Exhaustive scan of rho * makespan + (1 - rho) * total energy over the
/// bandwidth simplex at resolution 1/steps. The objective is strictly
/// decreasing in every alpha, so scanning the face sum(alpha) = 1 covers
/// the whole simplex at grid resolution.
inline GridOracleResult sub2_grid_oracle(const std::vector<SchedDevice> &devs,
                                         const RadioParams &params, double rho,
                                         int steps) {
  const int m = static_cast<int>(devs.size());
  std::vector<std::vector<double>> comp(static_cast<std::size_t>(m)),
      energy(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    auto &ck = comp[static_cast<std::size_t>(k)];
    auto &ek = energy[static_cast<std::size_t>(k)];
    ck.resize(static_cast<std::size_t>(steps) + 1,
              std::numeric_limits<double>::infinity());
    ek.resize(static_cast<std::size_t>(steps) + 1,
              std::numeric_limits<double>::infinity());
    for (int i = 1; i <= steps; ++i) {
      const double a = static_cast<double>(i) / steps;
      const double r = achievable_rate(a, params.bandwidth_hz, params.noise_psd,
                                       devs[static_cast<std::size_t>(k)].gain_sq,
                                       devs[static_cast<std::size_t>(k)].power_w);
      const double up = upload_time(params.model_size_bits, r);
      ck[static_cast<std::size_t>(i)] =
          devs[static_cast<std::size_t>(k)].train_time_s + up;
      ek[static_cast<std::size_t>(i)] =
          upload_energy(devs[static_cast<std::size_t>(k)].power_w, up);
    }
  }

  GridOracleResult best;
  std::vector<int> parts(static_cast<std::size_t>(m), 0);
  // Depth-first over compositions of `steps` into m positive parts, with the
  // last part implied; running max/sum keep the leaf loop tight.
  const auto recurse = [&](auto &&self, int depth, int remaining, double max_comp,
                           double energy_sum) -> void {
    if (depth == m - 1) {
      const double c = comp[static_cast<std::size_t>(depth)][static_cast<std::size_t>(remaining)];
      const double e = energy[static_cast<std::size_t>(depth)][static_cast<std::size_t>(remaining)];
      const double obj =
          rho * std::max(max_comp, c) + (1.0 - rho) * (energy_sum + e);
      if (obj < best.objective) {
        best.objective = obj;
        parts[static_cast<std::size_t>(depth)] = remaining;
        best.alpha.resize(static_cast<std::size_t>(m));
        for (int k = 0; k < m; ++k)
          best.alpha[static_cast<std::size_t>(k)] =
              static_cast<double>(parts[static_cast<std::size_t>(k)]) / steps;
      }
      return;
    }
    const int tail = m - 1 - depth; // parts still to place after this one
    for (int i = 1; i + tail <= remaining; ++i) {
      parts[static_cast<std::size_t>(depth)] = i;
      self(self, depth + 1, remaining - i,
           std::max(max_comp, comp[static_cast<std::size_t>(depth)][static_cast<std::size_t>(i)]),
           energy_sum + energy[static_cast<std::size_t>(depth)][static_cast<std::size_t>(i)]);
    }
  };
  if (m == 1) {
    best.objective = rho * comp[0][static_cast<std::size_t>(steps)] +
                     (1.0 - rho) * energy[0][static_cast<std::size_t>(steps)];
    best.alpha = {1.0};
  } else {
    recurse(recurse, 0, steps, 0.0, 0.0);
  }
  return best;
}

} // namespace feel::testing
