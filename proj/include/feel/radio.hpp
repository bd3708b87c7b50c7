#pragma once

#include <span>
#include <vector>

#include "feel/types.hpp"

namespace feel {

/// Cell-wide uplink parameters. Total bandwidth is shared by OFDMA: each
/// scheduled device gets a fraction alpha_k with sum alpha <= 1.
struct RadioParams {
  double bandwidth_hz = 1e6;      ///< B
  double noise_psd = 1e-13;       ///< N0, W/Hz
  double pathloss_exponent = 3.0;
  double cell_side_m = 500.0;
  double model_size_bits = 1e5;   ///< s, uplink payload per update

  void validate() const;
};

/// Per-device radio and compute state for one round.
struct DeviceRadioState {
  double x = 0, y = 0;
  double distance_m = 0;         ///< to the base station, > 0
  double channel_gain_sq = 0;    ///< |g|^2 = d^-alpha * |h|^2
  double transmit_power_w = 0;   ///< P
  double cpu_hz = 0;             ///< f
  double cycles_per_bit = 0;     ///< C
  double bits_per_sample = 1;    ///< beta; 1 makes training time E*|D|*C/f
};

/// |g|^2 = d^-ple * |h|^2. Distance zero is a pathloss singularity.
double channel_gain(double distance_m, double pathloss_exponent,
                    double rayleigh_power);

/// Shannon rate over the allocated sub-band:
///   r = alpha * B * log2(1 + g^2 * P / (alpha * B * N0)).
/// alpha = 0 returns 0, the limit of the expression as alpha -> 0+.
/// Strictly increasing and concave in alpha on (0,1] whenever g^2*P > 0.
double achievable_rate(double alpha, double bandwidth_hz, double noise_psd,
                       double gain_sq, double power_w);
double achievable_rate(double alpha, const RadioParams &params,
                       const DeviceRadioState &state);

/// Local computation time: E * |D| * beta * C / f seconds.
double training_time(double epochs, double dataset_size,
                     const DeviceRadioState &state);

/// s / rate; infinity when the rate is zero (device cannot upload).
double upload_time(double model_size_bits, double rate_bps);

/// P * t_up joules; infinite time propagates to infinite energy.
double upload_energy(double power_w, double upload_time_s);

/// Synchronous-round duration: max of (train + upload) over the selected
/// devices. Throws if nothing is selected.
double round_duration(std::span<const double> completion_times_s,
                      std::span<const int> selected);

} // namespace feel
