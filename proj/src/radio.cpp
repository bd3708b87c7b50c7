#include "feel/radio.hpp"

#include <cmath>
#include <stdexcept>

namespace feel {

void RadioParams::validate() const {
  if (bandwidth_hz <= 0)
    throw std::invalid_argument("radio: bandwidth must be positive");
  if (noise_psd <= 0)
    throw std::invalid_argument("radio: noise PSD must be positive");
  if (model_size_bits <= 0)
    throw std::invalid_argument("radio: model size must be positive");
  if (pathloss_exponent < 2)
    throw std::invalid_argument("radio: pathloss exponent must be >= 2");
  if (cell_side_m <= 0)
    throw std::invalid_argument("radio: cell side must be positive");
}

double channel_gain(double distance_m, double pathloss_exponent,
                    double rayleigh_power) {
  if (distance_m <= 0)
    throw std::invalid_argument("channel_gain: distance must be positive");
  if (rayleigh_power < 0)
    throw std::invalid_argument("channel_gain: fading power must be non-negative");
  return std::pow(distance_m, -pathloss_exponent) * rayleigh_power;
}

double achievable_rate(double alpha, double bandwidth_hz, double noise_psd,
                       double gain_sq, double power_w) {
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("achievable_rate: alpha outside [0,1]");
  if (alpha == 0.0)
    return 0.0;
  const double band = alpha * bandwidth_hz;
  const double snr = gain_sq * power_w / (band * noise_psd);
  return band * std::log2(1.0 + snr);
}

double achievable_rate(double alpha, const RadioParams &params,
                       const DeviceRadioState &state) {
  return achievable_rate(alpha, params.bandwidth_hz, params.noise_psd,
                         state.channel_gain_sq, state.transmit_power_w);
}

double training_time(double epochs, double dataset_size,
                     const DeviceRadioState &state) {
  if (epochs < 0 || dataset_size < 0)
    throw std::invalid_argument("training_time: negative epochs or dataset size");
  if (state.cpu_hz <= 0)
    throw std::invalid_argument("training_time: cpu frequency must be positive");
  return epochs * dataset_size * state.bits_per_sample * state.cycles_per_bit /
         state.cpu_hz;
}

double upload_time(double model_size_bits, double rate_bps) {
  if (model_size_bits <= 0)
    throw std::invalid_argument("upload_time: model size must be positive");
  if (rate_bps < 0)
    throw std::invalid_argument("upload_time: negative rate");
  if (rate_bps == 0)
    return kInfinity;
  return model_size_bits / rate_bps;
}

double upload_energy(double power_w, double upload_time_s) {
  if (power_w <= 0)
    throw std::invalid_argument("upload_energy: transmit power must be positive");
  if (upload_time_s < 0)
    throw std::invalid_argument("upload_energy: negative upload time");
  return power_w * upload_time_s;
}

double round_duration(std::span<const double> completion_times_s,
                      std::span<const int> selected) {
  if (completion_times_s.size() != selected.size())
    throw std::invalid_argument("round_duration: mismatched spans");
  bool any = false;
  double worst = 0.0;
  for (std::size_t k = 0; k < selected.size(); ++k) {
    if (!selected[k])
      continue;
    any = true;
    worst = std::max(worst, completion_times_s[k]);
  }
  if (!any)
    throw std::invalid_argument("round_duration: empty selection");
  return worst;
}

} // namespace feel
