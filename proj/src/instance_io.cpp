#include "feel/instance_io.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace feel {

using nlohmann::json;

SchedInstance load_instance(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("instance: cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error &e) {
    throw std::runtime_error("instance: parse error in " + path + ": " + e.what());
  }

  SchedInstance inst;
  const json &params = doc.at("params");
  inst.params.bandwidth_hz = params.at("bandwidth_hz").get<double>();
  inst.params.noise_psd = params.at("noise_psd").get<double>();
  inst.params.model_size_bits = params.at("model_size_bits").get<double>();
  inst.params.validate();

  const json &config = doc.at("config");
  inst.config.lambda_e = config.at("lambda_E").get<double>();
  inst.config.lambda_t = config.at("lambda_T").get<double>();
  inst.config.lambda_i = config.at("lambda_I").get<double>();
  inst.config.rho = config.at("rho").get<double>();
  inst.config.min_devices = config.at("N").get<int>();
  if (config.contains("max_devices"))
    inst.config.max_devices = config.at("max_devices").get<int>();
  if (config.contains("tolerance"))
    inst.config.tolerance = config.at("tolerance").get<double>();
  inst.config.validate();

  for (const json &d : doc.at("devices")) {
    SchedDevice dev;
    dev.id = d.at("id").get<int>();
    dev.gain_sq = d.at("gain_sq").get<double>();
    dev.power_w = d.at("power_W").get<double>();
    dev.cpu_hz = d.at("cpu_hz").get<double>();
    dev.cycles_per_bit = d.at("cycles_per_bit").get<double>();
    dev.dataset_size = d.at("dataset_size").get<std::int64_t>();
    dev.index = d.at("index").get<double>();
    if (dev.cpu_hz <= 0)
      throw std::runtime_error("instance: device " + std::to_string(dev.id) +
                               " has non-positive cpu_hz");
    dev.train_time_s = static_cast<double>(dev.dataset_size) *
                       dev.cycles_per_bit / dev.cpu_hz;
    inst.devices.push_back(dev);
  }
  if (inst.devices.empty())
    throw std::runtime_error("instance: no devices in " + path);
  return inst;
}

void save_instance(const SchedInstance &instance, const std::string &path) {
  json doc;
  doc["params"] = {{"bandwidth_hz", instance.params.bandwidth_hz},
                   {"noise_psd", instance.params.noise_psd},
                   {"model_size_bits", instance.params.model_size_bits}};
  doc["config"] = {{"lambda_E", instance.config.lambda_e},
                   {"lambda_T", instance.config.lambda_t},
                   {"lambda_I", instance.config.lambda_i},
                   {"rho", instance.config.rho},
                   {"N", instance.config.min_devices},
                   {"max_devices", instance.config.max_devices},
                   {"tolerance", instance.config.tolerance}};
  doc["devices"] = json::array();
  for (const SchedDevice &dev : instance.devices)
    doc["devices"].push_back({{"id", dev.id},
                              {"gain_sq", dev.gain_sq},
                              {"power_W", dev.power_w},
                              {"cpu_hz", dev.cpu_hz},
                              {"cycles_per_bit", dev.cycles_per_bit},
                              {"dataset_size", dev.dataset_size},
                              {"index", dev.index}});
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("instance: cannot write " + path);
  out << doc.dump(2) << '\n';
}

} // namespace feel
