#include "feel/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "feel/textio.hpp"

namespace feel {

namespace {

std::string trim(const std::string &s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos)
    return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

/// Tracks which keys were consumed so leftovers can be reported as unknown.
class Reader {
public:
  explicit Reader(const ConfigFile &file) : file_(file) {}

  std::optional<std::string> raw(const std::string &key) {
    used_.insert(key);
    const auto it = file_.values.find(key);
    if (it == file_.values.end())
      return std::nullopt;
    return it->second;
  }

  int line(const std::string &key) const {
    const auto it = file_.line_of.find(key);
    return it == file_.line_of.end() ? 0 : it->second;
  }

  void get(const std::string &key, double &out) {
    if (const auto v = raw(key)) {
      try {
        out = parse_double(*v);
      } catch (const std::exception &) {
        throw ConfigError(key + ": expected a number, got '" + *v + "'", line(key));
      }
    }
  }

  void get(const std::string &key, int &out) {
    if (const auto v = raw(key)) {
      try {
        out = static_cast<int>(parse_int(*v));
      } catch (const std::exception &) {
        throw ConfigError(key + ": expected an integer, got '" + *v + "'", line(key));
      }
    }
  }

  void get(const std::string &key, std::string &out) {
    if (const auto v = raw(key))
      out = *v;
  }

  void check_unknown() const {
    for (const auto &[key, value] : file_.values)
      if (!used_.contains(key))
        throw ConfigError("unknown key '" + key + "'",
                          file_.line_of.at(key));
  }

private:
  const ConfigFile &file_;
  std::set<std::string> used_;
};

} // namespace

ConfigFile parse_config_text(const std::string &text) {
  ConfigFile file;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value', got '" + line + "'", lineno);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("empty key", lineno);
    if (file.values.contains(key))
      throw ConfigError("duplicate key '" + key + "' (first set on line " +
                            std::to_string(file.line_of[key]) + ")",
                        lineno);
    file.values[key] = value;
    file.line_of[key] = lineno;
  }
  return file;
}

ConfigFile load_config_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

SimConfig resolve_config(const ConfigFile &file,
                         std::optional<std::uint64_t> seed_override) {
  SimConfig cfg;
  Reader r(file);

  r.get("sim.id", cfg.id);
  if (cfg.id.empty() || cfg.id.find(',') != std::string::npos)
    throw ConfigError("sim.id must be non-empty and free of commas (it is a CSV field)",
                      r.line("sim.id"));
  r.get("sim.devices", cfg.num_devices);
  r.get("sim.min_devices", cfg.sched.min_devices);
  r.get("sim.rounds", cfg.rounds_max);
  r.get("sim.target_accuracy", cfg.target_accuracy);
  r.get("sim.selected_fraction_cap", cfg.selected_fraction_cap);

  if (auto name = r.raw("sim.scheduler")) {
    const auto kind = scheduler_from_string(*name);
    if (!kind)
      throw ConfigError("sim.scheduler: unknown scheduler '" + *name +
                            "' (valid: das, abs, random, all)",
                        r.line("sim.scheduler"));
    cfg.scheduler = *kind;
  }

  if (auto seed = r.raw("sim.seed")) {
    try {
      cfg.seed = parse_uint(*seed);
    } catch (const std::exception &) {
      throw ConfigError("sim.seed: expected an unsigned integer, got '" + *seed + "'",
                        r.line("sim.seed"));
    }
  } else if (!seed_override) {
    throw ConfigError("missing required key 'sim.seed'");
  }
  if (seed_override)
    cfg.seed = *seed_override;

  r.get("scheduler.lambda_E", cfg.sched.lambda_e);
  r.get("scheduler.lambda_T", cfg.sched.lambda_t);
  r.get("scheduler.lambda_I", cfg.sched.lambda_i);
  r.get("scheduler.rho", cfg.sched.rho);
  r.get("scheduler.max_devices", cfg.sched.max_devices);
  r.get("scheduler.tolerance", cfg.sched.tolerance);

  r.get("radio.bandwidth_hz", cfg.radio.bandwidth_hz);
  r.get("radio.noise_psd", cfg.radio.noise_psd);
  r.get("radio.pathloss_exponent", cfg.radio.pathloss_exponent);
  r.get("radio.cell_side_m", cfg.radio.cell_side_m);
  r.get("radio.model_size_bits", cfg.radio.model_size_bits);
  r.get("radio.bits_per_sample", cfg.bits_per_sample);

  r.get("device.cpu_hz_min", cfg.ranges.cpu_hz_min);
  r.get("device.cpu_hz_max", cfg.ranges.cpu_hz_max);
  r.get("device.cycles_per_bit_min", cfg.ranges.cycles_per_bit_min);
  r.get("device.cycles_per_bit_max", cfg.ranges.cycles_per_bit_max);
  r.get("device.power_min_w", cfg.ranges.power_min_w);
  r.get("device.power_max_w", cfg.ranges.power_max_w);

  if (auto measure = r.raw("diversity.measure")) {
    if (*measure == "gini")
      cfg.measure = DiversityMeasure::GiniSimpson;
    else if (*measure == "entropy")
      cfg.measure = DiversityMeasure::Entropy;
    else
      throw ConfigError("diversity.measure: unknown measure '" + *measure +
                            "' (valid: gini, entropy)",
                        r.line("diversity.measure"));
  }
  r.get("diversity.gamma_diversity", cfg.weights.gamma_diversity);
  r.get("diversity.gamma_size", cfg.weights.gamma_size);
  r.get("diversity.gamma_age", cfg.weights.gamma_age);

  r.get("fl.hidden_dim", cfg.fl.hidden_dim);
  r.get("fl.learning_rate", cfg.fl.learning_rate);
  r.get("fl.batch_size", cfg.fl.batch_size);
  r.get("fl.epochs", cfg.fl.epochs);

  if (auto source = r.raw("data.source")) {
    if (*source == "synthetic")
      cfg.data.source = DataConfig::Source::Synthetic;
    else if (*source == "idx")
      cfg.data.source = DataConfig::Source::Idx;
    else
      throw ConfigError("data.source: unknown source '" + *source +
                            "' (valid: synthetic, idx)",
                        r.line("data.source"));
  }
  r.get("data.num_classes", cfg.data.num_classes);
  r.get("data.samples_per_class", cfg.data.samples_per_class);
  r.get("data.feature_dim", cfg.data.feature_dim);
  r.get("data.cluster_spread", cfg.data.cluster_spread);
  r.get("data.idx_images", cfg.data.idx_images);
  r.get("data.idx_labels", cfg.data.idx_labels);
  r.get("data.shard_size", cfg.data.shard_size);
  r.get("data.shards_min", cfg.data.min_shards);
  r.get("data.shards_max", cfg.data.max_shards);
  r.get("data.test_fraction", cfg.data.test_fraction);

  r.check_unknown();

  try {
    cfg.validate();
  } catch (const std::exception &e) {
    throw ConfigError(e.what());
  }
  if (cfg.data.source == DataConfig::Source::Idx &&
      (cfg.data.idx_images.empty() || cfg.data.idx_labels.empty()))
    throw ConfigError("data.source = idx requires data.idx_images and data.idx_labels");
  return cfg;
}

std::string echo_config(const SimConfig &cfg) {
  std::ostringstream out;
  const auto put = [&out](const std::string &key, const std::string &value) {
    out << key << " = " << value << '\n';
  };
  const auto put_d = [&put](const std::string &key, double v) {
    put(key, format_double(v));
  };
  const auto put_i = [&put](const std::string &key, long long v) {
    put(key, std::to_string(v));
  };

  put("sim.id", cfg.id);
  put_i("sim.devices", cfg.num_devices);
  put_i("sim.min_devices", cfg.sched.min_devices);
  put_i("sim.rounds", cfg.rounds_max);
  put_d("sim.target_accuracy", cfg.target_accuracy);
  put("sim.scheduler", to_string(cfg.scheduler));
  put("sim.seed", std::to_string(cfg.seed));
  put_d("sim.selected_fraction_cap", cfg.selected_fraction_cap);

  put_d("scheduler.lambda_E", cfg.sched.lambda_e);
  put_d("scheduler.lambda_T", cfg.sched.lambda_t);
  put_d("scheduler.lambda_I", cfg.sched.lambda_i);
  put_d("scheduler.rho", cfg.sched.rho);
  put_i("scheduler.max_devices", cfg.sched.max_devices);
  put_d("scheduler.tolerance", cfg.sched.tolerance);

  put_d("radio.bandwidth_hz", cfg.radio.bandwidth_hz);
  put_d("radio.noise_psd", cfg.radio.noise_psd);
  put_d("radio.pathloss_exponent", cfg.radio.pathloss_exponent);
  put_d("radio.cell_side_m", cfg.radio.cell_side_m);
  put_d("radio.model_size_bits", cfg.radio.model_size_bits);
  put_d("radio.bits_per_sample", cfg.bits_per_sample);

  put_d("device.cpu_hz_min", cfg.ranges.cpu_hz_min);
  put_d("device.cpu_hz_max", cfg.ranges.cpu_hz_max);
  put_d("device.cycles_per_bit_min", cfg.ranges.cycles_per_bit_min);
  put_d("device.cycles_per_bit_max", cfg.ranges.cycles_per_bit_max);
  put_d("device.power_min_w", cfg.ranges.power_min_w);
  put_d("device.power_max_w", cfg.ranges.power_max_w);

  put("diversity.measure",
      cfg.measure == DiversityMeasure::GiniSimpson ? "gini" : "entropy");
  put_d("diversity.gamma_diversity", cfg.weights.gamma_diversity);
  put_d("diversity.gamma_size", cfg.weights.gamma_size);
  put_d("diversity.gamma_age", cfg.weights.gamma_age);

  put_i("fl.hidden_dim", cfg.fl.hidden_dim);
  put_d("fl.learning_rate", cfg.fl.learning_rate);
  put_i("fl.batch_size", cfg.fl.batch_size);
  put_i("fl.epochs", cfg.fl.epochs);

  put("data.source",
      cfg.data.source == DataConfig::Source::Synthetic ? "synthetic" : "idx");
  put_i("data.num_classes", cfg.data.num_classes);
  put_i("data.samples_per_class", cfg.data.samples_per_class);
  put_i("data.feature_dim", cfg.data.feature_dim);
  put_d("data.cluster_spread", cfg.data.cluster_spread);
  if (!cfg.data.idx_images.empty())
    put("data.idx_images", cfg.data.idx_images);
  if (!cfg.data.idx_labels.empty())
    put("data.idx_labels", cfg.data.idx_labels);
  put_i("data.shard_size", cfg.data.shard_size);
  put_i("data.shards_min", cfg.data.min_shards);
  put_i("data.shards_max", cfg.data.max_shards);
  put_d("data.test_fraction", cfg.data.test_fraction);

  return out.str();
}

} // namespace feel
