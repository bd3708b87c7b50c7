#include "feel/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "feel/config.hpp"
#include "feel/instance_io.hpp"
#include "feel/textio.hpp"

namespace feel {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<OutputRecord> to_records(const SimConfig &cfg,
                                     const ExperimentResult &result) {
  std::vector<OutputRecord> records;
  records.reserve(result.rounds.size());
  for (const RoundMetrics &rm : result.rounds) {
    OutputRecord rec;
    rec.experiment_id = cfg.id;
    rec.scheduler = to_string(cfg.scheduler);
    rec.round = rm.round;
    rec.accuracy = rm.accuracy;
    rec.round_duration_s = rm.duration_s;
    rec.round_energy_j = rm.round_energy_j;
    rec.num_selected = static_cast<int>(rm.selected_ids.size());
    rec.cumulative_energy_j = rm.cumulative_energy_j;
    rec.cumulative_time_s = rm.cumulative_time_s;
    records.push_back(std::move(rec));
  }
  return records;
}

void write_rounds_csv(const std::string &path,
                      const std::vector<OutputRecord> &records) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  out << "experiment_id,scheduler,round,accuracy,round_duration_s,"
         "round_energy_J,num_selected,cumulative_energy_J,cumulative_time_s\n";
  for (const OutputRecord &r : records)
    out << r.experiment_id << ',' << r.scheduler << ',' << r.round << ','
        << format_double(r.accuracy) << ',' << format_double(r.round_duration_s)
        << ',' << format_double(r.round_energy_j) << ',' << r.num_selected << ','
        << format_double(r.cumulative_energy_j) << ','
        << format_double(r.cumulative_time_s) << '\n';
}

namespace {

std::vector<std::string> split_csv_line(const std::string &line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ','))
    fields.push_back(field);
  return fields;
}

} // namespace

std::vector<OutputRecord> read_rounds_csv(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": missing header");
  std::vector<OutputRecord> records;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    const auto f = split_csv_line(line);
    if (f.size() != 9)
      throw std::runtime_error(path + ": expected 9 columns, got " +
                               std::to_string(f.size()));
    OutputRecord r;
    r.experiment_id = f[0];
    r.scheduler = f[1];
    r.round = static_cast<int>(parse_int(f[2]));
    r.accuracy = parse_double(f[3]);
    r.round_duration_s = parse_double(f[4]);
    r.round_energy_j = parse_double(f[5]);
    r.num_selected = static_cast<int>(parse_int(f[6]));
    r.cumulative_energy_j = parse_double(f[7]);
    r.cumulative_time_s = parse_double(f[8]);
    records.push_back(std::move(r));
  }
  return records;
}

void write_mean_curves_csv(const std::string &path,
                           const std::vector<SweepRoundStat> &curve) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  out << "round,mean_accuracy,std_accuracy,mean_energy,mean_duration\n";
  for (const SweepRoundStat &s : curve)
    out << s.round << ',' << format_double(s.mean_accuracy) << ','
        << format_double(s.std_accuracy) << ',' << format_double(s.mean_energy)
        << ',' << format_double(s.mean_duration) << '\n';
}

namespace {

json summary_json(const SimConfig &cfg, const ExperimentResult &res) {
  json j;
  j["experiment_id"] = cfg.id;
  j["scheduler"] = to_string(cfg.scheduler);
  j["seed"] = cfg.seed;
  j["rounds_executed"] = res.rounds.size();
  if (res.rounds_to_target)
    j["rounds_to_target"] = *res.rounds_to_target;
  else
    j["rounds_to_target"] = nullptr;
  j["total_energy_J"] = res.total_energy_j;
  j["completion_time_s"] = res.completion_time_s;
  j["final_accuracy"] = res.final_accuracy;
  j["mean_selected_fraction"] = res.mean_selected_fraction;
  j["selected_fraction_cap"] = cfg.selected_fraction_cap;
  j["fraction_within_cap"] =
      res.mean_selected_fraction <= cfg.selected_fraction_cap;
  j["selection_counts"] = res.selection_counts;
  return j;
}

int report_error(const std::exception &e, int code) {
  std::cerr << "error: " << e.what() << '\n';
  return code;
}

} // namespace

int cmd_run(const std::string &config_path, const std::string &out_dir,
            std::optional<std::uint64_t> seed_override) {
  SimConfig cfg;
  try {
    cfg = resolve_config(load_config_file(config_path), seed_override);
  } catch (const ConfigError &e) {
    return report_error(e, 2);
  }
  try {
    fs::create_directories(out_dir);
    const std::string echo = echo_config(cfg);
    std::cout << echo;
    std::ofstream(fs::path(out_dir) / "resolved.cfg") << echo;

    const ExperimentResult res = run_experiment(cfg);
    write_rounds_csv((fs::path(out_dir) / "rounds.csv").string(),
                     to_records(cfg, res));
    std::ofstream((fs::path(out_dir) / "summary.json"))
        << summary_json(cfg, res).dump(2) << '\n';
    std::cout << "rounds: " << res.rounds.size()
              << "  final_accuracy: " << res.final_accuracy
              << "  total_energy_J: " << res.total_energy_j << '\n';
    return 0;
  } catch (const std::exception &e) {
    return report_error(e, 1);
  }
}

int cmd_sweep(const std::string &config_path, const std::string &out_dir,
              int runs, int jobs, std::optional<std::uint64_t> seed_override) {
  if (runs < 1) {
    std::cerr << "error: --runs must be >= 1\n";
    return 2;
  }
  SimConfig cfg;
  try {
    cfg = resolve_config(load_config_file(config_path), seed_override);
  } catch (const ConfigError &e) {
    return report_error(e, 2);
  }
  try {
    fs::create_directories(out_dir);
    std::ofstream(fs::path(out_dir) / "resolved.cfg") << echo_config(cfg);
    const SweepResult sweep = run_sweep(cfg, runs, cfg.seed, jobs);

    json summary;
    summary["experiment_id"] = cfg.id;
    summary["scheduler"] = to_string(cfg.scheduler);
    summary["base_seed"] = cfg.seed;
    summary["runs"] = runs;
    summary["failures"] = sweep.num_failures;
    json run_list = json::array();
    for (const SweepRunOutcome &run : sweep.runs) {
      json r;
      r["run"] = run.run_index;
      r["seed"] = run.seed;
      r["ok"] = run.ok;
      if (run.ok) {
        r["final_accuracy"] = run.result.final_accuracy;
        r["total_energy_J"] = run.result.total_energy_j;
        r["rounds"] = run.result.rounds.size();
        if (run.result.rounds_to_target)
          r["rounds_to_target"] = *run.result.rounds_to_target;
        char name[32];
        std::snprintf(name, sizeof name, "run_%03d.csv", run.run_index);
        SimConfig run_cfg = cfg;
        run_cfg.seed = run.seed;
        write_rounds_csv((fs::path(out_dir) / name).string(),
                         to_records(run_cfg, run.result));
      } else {
        r["error"] = run.error;
      }
      run_list.push_back(std::move(r));
    }
    summary["run_results"] = std::move(run_list);
    std::ofstream(fs::path(out_dir) / "sweep_summary.json")
        << summary.dump(2) << '\n';
    write_mean_curves_csv((fs::path(out_dir) / "mean_curves.csv").string(),
                          sweep.curve);
    std::cout << "sweep: " << runs << " runs, " << sweep.num_failures
              << " failures\n";
    return 0;
  } catch (const std::exception &e) {
    return report_error(e, 1);
  }
}

namespace {

std::string selected_list(const ScheduleDecision &d) {
  std::string s = "[";
  bool first = true;
  for (std::size_t k = 0; k < d.selection.size(); ++k)
    if (d.selection[k]) {
      if (!first)
        s += ' ';
      s += std::to_string(k);
      first = false;
    }
  return s + "]";
}

} // namespace

int cmd_oracle(const std::string &instance_path, double gap_threshold) {
  SchedInstance inst;
  try {
    inst = load_instance(instance_path);
  } catch (const std::exception &e) {
    return report_error(e, 2);
  }
  if (inst.devices.size() > 12) {
    std::cerr << "error: instance has " << inst.devices.size()
              << " devices; the exhaustive oracle is guarded to K <= 12\n";
    return 2;
  }
  try {
    const ScheduleDecision das =
        schedule_das(inst.devices, inst.params, inst.config);
    const ScheduleDecision oracle =
        brute_force_oracle(inst.devices, inst.params, inst.config);
    const double gap = (oracle.objective_value - das.objective_value) /
                       std::max(std::abs(oracle.objective_value), 1e-12);
    std::cout << "das:    devices " << selected_list(das)
              << "  duration_s=" << format_double(das.predicted_duration_s)
              << "  objective=" << format_double(das.objective_value) << '\n';
    std::cout << "oracle: devices " << selected_list(oracle)
              << "  duration_s=" << format_double(oracle.predicted_duration_s)
              << "  objective=" << format_double(oracle.objective_value) << '\n';
    std::cout << "relative objective gap: " << format_double(gap)
              << " (threshold " << format_double(gap_threshold) << ")\n";
    return gap <= gap_threshold ? 0 : 1;
  } catch (const std::exception &e) {
    return report_error(e, 1);
  }
}

int cmd_partition(const std::string &config_path, const std::string &csv_path,
                  std::optional<std::uint64_t> seed_override) {
  SimConfig cfg;
  try {
    cfg = resolve_config(load_config_file(config_path), seed_override);
  } catch (const ConfigError &e) {
    return report_error(e, 2);
  }
  try {
    Dataset data;
    if (cfg.data.source == DataConfig::Source::Synthetic)
      data = synthetic_dataset(cfg.data.num_classes, cfg.data.samples_per_class,
                               cfg.data.feature_dim, cfg.data.cluster_spread,
                               mix_seed(cfg.seed, stream::kData));
    else
      data = load_idx(cfg.data.idx_images, cfg.data.idx_labels);
    const Partition part = shard_partition(
        data, cfg.data.shard_size, cfg.data.min_shards, cfg.data.max_shards,
        cfg.num_devices, mix_seed(cfg.seed, stream::kPartition));

    std::ostringstream csv;
    csv << "device,dataset_size,diversity,shards\n";
    std::cout << "shards formed: " << part.num_shards << " (size "
              << part.shard_size << ")\n";
    std::cout << "device  size  diversity  shards\n";
    for (std::size_t dev = 0; dev < part.device_samples.size(); ++dev) {
      const auto &rows = part.device_samples[dev];
      std::vector<int> labels;
      labels.reserve(rows.size());
      for (int rix : rows)
        labels.push_back(data.labels[static_cast<std::size_t>(rix)]);
      const double score = dataset_diversity(
          label_distribution(labels, data.num_classes), cfg.measure);
      int shards = 0;
      for (int owner : part.shard_to_device)
        if (owner == static_cast<int>(dev))
          ++shards;
      std::printf("%6zu  %4zu  %9.4f  %6d\n", dev, rows.size(), score, shards);
      csv << dev << ',' << rows.size() << ',' << format_double(score) << ','
          << shards << '\n';
    }
    if (!csv_path.empty()) {
      std::ofstream out(csv_path);
      if (!out)
        throw std::runtime_error("cannot write " + csv_path);
      out << csv.str();
    }
    return 0;
  } catch (const std::exception &e) {
    return report_error(e, 1);
  }
}

int cli_main(int argc, const char *const *argv) {
  CLI::App app{"Device-scheduling simulator for federated edge learning"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", instance_path, csv_path;
  int runs = 1, jobs = 1;
  double gap_threshold = 0.05;
  std::optional<std::uint64_t> seed_override;
  std::uint64_t seed_value = 0;

  const auto add_seed = [&](CLI::App *cmd) {
    cmd->add_option("--seed", seed_value, "override sim.seed from the config");
  };

  CLI::App *run = app.add_subcommand("run", "one experiment: rounds.csv + summary.json");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--out", out_dir, "output directory");
  add_seed(run);

  CLI::App *sweep = app.add_subcommand("sweep", "averaged multi-seed runs");
  sweep->add_option("--config", config_path, "config file")->required();
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--runs", runs, "number of runs")->required();
  sweep->add_option("--jobs", jobs, "worker threads");
  add_seed(sweep);

  CLI::App *oracle = app.add_subcommand(
      "oracle", "compare the heuristic against exhaustive enumeration");
  oracle->add_option("instance", instance_path, "instance JSON file")->required();
  oracle->add_option("--gap", gap_threshold, "acceptable relative gap");

  CLI::App *partition = app.add_subcommand(
      "partition", "per-device dataset sizes, diversity scores, shard counts");
  partition->add_option("--config", config_path, "config file")->required();
  partition->add_option("--csv", csv_path, "also write the table as CSV");
  add_seed(partition);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  for (CLI::App *cmd : {run, sweep, partition})
    if (cmd->parsed() && cmd->count("--seed") > 0)
      seed_override = seed_value;

  if (run->parsed())
    return cmd_run(config_path, out_dir, seed_override);
  if (sweep->parsed())
    return cmd_sweep(config_path, out_dir, runs, jobs, seed_override);
  if (oracle->parsed())
    return cmd_oracle(instance_path, gap_threshold);
  if (partition->parsed())
    return cmd_partition(config_path, csv_path, seed_override);
  return 2;
}

} // namespace feel
