// Command-line front end: device registry, seeded experiment execution,
// sweeps, and fitting of external CSV tables.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vlab/analysis.hpp"
#include "vlab/pipeline.hpp"
#include "vlab/registry.hpp"
#include "vlab/units.hpp"
#include "vlab/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::string registry_path_from_env(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  const char* env = std::getenv("VLAB_REGISTRY");
  return env != nullptr ? std::string(env) : std::string();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) {
    throw std::invalid_argument("cannot write " + path.string());
  }
  out << text;
}

vlab::Json load_config(const std::string& config_path) {
  std::ifstream in(config_path);
  if (!in) {
    throw std::invalid_argument("cannot open config " + config_path);
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return vlab::Json::parse(buf.str());
}

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;  // column major
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("empty CSV " + path);
  }
  std::stringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) table.columns.push_back(cell);
  table.data.resize(table.columns.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::size_t col = 0;
    while (std::getline(row, cell, ',')) {
      if (col >= table.columns.size()) {
        throw std::invalid_argument("ragged CSV row in " + path);
      }
      table.data[col].push_back(std::stod(cell));
      ++col;
    }
    if (col != table.columns.size()) {
      throw std::invalid_argument("ragged CSV row in " + path);
    }
  }
  return table;
}

int run_command(const std::string& experiment, const std::string& device,
                const std::string& registry_path, std::uint64_t seed,
                const std::string& config_path, const std::string& out_dir,
                const std::vector<std::string>& overrides) {
  const vlab::Registry reg =
      vlab::Registry::with_overrides(registry_path_from_env(registry_path));
  vlab::Json config;
  if (!config_path.empty()) {
    config = load_config(config_path);
  }
  if (!experiment.empty()) config["experiment"] = experiment;
  if (!device.empty()) config["device"] = device;
  if (!config.contains("seed")) config["seed"] = seed;
  // --set section.key=value overrides, e.g. --set ramsey.detuning="10.6 MHz"
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--set expects section.key=value");
    }
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    const auto dot = key.find('.');
    vlab::Json parsed;
    try {
      parsed = vlab::Json::parse(value);
    } catch (...) {
      parsed = value;
    }
    if (dot == std::string::npos) {
      config[key] = parsed;
    } else {
      config[key.substr(0, dot)][key.substr(dot + 1)] = parsed;
    }
  }

  const vlab::RunOutput out = vlab::run_experiment(reg, config);
  std::filesystem::create_directories(out_dir);
  const std::string kind = config.at("experiment").get<std::string>();
  const auto data_path =
      std::filesystem::path(out_dir) / (kind + "_data.csv");
  const auto record_path =
      std::filesystem::path(out_dir) / (kind + "_result.json");
  write_file(data_path, out.data_csv);
  vlab::Json record = out.record;
  record["data_file"] = data_path.string();
  write_file(record_path, record.dump(2) + "\n");
  std::cout << record.dump(2) << std::endl;
  return kExitOk;
}

int sweep_command(const std::string& device, const std::string& registry_path,
                  std::uint64_t seed, const std::string& config_path,
                  const std::string& out_dir, int threads,
                  const std::vector<std::string>& overrides) {
  const vlab::Registry reg =
      vlab::Registry::with_overrides(registry_path_from_env(registry_path));
  vlab::Json config;
  if (!config_path.empty()) config = load_config(config_path);
  config["experiment"] = "sweep";
  if (!device.empty()) config["device"] = device;
  if (!config.contains("seed")) config["seed"] = seed;
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--set expects section.key=value");
    }
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    const auto dot = key.find('.');
    vlab::Json parsed;
    try {
      parsed = vlab::Json::parse(value);
    } catch (...) {
      parsed = value;
    }
    if (dot == std::string::npos) {
      config[key] = parsed;
    } else {
      config[key.substr(0, dot)][key.substr(dot + 1)] = parsed;
    }
  }

  const vlab::SweepOutput out = vlab::sweep_experiment(reg, config, threads);
  std::filesystem::create_directories(out_dir);
  const auto table_path = std::filesystem::path(out_dir) / "sweep_table.csv";
  const auto record_path = std::filesystem::path(out_dir) / "sweep_result.json";
  write_file(table_path, out.table_csv);
  vlab::Json record = out.record;
  record["table_file"] = table_path.string();
  write_file(record_path, record.dump(2) + "\n");
  std::cout << record.dump(2) << std::endl;
  return kExitOk;
}

int analyze_command(const std::string& model, const std::string& csv_path,
                    const std::string& out_path) {
  const CsvTable table = read_csv(csv_path);
  if (table.columns.size() < 2) {
    throw std::invalid_argument("analyze: need at least two CSV columns");
  }
  const auto& x = table.data[0];
  const auto& y = table.data[1];
  vlab::FitResult fit;
  if (model == "exp") {
    fit = vlab::fit_exp_decay(x, y);
  } else if (model == "sinusoid") {
    fit = vlab::fit_damped_sinusoid(x, y);
  } else if (model == "parabola") {
    fit = vlab::fit_parabola_spectrum(x, y);
  } else if (model == "lorentzian") {
    fit = vlab::linewidth_t2(x, y);
  } else {
    throw std::invalid_argument("analyze: unknown model '" + model + "'");
  }
  const vlab::Json record = vlab::fit_result_to_json(fit);
  if (!out_path.empty()) write_file(out_path, record.dump(2) + "\n");
  std::cout << record.dump(2) << std::endl;
  if (!fit.converged) return kExitNumerical;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooper-pair box virtual laboratory"};
  app.set_version_flag("--version", vlab::kVersion);
  app.require_subcommand(1);

  std::string experiment, device, registry_path, config_path;
  std::string out_dir = "vlab_out";
  std::uint64_t seed = 1;
  int threads = 1;
  std::vector<std::string> overrides;
  std::string analyze_model = "exp", analyze_csv, analyze_out;

  auto* run = app.add_subcommand("run", "Run one experiment config");
  run->add_option("experiment", experiment,
                  "spectroscopy | t1 | rabi | ramsey | echo");
  run->add_option("--device", device, "registry device name");
  run->add_option("--config", config_path, "JSON config file");
  run->add_option("--registry", registry_path, "registry override file");
  run->add_option("--seed", seed, "explicit random seed");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--set", overrides, "section.key=value overrides");

  auto* sweep = app.add_subcommand("sweep", "Flux sweep with per-point fits");
  sweep->add_option("--device", device, "registry device name");
  sweep->add_option("--config", config_path, "JSON config file");
  sweep->add_option("--registry", registry_path, "registry override file");
  sweep->add_option("--seed", seed, "explicit random seed");
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--threads", threads, "worker pool size");
  sweep->add_option("--set", overrides, "section.key=value overrides");

  auto* registry = app.add_subcommand("registry", "List registry devices");
  registry->add_option("--registry", registry_path, "registry override file");

  auto* analyze = app.add_subcommand("analyze", "Fit an external CSV table");
  analyze->add_option("--fit", analyze_model,
                      "exp | sinusoid | parabola | lorentzian");
  analyze->add_option("csv", analyze_csv, "input CSV (x in col 0, y in col 1)")
      ->required();
  analyze->add_option("--out", analyze_out, "write fit JSON here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (experiment.empty() && config_path.empty()) {
        std::cerr << "run: need an experiment name or --config" << std::endl;
        return kExitConfig;
      }
      return run_command(experiment, device, registry_path, seed, config_path,
                         out_dir, overrides);
    }
    if (sweep->parsed()) {
      return sweep_command(device, registry_path, seed, config_path, out_dir,
                           threads, overrides);
    }
    if (registry->parsed()) {
      const vlab::Registry reg = vlab::Registry::with_overrides(
          registry_path_from_env(registry_path));
      std::cout << reg.list_text();
      return kExitOk;
    }
    if (analyze->parsed()) {
      return analyze_command(analyze_model, analyze_csv, analyze_out);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << std::endl;
    return kExitNumerical;
  }
  return kExitConfig;
}
