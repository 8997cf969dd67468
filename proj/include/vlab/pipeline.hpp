#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "vlab/analysis.hpp"
#include "vlab/registry.hpp"

namespace vlab {

using Json = nlohmann::ordered_json;

// Orders-of-operation hash of a config: canonical (key-sorted) dump, FNV-1a.
std::string config_hash(const Json& config);

struct RunOutput {
  Json record;           // ResultRecord: hash, version, fit, data schema
  std::string data_csv;  // raw data table
  FitResult fit;
};

// Executes one experiment config end to end: dynamics -> heterodyne ->
// demodulation -> fit. Config schema:
//   {"device": "device1", "experiment": "ramsey|t1|rabi|echo|spectroscopy",
//    "seed": 42, "<experiment>": {...}, "readout": {...}}
// All dimensioned parameters are unit strings ("10.6 MHz"); bare numbers
// are rejected for them.
RunOutput run_experiment(const Registry& reg, const Json& config);

// Flux sweep: per-point T1 and Rabi-decoupling experiments aggregated into
// a (f_q, T1, decoupling) table. Points run on a worker pool; per-point
// seeds derive from (seed, point index), so the result is independent of
// the thread count.
struct SweepOutput {
  Json record;
  std::string table_csv;  // columns f_q_ghz, t1_us, decoupling_uv_per_mhz
};
SweepOutput sweep_experiment(const Registry& reg, const Json& config,
                             int n_threads = 1);

Json fit_result_to_json(const FitResult& fit);

}  // namespace vlab
