#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vlab/noise.hpp"
#include "vlab/qubit.hpp"

namespace vlab {

struct CouplingPoint {
  double f_q_ghz = 0.0;
  double coupling_mhz_per_uv = 0.0;
};

// One registry entry: the measured device summary plus the models the
// simulator needs (qubit/resonator parameters, drive-line coupling versus
// transition frequency, the T1-versus-decoupling rule, defect branches,
// and any blind spectroscopy windows).
struct DeviceRecord {
  std::string name;
  CpbParams qubit;
  ResonatorParams resonator;
  DefectSpectrumModel defect_model;  // branches empty when not applicable
  std::vector<CouplingPoint> coupling_model;
  double t1_reference_s = 0.0;
  double decoupling_reference_uv_per_mhz = 0.0;
  std::vector<std::pair<double, double>> blind_windows_ghz;
  std::vector<std::pair<std::string, std::string>> summary;  // display fields

  bool has_defect_model() const { return !defect_model.branches.empty(); }
  // Piecewise-linear interpolation of the drive-line coupling.
  double coupling_at(double f_q_ghz) const;
  double decoupling_at(double f_q_ghz) const;
  // T1 programmed from the coupling model: T1_ref (d / d_ref)^2.
  double t1_at(double f_q_ghz) const;
  bool visible_at(double f_q_ghz) const;
};

struct Registry {
  std::map<std::string, DeviceRecord> devices;
  std::map<std::string, NoisePsd> psd_presets;

  // The two devices and their noise presets shipped with the repository.
  static Registry builtin();
  // Built-ins plus entries from a registry file; file entries override.
  static Registry with_overrides(const std::string& path);
  static Registry parse(const std::string& json_text);

  const DeviceRecord& device(const std::string& name) const;
  const NoisePsd& preset(const std::string& name) const;

  std::string list_text() const;
};

// JSON text of the built-in registry (also shipped as data/devices.json).
const std::string& builtin_registry_json();

}  // namespace vlab
