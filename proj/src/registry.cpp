#include "vlab/registry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "vlab/units.hpp"

namespace vlab {

namespace {

// Table 1 for both devices plus the configuration values the simulator
// needs. C_c is not a measured quantity; it is back-solved from the
// reported g/2pi and treated as a fitted configuration value.
const char kBuiltinRegistry[] = R"JSON({
  "psd_presets": {
    "device1-1f": {
      "amplitude_1hz": "9e-6 e^2/Hz",
      "exponent": 1.0,
      "infrared_cutoff": "1 Hz"
    },
    "device1-1f-cutoff200k": {
      "amplitude_1hz": "9e-6 e^2/Hz",
      "exponent": 1.0,
      "soft_cutoff": "0.2 MHz",
      "infrared_cutoff": "1 Hz"
    },
    "device2-1f": {
      "amplitude_1hz": "1e-4 e^2/Hz",
      "exponent": 1.0,
      "infrared_cutoff": "1 Hz"
    }
  },
  "devices": {
    "device1": {
      "qubit": {
        "e_c": "6.24 GHz",
        "e_j_max": "19 GHz",
        "c_g": "4.5 aF",
        "c_c": "30.22 aF"
      },
      "resonator": {
        "f_r": "5.446 GHz",
        "q_loaded": 22000,
        "q_external": 70000,
        "q_internal": 32000,
        "capacitance": "400 fF",
        "inductance": "2 nH"
      },
      "summary": {
        "omega_r/2pi": "5.446 GHz",
        "Q_L": "22000",
        "Q_i": "32000",
        "Q_e": "70000",
        "omega_a/2pi": "4-8 GHz",
        "E_J,max/h": "19 GHz",
        "E_c/h": "6.24 GHz",
        "C_g": "4.5 aF",
        "g/2pi": "5 MHz",
        "T_1": "30-200 us",
        "T_2*": "200-500 ns",
        "T_echo": "2.4-3.3 us",
        "T'": "1-2 us",
        "S_q(1 Hz)": "(3e-3)^2 e^2/Hz",
        "S_q(4.5 GHz)": "1e-18 e^2/Hz"
      },
      "coupling_model": [
        {"f_q": "4.0 GHz", "coupling": "0.16 MHz/uV"},
        {"f_q": "4.5 GHz", "coupling": "0.13 MHz/uV"},
        {"f_q": "5.35 GHz", "coupling": "0.20 MHz/uV"},
        {"f_q": "5.55 GHz", "coupling": "0.45 MHz/uV"},
        {"f_q": "8.0 GHz", "coupling": "0.53 MHz/uV"}
      ],
      "t1_model": {
        "reference_t1": "205 us",
        "reference_decoupling": "7.6923076923076925 uV/MHz"
      },
      "default_psd": "device1-1f-cutoff200k"
    },
    "device2": {
      "qubit": {
        "e_c": "4.3 GHz",
        "e_j_max": "7.33 GHz",
        "c_g": "19.1 aF",
        "c_c": "109.4 aF"
      },
      "resonator": {
        "f_r": "5.472 GHz",
        "q_loaded": 35000,
        "q_external": 47000,
        "q_internal": 147000,
        "capacitance": "400 fF",
        "inductance": "2 nH"
      },
      "summary": {
        "omega_r/2pi": "5.472 GHz",
        "Q_L": "35000",
        "Q_i": "147000",
        "Q_e": "47000",
        "omega_a/2pi": "4-7.3 GHz",
        "E_J,max/h": "7.33 GHz",
        "E_c/h": "4.3 GHz",
        "C_g": "19.1 aF",
        "g/2pi": "10-15 MHz",
        "T_1": "4-30 us",
        "T_2*": "60 ns",
        "T_echo": "-",
        "T'": "0.2-1.8 us",
        "S_q(1 Hz)": "(1e-2)^2 e^2/Hz",
        "S_q(4.5 GHz)": "1e-17 e^2/Hz"
      },
      "defect_model": {
        "branches": [
          {"e_j": "7.33 GHz", "offset": 0.0, "weight": 1.0},
          {"e_j": "7.02 GHz", "offset": 0.035, "weight": 0.85},
          {"e_j": "6.71 GHz", "offset": 0.02, "weight": 0.7},
          {"e_j": "6.38 GHz", "offset": 0.055, "weight": 0.6}
        ]
      },
      "coupling_model": [
        {"f_q": "4.0 GHz", "coupling": "0.9 MHz/uV"},
        {"f_q": "5.4 GHz", "coupling": "1.1 MHz/uV"},
        {"f_q": "5.6 GHz", "coupling": "3.2 MHz/uV"},
        {"f_q": "7.3 GHz", "coupling": "4.0 MHz/uV"}
      ],
      "t1_model": {
        "reference_t1": "30 us",
        "reference_decoupling": "1.1111111111111112 uV/MHz"
      },
      "visibility_mask": [
        {"low": "5.0 GHz", "high": "6.5 GHz"}
      ],
      "default_psd": "device2-1f"
    }
  }
})JSON";

using json = nlohmann::ordered_json;

NoisePsd parse_psd(const json& j) {
  NoisePsd psd;
  psd.amplitude_1hz =
      parse_quantity(j.at("amplitude_1hz").get<std::string>(),
                     Kind::kPsdE2PerHz);
  if (j.contains("exponent")) psd.exponent = j.at("exponent").get<double>();
  if (j.contains("soft_cutoff")) {
    psd.soft_cutoff_hz = parse_quantity(j.at("soft_cutoff").get<std::string>(),
                                        Kind::kFrequencyHz);
  }
  if (j.contains("white_floor")) {
    psd.white_floor = parse_quantity(j.at("white_floor").get<std::string>(),
                                     Kind::kPsdE2PerHz);
  }
  if (j.contains("infrared_cutoff")) {
    psd.infrared_cutoff_hz = parse_quantity(
        j.at("infrared_cutoff").get<std::string>(), Kind::kFrequencyHz);
  }
  psd.validate();
  return psd;
}

DeviceRecord parse_device(const std::string& name, const json& j) {
  DeviceRecord d;
  d.name = name;
  const auto& q = j.at("qubit");
  d.qubit.e_c_ghz =
      parse_quantity(q.at("e_c").get<std::string>(), Kind::kFrequencyGhz);
  d.qubit.e_j_max_ghz =
      parse_quantity(q.at("e_j_max").get<std::string>(), Kind::kFrequencyGhz);
  d.qubit.c_g_af =
      parse_quantity(q.at("c_g").get<std::string>(), Kind::kCapacitanceAf);
  d.qubit.c_c_af =
      parse_quantity(q.at("c_c").get<std::string>(), Kind::kCapacitanceAf);
  d.qubit.validate();

  const auto& r = j.at("resonator");
  d.resonator.f_r_ghz =
      parse_quantity(r.at("f_r").get<std::string>(), Kind::kFrequencyGhz);
  d.resonator.q_loaded = r.at("q_loaded").get<double>();
  d.resonator.q_external = r.at("q_external").get<double>();
  d.resonator.q_internal = r.at("q_internal").get<double>();
  d.resonator.capacitance_ff = parse_quantity(
      r.at("capacitance").get<std::string>(), Kind::kCapacitanceFf);
  d.resonator.inductance_nh = parse_quantity(
      r.at("inductance").get<std::string>(), Kind::kInductanceNh);
  d.resonator.validate();

  if (j.contains("summary")) {
    for (const auto& [key, value] : j.at("summary").items()) {
      d.summary.emplace_back(key, value.get<std::string>());
    }
  }
  if (j.contains("defect_model")) {
    d.defect_model.e_c_ghz = d.qubit.e_c_ghz;
    for (const auto& b : j.at("defect_model").at("branches")) {
      DefectBranch branch;
      branch.e_j_ghz =
          parse_quantity(b.at("e_j").get<std::string>(), Kind::kFrequencyGhz);
      branch.charge_offset = b.at("offset").get<double>();
      branch.visibility_weight = b.at("weight").get<double>();
      d.defect_model.branches.push_back(branch);
    }
    d.defect_model.validate();
  }
  if (j.contains("coupling_model")) {
    for (const auto& p : j.at("coupling_model")) {
      CouplingPoint cp;
      cp.f_q_ghz =
          parse_quantity(p.at("f_q").get<std::string>(), Kind::kFrequencyGhz);
      cp.coupling_mhz_per_uv = parse_quantity(
          p.at("coupling").get<std::string>(), Kind::kCouplingMhzPerUv);
      d.coupling_model.push_back(cp);
    }
    std::sort(d.coupling_model.begin(), d.coupling_model.end(),
              [](const CouplingPoint& a, const CouplingPoint& b) {
                return a.f_q_ghz < b.f_q_ghz;
              });
  }
  if (j.contains("t1_model")) {
    d.t1_reference_s =
        parse_quantity(j.at("t1_model").at("reference_t1").get<std::string>(),
                       Kind::kTimeS);
    d.decoupling_reference_uv_per_mhz = parse_quantity(
        j.at("t1_model").at("reference_decoupling").get<std::string>(),
        Kind::kDecouplingUvPerMhz);
  }
  if (j.contains("visibility_mask")) {
    for (const auto& w : j.at("visibility_mask")) {
      d.blind_windows_ghz.emplace_back(
          parse_quantity(w.at("low").get<std::string>(), Kind::kFrequencyGhz),
          parse_quantity(w.at("high").get<std::string>(),
                         Kind::kFrequencyGhz));
    }
  }
  return d;
}

}  // namespace

const std::string& builtin_registry_json() {
  static const std::string text = kBuiltinRegistry;
  return text;
}

double DeviceRecord::coupling_at(double f_q_ghz) const {
  if (coupling_model.empty()) {
    throw std::runtime_error("DeviceRecord: no coupling model for " + name);
  }
  if (f_q_ghz <= coupling_model.front().f_q_ghz) {
    return coupling_model.front().coupling_mhz_per_uv;
  }
  if (f_q_ghz >= coupling_model.back().f_q_ghz) {
    return coupling_model.back().coupling_mhz_per_uv;
  }
  for (std::size_t i = 1; i < coupling_model.size(); ++i) {
    if (f_q_ghz <= coupling_model[i].f_q_ghz) {
      const auto& a = coupling_model[i - 1];
      const auto& b = coupling_model[i];
      const double w = (f_q_ghz - a.f_q_ghz) / (b.f_q_ghz - a.f_q_ghz);
      return a.coupling_mhz_per_uv +
             w * (b.coupling_mhz_per_uv - a.coupling_mhz_per_uv);
    }
  }
  return coupling_model.back().coupling_mhz_per_uv;
}

double DeviceRecord::decoupling_at(double f_q_ghz) const {
  return 1.0 / coupling_at(f_q_ghz);
}

double DeviceRecord::t1_at(double f_q_ghz) const {
  if (!(t1_reference_s > 0.0) || !(decoupling_reference_uv_per_mhz > 0.0)) {
    throw std::runtime_error("DeviceRecord: no T1 model for " + name);
  }
  const double ratio = decoupling_at(f_q_ghz) / decoupling_reference_uv_per_mhz;
  return t1_reference_s * ratio * ratio;
}

bool DeviceRecord::visible_at(double f_q_ghz) const {
  for (const auto& [lo, hi] : blind_windows_ghz) {
    if (f_q_ghz >= lo && f_q_ghz <= hi) return false;
  }
  return true;
}

Registry Registry::parse(const std::string& json_text) {
  Registry reg;
  const json j = json::parse(json_text);
  if (j.contains("psd_presets")) {
    for (const auto& [name, body] : j.at("psd_presets").items()) {
      reg.psd_presets[name] = parse_psd(body);
    }
  }
  if (j.contains("devices")) {
    for (const auto& [name, body] : j.at("devices").items()) {
      reg.devices[name] = parse_device(name, body);
    }
  }
  return reg;
}

Registry Registry::builtin() { return parse(builtin_registry_json()); }

Registry Registry::with_overrides(const std::string& path) {
  Registry reg = builtin();
  if (path.empty()) return reg;
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("registry: cannot open " + path);
  }
  std::stringstream buf;
  buf << in.rdbuf();
  Registry extra = parse(buf.str());
  for (auto& [name, dev] : extra.devices) reg.devices[name] = std::move(dev);
  for (auto& [name, psd] : extra.psd_presets) {
    reg.psd_presets[name] = std::move(psd);
  }
  return reg;
}

const DeviceRecord& Registry::device(const std::string& name) const {
  const auto it = devices.find(name);
  if (it == devices.end()) {
    throw std::invalid_argument("registry: unknown device '" + name + "'");
  }
  return it->second;
}

const NoisePsd& Registry::preset(const std::string& name) const {
  const auto it = psd_presets.find(name);
  if (it == psd_presets.end()) {
    throw std::invalid_argument("registry: unknown PSD preset '" + name + "'");
  }
  return it->second;
}

std::string Registry::list_text() const {
  std::ostringstream os;
  for (const auto& [name, dev] : devices) {
    os << name << "\n";
    for (const auto& [key, value] : dev.summary) {
      os << "  " << key << ": " << value << "\n";
    }
    os << "  derived g/2pi: "
       << format_quantity(coupling_g_mhz(dev.qubit, dev.resonator),
                          Kind::kFrequencyMhz)
       << "\n";
  }
  os << "psd presets:";
  for (const auto& [name, psd] : psd_presets) os << ' ' << name;
  os << "\n";
  return os.str();
}

}  // namespace vlab
