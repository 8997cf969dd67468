#include "vlab/units.hpp"

#include <cctype>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace vlab {

namespace {

struct UnitTable {
  std::map<std::string, double> to_canonical;
  std::string canonical_name;
};

const UnitTable& table_for(Kind kind) {
  static const UnitTable freq_ghz{
      {{"Hz", 1e-9}, {"kHz", 1e-6}, {"MHz", 1e-3}, {"GHz", 1.0}}, "GHz"};
  static const UnitTable freq_mhz{
      {{"Hz", 1e-6}, {"kHz", 1e-3}, {"MHz", 1.0}, {"GHz", 1e3}}, "MHz"};
  static const UnitTable freq_hz{
      {{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}}, "Hz"};
  static const UnitTable cap_af{
      {{"aF", 1.0}, {"fF", 1e3}, {"pF", 1e6}}, "aF"};
  static const UnitTable cap_ff{
      {{"aF", 1e-3}, {"fF", 1.0}, {"pF", 1e3}}, "fF"};
  static const UnitTable ind_nh{
      {{"pH", 1e-3}, {"nH", 1.0}, {"uH", 1e3}}, "nH"};
  static const UnitTable time_s{
      {{"ns", 1e-9}, {"us", 1e-6}, {"ms", 1e-3}, {"s", 1.0}}, "s"};
  static const UnitTable time_ns{
      {{"ns", 1.0}, {"us", 1e3}, {"ms", 1e6}, {"s", 1e9}}, "ns"};
  static const UnitTable volt_uv{
      {{"uV", 1.0}, {"mV", 1e3}, {"V", 1e6}}, "uV"};
  static const UnitTable psd{{{"e^2/Hz", 1.0}}, "e^2/Hz"};
  static const UnitTable coupling{{{"MHz/uV", 1.0}}, "MHz/uV"};
  static const UnitTable decoupling{{{"uV/MHz", 1.0}}, "uV/MHz"};
  switch (kind) {
    case Kind::kFrequencyGhz: return freq_ghz;
    case Kind::kFrequencyMhz: return freq_mhz;
    case Kind::kFrequencyHz: return freq_hz;
    case Kind::kCapacitanceAf: return cap_af;
    case Kind::kCapacitanceFf: return cap_ff;
    case Kind::kInductanceNh: return ind_nh;
    case Kind::kTimeS: return time_s;
    case Kind::kTimeNs: return time_ns;
    case Kind::kVoltageUv: return volt_uv;
    case Kind::kPsdE2PerHz: return psd;
    case Kind::kCouplingMhzPerUv: return coupling;
    case Kind::kDecouplingUvPerMhz: return decoupling;
    case Kind::kDimensionless:
      throw std::logic_error("no unit table for dimensionless");
  }
  throw std::logic_error("unknown unit kind");
}

}  // namespace

double parse_quantity(const std::string& text, Kind kind) {
  std::istringstream is(text);
  double value = 0.0;
  if (!(is >> value)) {
    throw std::invalid_argument("unit parse: no numeric value in '" + text +
                                "'");
  }
  std::string unit;
  is >> unit;
  std::string rest;
  if (is >> rest) {
    throw std::invalid_argument("unit parse: trailing content in '" + text +
                                "'");
  }
  if (kind == Kind::kDimensionless) {
    if (!unit.empty()) {
      throw std::invalid_argument("unit parse: '" + text +
                                  "' must be a bare number");
    }
    return value;
  }
  if (unit.empty()) {
    throw std::invalid_argument("unit parse: '" + text +
                                "' lacks a unit; bare numbers are rejected");
  }
  const auto& table = table_for(kind);
  const auto it = table.to_canonical.find(unit);
  if (it == table.to_canonical.end()) {
    throw std::invalid_argument("unit parse: unit '" + unit +
                                "' not valid here (expected " +
                                table.canonical_name + ")");
  }
  return value * it->second;
}

std::string format_quantity(double value, Kind kind) {
  std::ostringstream os;
  os.precision(12);
  if (kind == Kind::kDimensionless) {
    os << value;
    return os.str();
  }
  os << value << ' ' << table_for(kind).canonical_name;
  return os.str();
}

}  // namespace vlab
