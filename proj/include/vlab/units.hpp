#pragma once

#include <string>

namespace vlab {

// Parses "6.24 GHz", "4.5 aF", "61 us", ... into the canonical unit of the
// requested kind. Bare numbers are rejected for dimensioned quantities;
// Kind::kDimensionless rejects anything but a bare number.
enum class Kind {
  kFrequencyGhz,     // canonical GHz; accepts Hz, kHz, MHz, GHz
  kFrequencyMhz,     // canonical MHz
  kFrequencyHz,      // canonical Hz
  kCapacitanceAf,    // canonical aF; accepts aF, fF, pF
  kCapacitanceFf,    // canonical fF
  kInductanceNh,     // canonical nH; accepts pH, nH, uH
  kTimeS,            // canonical s; accepts ns, us, ms, s
  kTimeNs,           // canonical ns
  kVoltageUv,        // canonical uV; accepts uV, mV, V
  kPsdE2PerHz,       // canonical e^2/Hz
  kCouplingMhzPerUv, // canonical MHz/uV
  kDecouplingUvPerMhz,
  kDimensionless,
};

double parse_quantity(const std::string& text, Kind kind);

// Formats a canonical value back with its unit, for registry listings.
std::string format_quantity(double value, Kind kind);

}  // namespace vlab
