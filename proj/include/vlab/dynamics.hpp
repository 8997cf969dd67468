#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vlab/noise.hpp"
#include "vlab/qubit.hpp"

namespace vlab {

// One shaped microwave pulse segment. Delays are zero-amplitude segments.
// rabi_amplitude is the on-resonance rotation rate the plateau drives, in
// MHz; detuning is pump minus qubit frequency. The envelope edges are
// error-function ramps of width edge_ns centered on the segment
// boundaries, so the integrated rotation angle of a plateau equals
// amplitude * duration exactly.
struct PulseSegment {
  double duration_ns = 0.0;
  double rabi_mhz = 0.0;
  double phase_rad = 0.0;
  double detuning_mhz = 0.0;
  double edge_ns = 3.0;
};

struct PulseSequence {
  std::vector<PulseSegment> segments;
  double repetition_delay_ms = 1.0;

  double total_duration_ns() const;
  void validate() const;

  // Checks repetition_delay >= 5 T1; used by averaged experiments.
  bool repetition_delay_sufficient(double t1_s) const;
};

struct BlochState {
  double x = 0.0;
  double y = 0.0;
  double z = 1.0;  // +1 is the ground state; P_e = (1 - z) / 2

  double norm() const;
  double p_excited() const { return 0.5 * (1.0 - z); }
};

// Stochastic-dephasing configuration for an evolution or experiment:
// charge-noise PSD plus the first- and second-order transition-frequency
// sensitivities (GHz per n_g and GHz per n_g^2).
struct NoiseCoupling {
  NoisePsd psd;
  double sens1_ghz = 0.0;
  double sens2_ghz = 0.0;
};

struct Trajectory {
  std::vector<double> t_ns;
  std::vector<BlochState> states;
};

// Rotating-frame Bloch evolution under the sequence with longitudinal rate
// 1/T1, transverse rate 1/(2 T1), and instantaneous stochastic detuning
// 2 pi (sens1 dn + sens2 dn^2 / 2) from the supplied trace. Fixed-step
// RK4; requires dt <= 1 ns and dt <= edge/3 for shaped segments. Fully
// deterministic given its inputs.
Trajectory evolve(const PulseSequence& seq, double t1_s,
                  const NoiseTrace* noise, double sens1_ghz, double sens2_ghz,
                  double dt_ns, BlochState initial = BlochState{});

// Drive duration that rotates the ground state by pi/2 at the given Rabi
// amplitude, solved on the simulated dynamics (bisection on z = 0).
double calibrate_pi_half_ns(double f_rabi_mhz, double edge_ns = 3.0,
                            double dt_ns = 0.25);

struct PeTable {
  std::vector<double> x;    // duration ns, delay ns, or time us by context
  std::vector<double> p_e;
};

struct RabiConfig {
  double drive_amplitude_uv = 0.0;
  double coupling_mhz_per_uv = 0.0;  // amplitude-to-Rabi conversion under test
  std::vector<double> durations_ns;
  double t1_s = 0.0;  // <= 0 means no relaxation
  std::optional<NoiseCoupling> noise;
  int n_realizations = 64;
  std::uint64_t seed = 1;
  double dt_ns = 0.25;
  double edge_ns = 3.0;
};
// P_e versus pulse duration.
PeTable rabi_experiment(const RabiConfig& cfg);

struct RamseyConfig {
  double f_rabi_mhz = 9.6;      // sets the pi/2 pulse length
  double detuning_mhz = 10.6;   // pump minus qubit frequency
  std::vector<double> taus_ns;  // delay between the two pi/2 pulses
  double t1_s = 0.0;
  std::optional<NoiseCoupling> noise;
  int n_realizations = 256;
  std::uint64_t seed = 1;
  double dt_ns = 0.25;
  double edge_ns = 3.0;
};
PeTable ramsey_experiment(const RamseyConfig& cfg);

struct EchoConfig {
  double f_rabi_mhz = 9.6;
  std::vector<double> taus_ns;  // total free-evolution time
  double t1_s = 0.0;
  std::optional<NoiseCoupling> noise;
  int n_realizations = 256;
  std::uint64_t seed = 1;
  double dt_ns = 0.25;
  double edge_ns = 3.0;
};
// pi/2 - tau/2 - pi (90 deg out of phase) - tau/2 - (-pi/2).
PeTable echo_experiment(const EchoConfig& cfg);

struct T1Config {
  double t1_s = 0.0;
  double window_s = 0.0;
  double dt_s = 0.5e-6;
};
// Saturation recovery: P_e(0) = 1/2, P_e(t) = exp(-t/T1) / 2.
PeTable t1_experiment(const T1Config& cfg);

struct CwConfig {
  std::vector<double> n_g;
  std::vector<double> f_pump_ghz;
  double f_rabi_mhz = 0.1;  // drive-induced rotation rate
  double t1_s = 0.0;
  double t2_s = 0.0;
};
struct CwMap {
  std::vector<double> n_g;
  std::vector<double> f_pump_ghz;
  std::vector<std::vector<double>> p_e;  // [n_g index][f index]
};
// Steady-state saturation line shape, one weighted term per branch.
CwMap cw_spectroscopy(const DefectSpectrumModel& model, const CwConfig& cfg);
CwMap cw_spectroscopy(const CpbParams& cpb, const CwConfig& cfg);

}  // namespace vlab
