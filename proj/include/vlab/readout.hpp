#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vlab/qubit.hpp"

namespace vlab {

// Heterodyne chain configuration. Defaults give 10 samples per IF cycle
// and exactly one IF cycle per bin, so binning is phase-unbiased.
struct ReadoutConfig {
  double probe_freq_ghz = 0.0;    // probe tone; S21 is evaluated here
  double if_freq_mhz = 2.0;       // intermediate frequency after mixing
  double sample_rate_msps = 20.0;
  double bin_ns = 500.0;
  double noise_sigma = 0.0;       // additive white noise per sample, a.u.
  std::uint64_t seed = 0;

  double dt_s() const { return 1e-6 / sample_rate_msps; }
  int samples_per_bin() const;
  void validate() const;
};

struct IqTrace {
  std::vector<std::complex<double>> signal;
  std::vector<std::complex<double>> reference;
  double sample_rate_msps = 20.0;
  double t0_s = 0.0;

  void validate() const;  // equal lengths, finite values
};

// Side-coupled notch transmission with the resonator pulled by the
// qubit-state-dependent dispersive shift:
//   S21(f) = 1 - (Q_L/Q_e) / (1 + 2 i Q_L (f - f_r') / f_r')
// evaluated at f_r' = f_r + chi <sigma_z>. A mixed state is the P_e-weighted
// average of the two pure-state responses.
std::complex<double> s21(const ResonatorParams& res, double chi_mhz,
                         double p_e, double f_ghz);

// kappa = f_r / Q_L in MHz.
double linewidth_mhz(const ResonatorParams& res);

// Heterodyne record for a qubit-population timeline sampled at the ADC
// rate: signal = S21(P_e(t)) * exp(2 pi i f_IF t) + noise, reference = the
// bare IF phasor. Deterministic per cfg.seed.
IqTrace synth_heterodyne(std::span<const double> pe_per_sample,
                         const ResonatorParams& res, double chi_mhz,
                         const ReadoutConfig& cfg);

struct DemodResult {
  std::vector<double> t_s;        // bin centers
  std::vector<double> amplitude;
  std::vector<double> phase_rad;
  std::vector<std::complex<double>> bins;  // complex bin means
  bool partial_bin_discarded = false;
};

// Software demodulation: per bin, the mean of signal * conj(reference
// phasor). Phase is relative to the reference so common-path drift
// cancels. A trailing partial bin is discarded and flagged.
DemodResult demodulate(const IqTrace& trace, const ReadoutConfig& cfg);

// Calibrated map between complex bin values and excited-state population,
// built from the two pure-state responses. The complex-plane projection is
// exact for noiseless data; the phase-only variant interpolates between
// the two pure-state phases.
struct PhaseToPeMap {
  std::complex<double> s_ground;
  std::complex<double> s_excited;

  double pe_from_bin(std::complex<double> v) const;
  double pe_from_phase(double phase_rad) const;
};
PhaseToPeMap make_pe_map(const ResonatorParams& res, double chi_mhz,
                         double f_probe_ghz);

// CSV round trip: (t, I_sig, Q_sig, I_ref, Q_ref) rows.
std::string iq_trace_to_csv(const IqTrace& trace);
IqTrace iq_trace_from_csv(const std::string& csv);
std::string demod_to_csv(const DemodResult& demod);

}  // namespace vlab
