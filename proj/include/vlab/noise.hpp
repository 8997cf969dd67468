#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace vlab {

// Parametric gate-charge noise spectral density, in e^2/Hz:
//   S(f) = A / f^alpha                      for f <= soft_cutoff
//   S(f) = A * soft_cutoff^(2-alpha) / f^2  above it (continuous knee)
// plus an optional white floor. Frequencies below infrared_cutoff are out
// of the model's domain.
struct NoisePsd {
  double amplitude_1hz = 0.0;
  double exponent = 1.0;
  std::optional<double> soft_cutoff_hz;
  std::optional<double> white_floor;
  double infrared_cutoff_hz = 1.0;

  void validate() const;
};

struct NoiseTrace {
  std::vector<double> samples;  // delta n_g, units of e on the gate
  double dt_s = 0.0;
  std::uint64_t seed = 0;

  double duration_s() const { return dt_s * static_cast<double>(samples.size()); }
};

// Evaluate the PSD; throws below the infrared cutoff.
double psd_eval(const NoisePsd& psd, double f_hz);

// Exact integral of the PSD over [f_lo, f_hi] (clipped at the infrared
// cutoff), piecewise analytic across the knee. This is what synthesis
// assigns to each frequency bin, so band totals match the continuum.
double psd_band_power(const NoisePsd& psd, double f_lo_hz, double f_hi_hz);

// Band-limited time series with the target PSD: random-phase harmonic
// superposition on the FFT grid, amplitudes sqrt(S(f) df), deterministic
// per seed. The record is padded to a power of two; the synthesized band
// is [1/(N dt), 1/(2 dt)] intersected with [infrared_cutoff, inf).
NoiseTrace synth_trace(const NoisePsd& psd, double duration_s, double dt_s,
                       std::uint64_t seed);

// Variance the synthesis targets (sum of S(f_k) df over synthesized bins).
double synth_band_variance(const NoisePsd& psd, double duration_s, double dt_s);

// Sub-band quasistatic variance, integral of S over
// [infrared_cutoff, f_low). Used to reintroduce the slow noise a finite
// record cannot carry.
double quasistatic_variance(const NoisePsd& psd, double f_low_hz);

// Eq. of motion between S_Q at the qubit frequency and T1:
// S_Q = (e hbar / 2 E_c)^2 / T1, expressed in e^2/Hz with E_c as e_c_ghz.
double t1_to_sq(double e_c_ghz, double t1_s);
double sq_to_t1(double e_c_ghz, double sq_e2_per_hz);

inline constexpr double kDefaultBandMaxHz = 125e6;

// First-order Gaussian dephasing envelopes. sens1 is d f_q / d n_g in GHz
// per unit n_g. Free induction uses the sinc^2(pi f tau) filter, echo the
// sinc^2(pi f tau / 2) sin^2(pi f tau / 2) filter; both integrate the PSD
// from the infrared cutoff to band_max_hz.
double fid_envelope(const NoisePsd& psd, double sens1_ghz, double tau_s,
                    double band_max_hz = kDefaultBandMaxHz);
double echo_envelope(const NoisePsd& psd, double sens1_ghz, double tau_s,
                     double band_max_hz = kDefaultBandMaxHz);

// 1/e crossing of an envelope, by bisection on tau.
double fid_time_1e(const NoisePsd& psd, double sens1_ghz,
                   double band_max_hz = kDefaultBandMaxHz);
double echo_time_1e(const NoisePsd& psd, double sens1_ghz,
                    double band_max_hz = kDefaultBandMaxHz);

// Decay time in the convention used throughout the toolkit: the time
// constant of a least-squares exponential fit to the envelope, which is
// the 1/e point of the fitted curve even when the true envelope is not
// exponential.
double fid_time_fitted(const NoisePsd& psd, double sens1_ghz,
                       double band_max_hz = kDefaultBandMaxHz);
double echo_time_fitted(const NoisePsd& psd, double sens1_ghz,
                        double band_max_hz = kDefaultBandMaxHz);

// PSD amplitude that puts the FID 1/e time at the requested value
// (closed form: the Gaussian variance is linear in the amplitude).
double calibrate_amplitude_for_fid(const NoisePsd& psd_template,
                                   double sens1_ghz, double t2_star_s,
                                   double band_max_hz = kDefaultBandMaxHz);

enum class DephasingProtocol { kFreeInduction, kEcho };

struct DephasingCurve {
  std::vector<double> tau_s;
  std::vector<double> coherence;
};

// Monte Carlo phase-accumulation oracle: averages exp(i phi(tau)) over
// noise realizations with phi(tau) = 2 pi Int [sens1 dn + sens2 dn^2 / 2] dt
// (echo protocol flips the integrand sign at tau/2). Each realization is a
// band-limited trace plus a quasistatic Gaussian offset covering
// [infrared_cutoff, 1/record). Deterministic per seed; realizations are
// independent and averaged in fixed index order.
DephasingCurve mc_dephasing(const NoisePsd& psd, double sens1_ghz,
                            double sens2_ghz, const std::vector<double>& tau_s,
                            int n_realizations, std::uint64_t seed,
                            DephasingProtocol protocol =
                                DephasingProtocol::kFreeInduction,
                            double dt_s = 4e-9);

// Soft cutoff that makes the echo/FID 1/e-time ratio equal the input at
// the given T2* scale, by bisection on f_c in [1 kHz, 100 MHz]. The ratio
// is monotone decreasing in f_c; returns the upper bound when no cutoff is
// needed, throws when the requested ratio is unreachable.
double cutoff_from_ratio(double ratio, double t2_star_s,
                         const NoisePsd& psd_template,
                         double band_max_hz = kDefaultBandMaxHz);

}  // namespace vlab
