#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vlab/noise.hpp"

namespace vlab {

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<double> std_errors;
  double residual_rms = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<std::string> flags;

  double value(const std::string& name) const;
  double std_error(const std::string& name) const;
  bool has_flag(const std::string& flag) const;
};

// All fitters are deterministic Levenberg-Marquardt with analytic
// Jacobians and fixed initialization rules; identical data yields
// bit-identical results.

// A exp(-t/tau) + c. Initialized from a log-linear pre-fit. Constant data
// converges with amplitude ~ 0 and the flag "tau_unidentifiable".
FitResult fit_exp_decay(const std::vector<double>& t,
                        const std::vector<double>& y);

// A exp(-t/tau) cos(2 pi f t + phi) + c. Frequency initialized from the
// periodogram peak; flags "no_spectral_peak" when none stands out.
FitResult fit_damped_sinusoid(const std::vector<double>& t,
                              const std::vector<double>& y);

// f(n_g) = sqrt([4 e_c (1 - n_g)]^2 + e_j^2). Flags "e_c_unidentifiable"
// when the points have no gate-charge spread.
FitResult fit_parabola_spectrum(const std::vector<double>& n_g,
                                const std::vector<double>& f_ghz);

// Zero-intercept linear fit of Rabi frequency versus drive amplitude;
// decoupling is the reciprocal slope. Flags "non_monotone" when the
// frequencies do not increase with amplitude.
struct RabiCouplingResult {
  double coupling_mhz_per_uv = 0.0;
  double decoupling_uv_per_mhz = 0.0;
  double r_squared = 0.0;
  std::vector<std::string> flags;
};
RabiCouplingResult rabi_coupling(const std::vector<double>& amplitude_uv,
                                 const std::vector<double>& f_rabi_mhz);

// Lorentzian line fit; T2 = 1/(2 pi HWHM). Saturation-broadened lines are
// flagged with a broadening estimate and a corrected T2.
FitResult linewidth_t2(const std::vector<double>& f_mhz,
                       const std::vector<double>& p_e);

struct NoiseBoundsInput {
  double t1_s = 0.0;
  double t2_star_s = 0.0;
  double e_c_ghz = 0.0;
  double sens2_ghz = 0.0;  // second-order sensitivity at the sweet spot
  std::uint64_t seed = 20260808;
  int n_realizations = 2000;
};
struct NoiseBounds {
  double sq_high_e2_per_hz = 0.0;  // at the qubit frequency, from T1
  double sq_1hz_e2_per_hz = 0.0;   // from the sweet-spot dephasing time
};
// High-frequency bound from the T1 relation; 1 Hz amplitude by bisecting
// the PSD amplitude until the Monte Carlo sweet-spot FID 1/e time matches
// t2_star.
NoiseBounds noise_bounds(const NoiseBoundsInput& in);

// Spearman rank correlation of two series joined on their abscissas
// (nearest neighbor within 100 MHz). Throws when fewer than 4 points join.
double correlate(const std::vector<double>& f_a, const std::vector<double>& a,
                 const std::vector<double>& f_b, const std::vector<double>& b);

}  // namespace vlab
