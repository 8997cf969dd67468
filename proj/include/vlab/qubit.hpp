#pragma once

#include <vector>

namespace vlab {

// Cooper-pair box parameters. Energies are stored as frequencies (E/h in
// GHz); capacitances in aF; flux as the dimensionless bias Phi/Phi0. The
// total island capacitance is derived from e_c, never stored, so the two
// can not disagree.
struct CpbParams {
  double e_c_ghz = 0.0;      // charging energy E_c/h
  double e_j_max_ghz = 0.0;  // Josephson energy at zero flux, E_J,max/h
  double c_g_af = 0.0;       // gate capacitance
  double c_c_af = 0.0;       // coupling capacitance to the resonator
  double flux = 0.0;         // Phi/Phi0

  // e^2 / (2 h e_c), in aF.
  double c_sigma_af() const;
  // Throws std::invalid_argument when out of domain.
  void validate() const;
};

struct ResonatorParams {
  double f_r_ghz = 0.0;  // omega_r / 2pi
  double q_loaded = 0.0;
  double q_external = 0.0;
  double q_internal = 0.0;
  double capacitance_ff = 0.0;
  double inductance_nh = 0.0;

  // Checks positivity and 1/Q_L = 1/Q_e + 1/Q_i within 5 % relative.
  void validate() const;
};

// Phenomenological multi-parabola spectrum: independent transition branches
// sharing e_c, each with its own Josephson energy and gate-charge offset.
struct DefectBranch {
  double e_j_ghz = 0.0;
  double charge_offset = 0.0;      // shift of n_g seen by this branch
  double visibility_weight = 1.0;  // in [0, 1]
};

struct DefectSpectrumModel {
  double e_c_ghz = 0.0;
  std::vector<DefectBranch> branches;

  void validate() const;  // 1..8 branches, weights in [0, 1]
};

// Ground to first excited state transition frequency,
// sqrt([4 e_c (1 - n_g)]^2 + e_j^2), in GHz. Even about n_g = 1 with
// global minimum e_j at the sweet spot.
double transition_frequency(double e_c_ghz, double e_j_ghz, double n_g);
double transition_frequency(const CpbParams& cpb, double n_g);

// Flux-tuned Josephson energy, e_j_max |cos(pi flux)| (symmetric SQUID).
// The flag marks the regime where the two-level charge model degrades.
struct TunedEj {
  double e_j_ghz = 0.0;
  bool below_charge_regime = false;  // set when e_j < 0.1 GHz
};
TunedEj ej_from_flux(const CpbParams& cpb);

// Inverse of ej_from_flux on the principal branch, flux in [0, 0.5].
double flux_for_ej(const CpbParams& cpb, double e_j_target_ghz);

// Eigenfrequencies (GHz, ascending) of the truncated charge-basis
// Hamiltonian: diagonal 4 e_c (n - n_g/2)^2, off-diagonal -e_j/2, with n
// running over the n_charge_states integers centered on zero. Serves as
// the exact oracle for the two-level formula. n_charge_states must be odd
// and >= 5.
std::vector<double> cpb_diagonalize(const CpbParams& cpb, double n_g,
                                    int n_charge_states);
double cpb_splitting(const CpbParams& cpb, double n_g, int n_charge_states);

// Qubit-resonator coupling g/2pi in MHz from
// hbar g = (2 E_c C_c / e) sqrt(hbar omega_r / 2C).
double coupling_g_mhz(const CpbParams& cpb, const ResonatorParams& res);

// chi = g^2 / Delta, sign following Delta. Throws on Delta = 0; the flag
// records whether |Delta| > 10 g (dispersive validity).
struct DispersiveShift {
  double chi_mhz = 0.0;
  bool dispersive_valid = true;
};
DispersiveShift dispersive_shift(double g_mhz, double detuning_mhz);

// Sweet-spot charge matrix element 2 C_g E_c / e, in units of e.
double charge_matrix_element(const CpbParams& cpb);

// d f_q / d n_g = (4 e_c)^2 (n_g - 1) / f_q, GHz per unit n_g.
double sensitivity_first(const CpbParams& cpb, double n_g);
// d^2 f_q / d n_g^2 at the sweet spot, (4 e_c)^2 / f_q, GHz per n_g^2.
double sensitivity_second(const CpbParams& cpb);

struct BranchLine {
  double frequency_ghz = 0.0;
  double weight = 1.0;
};
// One transition line per branch at the given gate charge.
std::vector<BranchLine> defect_spectrum(const DefectSpectrumModel& model,
                                        double n_g);

}  // namespace vlab
