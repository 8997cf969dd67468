#include "vlab/qubit.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "vlab/constants.hpp"

namespace vlab {

double CpbParams::c_sigma_af() const {
  return kElementaryCharge * kElementaryCharge /
         (2.0 * kPlanck * e_c_ghz * kGhz) / kAttofarad;
}

void CpbParams::validate() const {
  if (!(e_c_ghz > 0.0)) throw std::invalid_argument("CpbParams: e_c must be > 0");
  if (!(e_j_max_ghz > 0.0))
    throw std::invalid_argument("CpbParams: e_j_max must be > 0");
  if (!(c_g_af > 0.0)) throw std::invalid_argument("CpbParams: c_g must be > 0");
  if (c_c_af < 0.0) throw std::invalid_argument("CpbParams: c_c must be >= 0");
  if (c_sigma_af() < c_g_af) {
    throw std::invalid_argument(
        "CpbParams: derived C_sigma smaller than C_g; e_c and c_g inconsistent");
  }
}

void ResonatorParams::validate() const {
  if (!(f_r_ghz > 0.0))
    throw std::invalid_argument("ResonatorParams: f_r must be > 0");
  if (!(q_loaded > 0.0) || !(q_external > 0.0) || !(q_internal > 0.0)) {
    throw std::invalid_argument("ResonatorParams: all Q factors must be > 0");
  }
  const double q_from_parts = 1.0 / (1.0 / q_external + 1.0 / q_internal);
  if (std::abs(q_from_parts - q_loaded) > 0.05 * q_loaded) {
    throw std::invalid_argument(
        "ResonatorParams: 1/Q_L != 1/Q_e + 1/Q_i within 5%");
  }
}

void DefectSpectrumModel::validate() const {
  if (branches.empty() || branches.size() > 8) {
    throw std::invalid_argument("DefectSpectrumModel: need 1 to 8 branches");
  }
  if (!(e_c_ghz > 0.0))
    throw std::invalid_argument("DefectSpectrumModel: e_c must be > 0");
  for (const auto& b : branches) {
    if (!(b.e_j_ghz > 0.0))
      throw std::invalid_argument("DefectSpectrumModel: branch e_j must be > 0");
    if (b.visibility_weight < 0.0 || b.visibility_weight > 1.0) {
      throw std::invalid_argument(
          "DefectSpectrumModel: weights must lie in [0, 1]");
    }
  }
}

double transition_frequency(double e_c_ghz, double e_j_ghz, double n_g) {
  return std::hypot(4.0 * e_c_ghz * (1.0 - n_g), e_j_ghz);
}

double transition_frequency(const CpbParams& cpb, double n_g) {
  return transition_frequency(cpb.e_c_ghz, ej_from_flux(cpb).e_j_ghz, n_g);
}

TunedEj ej_from_flux(const CpbParams& cpb) {
  TunedEj out;
  out.e_j_ghz = cpb.e_j_max_ghz * std::abs(std::cos(kPi * cpb.flux));
  out.below_charge_regime = out.e_j_ghz < 0.1;
  return out;
}

double flux_for_ej(const CpbParams& cpb, double e_j_target_ghz) {
  if (e_j_target_ghz < 0.0 || e_j_target_ghz > cpb.e_j_max_ghz) {
    throw std::invalid_argument("flux_for_ej: target outside [0, e_j_max]");
  }
  return std::acos(e_j_target_ghz / cpb.e_j_max_ghz) / kPi;
}

std::vector<double> cpb_diagonalize(const CpbParams& cpb, double n_g,
                                    int n_charge_states) {
  if (n_charge_states < 5 || n_charge_states % 2 == 0) {
    throw std::invalid_argument(
        "cpb_diagonalize: n_charge_states must be odd and >= 5");
  }
  const double e_j = ej_from_flux(cpb).e_j_ghz;
  const int half = n_charge_states / 2;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n_charge_states, n_charge_states);
  for (int i = 0; i < n_charge_states; ++i) {
    const double n = static_cast<double>(i - half);
    h(i, i) = 4.0 * cpb.e_c_ghz * (n - n_g / 2.0) * (n - n_g / 2.0);
    if (i + 1 < n_charge_states) {
      h(i, i + 1) = -e_j / 2.0;
      h(i + 1, i) = -e_j / 2.0;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  const auto& ev = solver.eigenvalues();
  return std::vector<double>(ev.data(), ev.data() + ev.size());
}

double cpb_splitting(const CpbParams& cpb, double n_g, int n_charge_states) {
  const auto levels = cpb_diagonalize(cpb, n_g, n_charge_states);
  return levels[1] - levels[0];
}

double coupling_g_mhz(const CpbParams& cpb, const ResonatorParams& res) {
  if (!(res.capacitance_ff > 0.0)) {
    throw std::invalid_argument("coupling_g: resonator capacitance must be > 0");
  }
  const double e_c_joule = kPlanck * cpb.e_c_ghz * kGhz;
  const double c_c = cpb.c_c_af * kAttofarad;
  const double c_res = res.capacitance_ff * kFemtofarad;
  const double omega_r = 2.0 * kPi * res.f_r_ghz * kGhz;
  const double hbar_g = (2.0 * e_c_joule * c_c / kElementaryCharge) *
                        std::sqrt(kHbar * omega_r / (2.0 * c_res));
  return hbar_g / kPlanck / kMhz;
}

DispersiveShift dispersive_shift(double g_mhz, double detuning_mhz) {
  if (detuning_mhz == 0.0) {
    throw std::invalid_argument("dispersive_shift: zero detuning diverges");
  }
  DispersiveShift out;
  out.chi_mhz = g_mhz * g_mhz / detuning_mhz;
  out.dispersive_valid = std::abs(detuning_mhz) > 10.0 * std::abs(g_mhz);
  return out;
}

double charge_matrix_element(const CpbParams& cpb) {
  const double e_c_joule = kPlanck * cpb.e_c_ghz * kGhz;
  const double c_g = cpb.c_g_af * kAttofarad;
  return 2.0 * c_g * e_c_joule / (kElementaryCharge * kElementaryCharge);
}

double sensitivity_first(const CpbParams& cpb, double n_g) {
  const double e_j = ej_from_flux(cpb).e_j_ghz;
  const double f_q = transition_frequency(cpb.e_c_ghz, e_j, n_g);
  const double four_ec = 4.0 * cpb.e_c_ghz;
  return four_ec * four_ec * (n_g - 1.0) / f_q;
}

double sensitivity_second(const CpbParams& cpb) {
  const double e_j = ej_from_flux(cpb).e_j_ghz;
  const double four_ec = 4.0 * cpb.e_c_ghz;
  return four_ec * four_ec / e_j;
}

std::vector<BranchLine> defect_spectrum(const DefectSpectrumModel& model,
                                        double n_g) {
  model.validate();
  std::vector<BranchLine> lines;
  lines.reserve(model.branches.size());
  for (const auto& b : model.branches) {
    lines.push_back(
        {transition_frequency(model.e_c_ghz, b.e_j_ghz, n_g + b.charge_offset),
         b.visibility_weight});
  }
  return lines;
}

}  // namespace vlab
