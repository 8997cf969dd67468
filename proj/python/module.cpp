#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vlab/analysis.hpp"
#include "vlab/dynamics.hpp"
#include "vlab/noise.hpp"
#include "vlab/pipeline.hpp"
#include "vlab/qubit.hpp"
#include "vlab/readout.hpp"
#include "vlab/registry.hpp"
#include "vlab/version.hpp"

namespace py = pybind11;

namespace {

vlab::NoisePsd psd_from_kwargs(double amplitude_1hz, double exponent,
                               std::optional<double> soft_cutoff_hz,
                               std::optional<double> white_floor,
                               double infrared_cutoff_hz) {
  vlab::NoisePsd psd;
  psd.amplitude_1hz = amplitude_1hz;
  psd.exponent = exponent;
  psd.soft_cutoff_hz = soft_cutoff_hz;
  psd.white_floor = white_floor;
  psd.infrared_cutoff_hz = infrared_cutoff_hz;
  psd.validate();
  return psd;
}

py::dict fit_to_dict(const vlab::FitResult& fit) {
  py::dict out;
  py::dict params, errors;
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    params[py::str(fit.names[i])] = fit.values[i];
    errors[py::str(fit.names[i])] = fit.std_errors[i];
  }
  out["params"] = params;
  out["std_errors"] = errors;
  out["converged"] = fit.converged;
  out["iterations"] = fit.iterations;
  out["residual_rms"] = fit.residual_rms;
  out["flags"] = fit.flags;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cooper-pair box virtual laboratory core";
  m.attr("__version__") = vlab::kVersion;

  py::class_<vlab::CpbParams>(m, "CpbParams")
      .def(py::init([](double e_c, double e_j_max, double c_g, double c_c,
                       double flux) {
             vlab::CpbParams p{e_c, e_j_max, c_g, c_c, flux};
             p.validate();
             return p;
           }),
           py::arg("e_c_ghz"), py::arg("e_j_max_ghz"), py::arg("c_g_af"),
           py::arg("c_c_af") = 0.0, py::arg("flux") = 0.0)
      .def_readwrite("e_c_ghz", &vlab::CpbParams::e_c_ghz)
      .def_readwrite("e_j_max_ghz", &vlab::CpbParams::e_j_max_ghz)
      .def_readwrite("c_g_af", &vlab::CpbParams::c_g_af)
      .def_readwrite("c_c_af", &vlab::CpbParams::c_c_af)
      .def_readwrite("flux", &vlab::CpbParams::flux)
      .def("c_sigma_af", &vlab::CpbParams::c_sigma_af);

  py::class_<vlab::ResonatorParams>(m, "ResonatorParams")
      .def(py::init([](double f_r, double ql, double qe, double qi, double c,
                       double l) {
             vlab::ResonatorParams r{f_r, ql, qe, qi, c, l};
             r.validate();
             return r;
           }),
           py::arg("f_r_ghz"), py::arg("q_loaded"), py::arg("q_external"),
           py::arg("q_internal"), py::arg("capacitance_ff") = 400.0,
           py::arg("inductance_nh") = 2.0)
      .def_readwrite("f_r_ghz", &vlab::ResonatorParams::f_r_ghz)
      .def_readwrite("q_loaded", &vlab::ResonatorParams::q_loaded)
      .def_readwrite("q_external", &vlab::ResonatorParams::q_external)
      .def_readwrite("q_internal", &vlab::ResonatorParams::q_internal);

  m.def("transition_frequency",
        py::overload_cast<double, double, double>(&vlab::transition_frequency),
        py::arg("e_c_ghz"), py::arg("e_j_ghz"), py::arg("n_g"));
  m.def(
      "ej_from_flux",
      [](const vlab::CpbParams& cpb) {
        const auto out = vlab::ej_from_flux(cpb);
        return py::make_tuple(out.e_j_ghz, out.below_charge_regime);
      },
      py::arg("cpb"));
  m.def("flux_for_ej", &vlab::flux_for_ej, py::arg("cpb"),
        py::arg("e_j_target_ghz"));
  m.def("cpb_diagonalize", &vlab::cpb_diagonalize, py::arg("cpb"),
        py::arg("n_g"), py::arg("n_charge_states") = 11);
  m.def("cpb_splitting", &vlab::cpb_splitting, py::arg("cpb"), py::arg("n_g"),
        py::arg("n_charge_states") = 11);
  m.def("coupling_g_mhz", &vlab::coupling_g_mhz, py::arg("cpb"),
        py::arg("res"));
  m.def(
      "dispersive_shift",
      [](double g_mhz, double detuning_mhz) {
        const auto out = vlab::dispersive_shift(g_mhz, detuning_mhz);
        return py::make_tuple(out.chi_mhz, out.dispersive_valid);
      },
      py::arg("g_mhz"), py::arg("detuning_mhz"));
  m.def("charge_matrix_element", &vlab::charge_matrix_element, py::arg("cpb"));
  m.def("sensitivity_first", &vlab::sensitivity_first, py::arg("cpb"),
        py::arg("n_g"));
  m.def("sensitivity_second", &vlab::sensitivity_second, py::arg("cpb"));

  m.def("psd_eval",
        [](double f_hz, double amplitude_1hz, double exponent,
           std::optional<double> soft_cutoff_hz,
           std::optional<double> white_floor, double infrared_cutoff_hz) {
          return vlab::psd_eval(
              psd_from_kwargs(amplitude_1hz, exponent, soft_cutoff_hz,
                              white_floor, infrared_cutoff_hz),
              f_hz);
        },
        py::arg("f_hz"), py::arg("amplitude_1hz"), py::arg("exponent") = 1.0,
        py::arg("soft_cutoff_hz") = std::nullopt,
        py::arg("white_floor") = std::nullopt,
        py::arg("infrared_cutoff_hz") = 1.0);
  m.def("t1_to_sq", &vlab::t1_to_sq, py::arg("e_c_ghz"), py::arg("t1_s"));
  m.def("sq_to_t1", &vlab::sq_to_t1, py::arg("e_c_ghz"), py::arg("sq"));
  m.def("synth_trace",
        [](double amplitude_1hz, double duration_s, double dt_s,
           std::uint64_t seed, double exponent,
           std::optional<double> soft_cutoff_hz) {
          const auto trace = vlab::synth_trace(
              psd_from_kwargs(amplitude_1hz, exponent, soft_cutoff_hz,
                              std::nullopt, 1.0),
              duration_s, dt_s, seed);
          return trace.samples;
        },
        py::arg("amplitude_1hz"), py::arg("duration_s"), py::arg("dt_s"),
        py::arg("seed"), py::arg("exponent") = 1.0,
        py::arg("soft_cutoff_hz") = std::nullopt);
  m.def("fid_envelope",
        [](double amplitude_1hz, double sens1_ghz, double tau_s,
           std::optional<double> soft_cutoff_hz, double infrared_cutoff_hz) {
          return vlab::fid_envelope(
              psd_from_kwargs(amplitude_1hz, 1.0, soft_cutoff_hz, std::nullopt,
                              infrared_cutoff_hz),
              sens1_ghz, tau_s);
        },
        py::arg("amplitude_1hz"), py::arg("sens1_ghz"), py::arg("tau_s"),
        py::arg("soft_cutoff_hz") = std::nullopt,
        py::arg("infrared_cutoff_hz") = 1.0);
  m.def("echo_envelope",
        [](double amplitude_1hz, double sens1_ghz, double tau_s,
           std::optional<double> soft_cutoff_hz, double infrared_cutoff_hz) {
          return vlab::echo_envelope(
              psd_from_kwargs(amplitude_1hz, 1.0, soft_cutoff_hz, std::nullopt,
                              infrared_cutoff_hz),
              sens1_ghz, tau_s);
        },
        py::arg("amplitude_1hz"), py::arg("sens1_ghz"), py::arg("tau_s"),
        py::arg("soft_cutoff_hz") = std::nullopt,
        py::arg("infrared_cutoff_hz") = 1.0);
  m.def("cutoff_from_ratio",
        [](double ratio, double t2_star_s) {
          vlab::NoisePsd psd;
          psd.exponent = 1.0;
          psd.amplitude_1hz = 1.0;
          return vlab::cutoff_from_ratio(ratio, t2_star_s, psd);
        },
        py::arg("ratio"), py::arg("t2_star_s"));

  m.def("s21", &vlab::s21, py::arg("res"), py::arg("chi_mhz"), py::arg("p_e"),
        py::arg("f_ghz"));
  m.def("linewidth_mhz", &vlab::linewidth_mhz, py::arg("res"));

  m.def("calibrate_pi_half_ns", &vlab::calibrate_pi_half_ns,
        py::arg("f_rabi_mhz"), py::arg("edge_ns") = 3.0,
        py::arg("dt_ns") = 0.25);

  m.def("fit_exp_decay",
        [](const std::vector<double>& t, const std::vector<double>& y) {
          return fit_to_dict(vlab::fit_exp_decay(t, y));
        },
        py::arg("t"), py::arg("y"));
  m.def("fit_damped_sinusoid",
        [](const std::vector<double>& t, const std::vector<double>& y) {
          return fit_to_dict(vlab::fit_damped_sinusoid(t, y));
        },
        py::arg("t"), py::arg("y"));
  m.def("fit_parabola_spectrum",
        [](const std::vector<double>& ng, const std::vector<double>& f) {
          return fit_to_dict(vlab::fit_parabola_spectrum(ng, f));
        },
        py::arg("n_g"), py::arg("f_ghz"));
  m.def("correlate", &vlab::correlate, py::arg("f_a"), py::arg("a"),
        py::arg("f_b"), py::arg("b"));

  m.def("defect_spectrum",
        [](double e_c_ghz,
           const std::vector<std::tuple<double, double, double>>& branches,
           double n_g) {
          vlab::DefectSpectrumModel model;
          model.e_c_ghz = e_c_ghz;
          for (const auto& [ej, offset, weight] : branches) {
            model.branches.push_back({ej, offset, weight});
          }
          std::vector<std::pair<double, double>> out;
          for (const auto& line : vlab::defect_spectrum(model, n_g)) {
            out.emplace_back(line.frequency_ghz, line.weight);
          }
          return out;
        },
        py::arg("e_c_ghz"), py::arg("branches"), py::arg("n_g"));
  m.def("mc_dephasing",
        [](double amplitude_1hz, double sens1_ghz, double sens2_ghz,
           const std::vector<double>& tau_s, int n_realizations,
           std::uint64_t seed, const std::string& protocol,
           std::optional<double> soft_cutoff_hz) {
          const vlab::NoisePsd psd = psd_from_kwargs(
              amplitude_1hz, 1.0, soft_cutoff_hz, std::nullopt, 1.0);
          const auto curve = vlab::mc_dephasing(
              psd, sens1_ghz, sens2_ghz, tau_s, n_realizations, seed,
              protocol == "echo" ? vlab::DephasingProtocol::kEcho
                                 : vlab::DephasingProtocol::kFreeInduction);
          return curve.coherence;
        },
        py::arg("amplitude_1hz"), py::arg("sens1_ghz"), py::arg("sens2_ghz"),
        py::arg("tau_s"), py::arg("n_realizations"), py::arg("seed"),
        py::arg("protocol") = "fid",
        py::arg("soft_cutoff_hz") = std::nullopt);
  m.def("rabi_coupling",
        [](const std::vector<double>& amps, const std::vector<double>& freqs) {
          const auto rc = vlab::rabi_coupling(amps, freqs);
          py::dict out;
          out["coupling_mhz_per_uv"] = rc.coupling_mhz_per_uv;
          out["decoupling_uv_per_mhz"] = rc.decoupling_uv_per_mhz;
          out["r_squared"] = rc.r_squared;
          out["flags"] = rc.flags;
          return out;
        },
        py::arg("amplitude_uv"), py::arg("f_rabi_mhz"));
  m.def("linewidth_t2",
        [](const std::vector<double>& f, const std::vector<double>& pe) {
          return fit_to_dict(vlab::linewidth_t2(f, pe));
        },
        py::arg("f_mhz"), py::arg("p_e"));

  m.def("registry_list", []() {
    return vlab::Registry::builtin().list_text();
  });
  m.def("sweep_experiment",
        [](const std::string& config_json, int n_threads) {
          const vlab::Registry reg = vlab::Registry::builtin();
          const auto out = vlab::sweep_experiment(
              reg, vlab::Json::parse(config_json), n_threads);
          py::dict result;
          result["record"] = out.record.dump(2);
          result["table_csv"] = out.table_csv;
          return result;
        },
        py::arg("config_json"), py::arg("n_threads") = 1);
  m.def("run_experiment",
        [](const std::string& config_json) {
          const vlab::Registry reg = vlab::Registry::builtin();
          const auto out =
              vlab::run_experiment(reg, vlab::Json::parse(config_json));
          py::dict result;
          result["record"] = out.record.dump(2);
          result["data_csv"] = out.data_csv;
          result["fit"] = fit_to_dict(out.fit);
          return result;
        },
        py::arg("config_json"));
}
