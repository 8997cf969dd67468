#include <doctest.h>

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "vlab/analysis.hpp"
#include "vlab/constants.hpp"
#include "vlab/dynamics.hpp"
#include "vlab/noise.hpp"

using namespace vlab;

namespace {

PulseSegment drive(double duration_ns, double rabi_mhz, double phase = 0.0,
                   double detuning_mhz = 0.0, double edge_ns = 0.0) {
  PulseSegment s;
  s.duration_ns = duration_ns;
  s.rabi_mhz = rabi_mhz;
  s.phase_rad = phase;
  s.detuning_mhz = detuning_mhz;
  s.edge_ns = edge_ns;
  return s;
}

PulseSegment delay(double duration_ns) {
  PulseSegment s;
  s.duration_ns = duration_ns;
  s.edge_ns = 0.0;
  return s;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
  return out;
}

}  // namespace

TEST_CASE("resonant pi pulse flips the ground state") {
  // Flat drive at 10 MHz for half a Rabi period; the boundary-centered
  // edges keep the pulse area at amplitude times duration exactly.
  PulseSequence seq;
  seq.segments = {delay(15.0), drive(50.0, 10.0, 0.0, 0.0, 3.0), delay(15.0)};
  const auto traj = evolve(seq, 0.0, nullptr, 0.0, 0.0, 0.25);
  CHECK(std::abs(traj.states.back().z + 1.0) < 1e-3);
  CHECK(traj.states.back().p_excited() == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("pure relaxation follows the closed form") {
  PulseSequence seq;
  seq.segments = {delay(5000.0)};
  BlochState excited;
  excited.z = -1.0;
  const double t1 = 10e-6;
  const auto traj = evolve(seq, t1, nullptr, 0.0, 0.0, 0.5, excited);
  for (std::size_t i = 0; i < traj.t_ns.size(); i += 400) {
    const double expected = 1.0 - 2.0 * std::exp(-traj.t_ns[i] * 1e-9 / t1);
    CHECK(std::abs(traj.states[i].z - expected) < 1e-4);
  }
}

TEST_CASE("Bloch norm is conserved without dissipation") {
  SUBCASE("continuous drive over 10 us") {
    PulseSequence seq;
    seq.segments = {delay(15.0), drive(10000.0, 2.0, 0.0, 0.0, 3.0),
                    delay(15.0)};
    const auto traj = evolve(seq, 0.0, nullptr, 0.0, 0.0, 0.25);
    for (const auto& s : traj.states) {
      CHECK(std::abs(s.norm() - 1.0) < 1e-9);
    }
  }

  SUBCASE("pulse sequence with long free evolution") {
    PulseSequence seq;
    seq.segments = {delay(20.0), drive(26.0, 9.6, 0.0, 0.0, 3.0),
                    delay(9900.0), drive(26.0, 9.6, 0.0, 0.0, 3.0),
                    delay(20.0)};
    const auto traj = evolve(seq, 0.0, nullptr, 0.0, 0.0, 0.25);
    for (const auto& s : traj.states) {
      CHECK(std::abs(s.norm() - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("halving the step changes populations below 1e-4") {
  PulseSequence seq;
  seq.segments = {delay(20.0), drive(26.0, 9.6, 0.0, 10.6, 3.0), delay(400.0),
                  drive(26.0, 9.6, 0.0, 10.6, 3.0), delay(20.0)};
  const auto coarse = evolve(seq, 50e-6, nullptr, 0.0, 0.0, 0.5);
  const auto fine = evolve(seq, 50e-6, nullptr, 0.0, 0.0, 0.25);
  CHECK(std::abs(coarse.states.back().p_excited() -
                 fine.states.back().p_excited()) < 1e-4);
}

TEST_CASE("step-size preconditions") {
  PulseSequence seq;
  seq.segments = {drive(26.0, 9.6, 0.0, 0.0, 2.4)};
  CHECK_THROWS_AS(evolve(seq, 0.0, nullptr, 0.0, 0.0, 1.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(evolve(seq, 0.0, nullptr, 0.0, 0.0, 1.0 + 1e-9),
                  std::invalid_argument);
  // dt must also resolve the shaped edge (here edge/3 = 0.8 ns).
  CHECK_THROWS_AS(evolve(seq, 0.0, nullptr, 0.0, 0.0, 0.9),
                  std::invalid_argument);
  CHECK_NOTHROW(evolve(seq, 0.0, nullptr, 0.0, 0.0, 0.5));

  PulseSequence bad;
  bad.segments = {drive(4.0, 9.6, 0.0, 0.0, 3.0)};  // edge > duration/2
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  PulseSequence ok;
  ok.segments = {drive(26.0, 9.6)};
  ok.repetition_delay_ms = 1.0;
  CHECK(ok.repetition_delay_sufficient(100e-6));
  CHECK_FALSE(ok.repetition_delay_sufficient(300e-6));
}

TEST_CASE("noise trace shorter than the sequence is rejected") {
  PulseSequence seq;
  seq.segments = {delay(2000.0)};
  NoiseTrace trace;
  trace.dt_s = 4e-9;
  trace.samples.assign(100, 0.0);  // 400 ns record
  CHECK_THROWS_AS(evolve(seq, 0.0, &trace, 1.0, 0.0, 0.5),
                  std::invalid_argument);
}

TEST_CASE("pi/2 calibration matches the quarter Rabi period") {
  const double d = calibrate_pi_half_ns(9.6);
  CHECK(d == doctest::Approx(26.0).epsilon(0.02));
  CHECK(std::abs(d - 26.0) < 0.5);
  CHECK(calibrate_pi_half_ns(5.0) == doctest::Approx(50.0).epsilon(0.02));
}

TEST_CASE("Rabi experiment") {
  SUBCASE("oscillation frequency tracks amplitude times coupling") {
    RabiConfig cfg;
    cfg.drive_amplitude_uv = 10.0;
    cfg.coupling_mhz_per_uv = 0.13;
    cfg.durations_ns = linspace(0.0, 2600.0, 64);
    cfg.t1_s = 0.0;
    const PeTable t = rabi_experiment(cfg);
    std::vector<double> t_us;
    for (double x : t.x) t_us.push_back(x * 1e-3);
    const FitResult fit = fit_damped_sinusoid(t_us, t.p_e);
    CHECK(fit.value("frequency") == doctest::Approx(1.3).epsilon(0.02));
  }

  SUBCASE("zero drive stays in the ground state") {
    RabiConfig cfg;
    cfg.drive_amplitude_uv = 0.0;
    cfg.coupling_mhz_per_uv = 0.13;
    cfg.durations_ns = linspace(0.0, 1000.0, 11);
    const PeTable t = rabi_experiment(cfg);
    for (double p : t.p_e) CHECK(std::abs(p) < 1e-9);
  }

  SUBCASE("frequency versus amplitude is linear to R^2 > 0.9999") {
    std::vector<double> amps, freqs;
    for (double a = 2.0; a <= 20.0 + 1e-9; a += 2.0) {
      RabiConfig cfg;
      cfg.drive_amplitude_uv = a;
      cfg.coupling_mhz_per_uv = 0.4;
      const double f_expect = a * 0.4;
      cfg.durations_ns = linspace(0.0, 3200.0 / f_expect, 64);
      cfg.t1_s = 0.0;
      const PeTable t = rabi_experiment(cfg);
      std::vector<double> t_us;
      for (double x : t.x) t_us.push_back(x * 1e-3);
      amps.push_back(a);
      freqs.push_back(fit_damped_sinusoid(t_us, t.p_e).value("frequency"));
    }
    const RabiCouplingResult rc = rabi_coupling(amps, freqs);
    CHECK(rc.r_squared > 0.9999);
    CHECK(rc.coupling_mhz_per_uv == doctest::Approx(0.4).epsilon(1e-3));
  }
}

TEST_CASE("Ramsey experiment") {
  SUBCASE("fringe frequency equals the programmed detuning within 0.5%") {
    for (double det : {1.0, 10.0, 20.0}) {
      RamseyConfig cfg;
      cfg.detuning_mhz = det;
      const double span = 3000.0 / det;  // three periods minimum
      cfg.taus_ns = linspace(0.0, span, 96);
      cfg.t1_s = 0.0;
      const PeTable t = ramsey_experiment(cfg);
      std::vector<double> t_us;
      for (double x : t.x) t_us.push_back(x * 1e-3);
      const FitResult fit = fit_damped_sinusoid(t_us, t.p_e);
      CHECK(std::abs(fit.value("frequency") - det) / det < 5e-3);
    }
  }

  SUBCASE("no noise and no relaxation leave the fringes undamped") {
    RamseyConfig cfg;
    cfg.detuning_mhz = 10.6;
    cfg.taus_ns = linspace(0.0, 1400.0, 118);
    cfg.t1_s = 0.0;
    const PeTable t = ramsey_experiment(cfg);
    std::vector<double> t_us;
    for (double x : t.x) t_us.push_back(x * 1e-3);
    const FitResult fit = fit_damped_sinusoid(t_us, t.p_e);
    CHECK(fit.value("tau") > 50.0);  // effectively no decay over 1.4 us
  }

  SUBCASE("without charge noise the envelope decays at 2 T1") {
    RamseyConfig cfg;
    cfg.detuning_mhz = 10.0;
    cfg.taus_ns = linspace(0.0, 2500.0, 100);
    cfg.t1_s = 3e-6;
    const PeTable t = ramsey_experiment(cfg);
    std::vector<double> t_us;
    for (double x : t.x) t_us.push_back(x * 1e-3);
    const FitResult fit = fit_damped_sinusoid(t_us, t.p_e);
    CHECK(fit.value("tau") == doctest::Approx(6.0).epsilon(0.2));
  }

  SUBCASE("identical seeds give bit-identical tables") {
    RamseyConfig cfg;
    cfg.detuning_mhz = 10.6;
    cfg.taus_ns = linspace(0.0, 600.0, 26);
    cfg.t1_s = 60e-6;
    NoiseCoupling nc;
    nc.psd.amplitude_1hz = 2e-9;
    nc.sens1_ghz = 2.0;
    cfg.noise = nc;
    cfg.n_realizations = 16;
    cfg.seed = 99;
    const PeTable a = ramsey_experiment(cfg);
    const PeTable b = ramsey_experiment(cfg);
    CHECK(std::memcmp(a.p_e.data(), b.p_e.data(),
                      a.p_e.size() * sizeof(double)) == 0);
  }
}

TEST_CASE("echo experiment") {
  SUBCASE("no noise and no relaxation leave the echo amplitude flat") {
    // Delays long enough that the pulse edges never overlap.
    EchoConfig cfg;
    cfg.taus_ns = linspace(100.0, 4000.0, 21);
    cfg.t1_s = 0.0;
    const PeTable t = echo_experiment(cfg);
    for (double p : t.p_e) {
      CHECK(p == doctest::Approx(t.p_e.front()).epsilon(1e-6));
    }
    CHECK(t.p_e.front() == doctest::Approx(1.0).epsilon(1e-3));
  }

  SUBCASE("echo decay tracks the filter-function envelope") {
    NoiseCoupling nc;
    nc.psd.exponent = 1.0;
    nc.sens1_ghz = 2.0;
    nc.psd.amplitude_1hz =
        calibrate_amplitude_for_fid(nc.psd, nc.sens1_ghz, 0.5e-6);
    // Fast pulses: the sequence is then a nearly ideal echo and must
    // reproduce the Gaussian filter-function envelope.
    EchoConfig cfg;
    cfg.f_rabi_mhz = 96.0;
    cfg.edge_ns = 1.0;
    cfg.taus_ns = linspace(160.0, 2100.0, 13);
    cfg.t1_s = 0.0;
    cfg.noise = nc;
    cfg.n_realizations = 256;
    cfg.seed = 4;
    const PeTable t = echo_experiment(cfg);
    for (std::size_t i = 0; i < t.x.size(); ++i) {
      const double c_model =
          echo_envelope(nc.psd, nc.sens1_ghz, t.x[i] * 1e-9);
      if (c_model < 0.3) continue;
      // Full coherence refocuses to P_e = 1 here.
      const double c_sim = 2.0 * t.p_e[i] - 1.0;
      CHECK(std::abs(c_sim - c_model) < 0.06);
    }

    // Experiment-length pulses leak some unrefocused low-frequency noise
    // into the sequence; the envelope sags a few percent below ideal but
    // stays close.
    EchoConfig slow = cfg;
    slow.f_rabi_mhz = 9.6;
    slow.edge_ns = 3.0;
    const PeTable t2 = echo_experiment(slow);
    for (std::size_t i = 0; i < t2.x.size(); ++i) {
      const double c_model =
          echo_envelope(nc.psd, nc.sens1_ghz, t2.x[i] * 1e-9);
      if (c_model < 0.3) continue;
      const double c_sim = 2.0 * t2.p_e[i] - 1.0;
      CHECK(std::abs(c_sim - c_model) < 0.09);
    }
  }

  SUBCASE("echo outlives the free-induction decay under 1/f noise") {
    NoiseCoupling nc;
    nc.psd.exponent = 1.0;
    nc.sens1_ghz = 2.0;
    nc.psd.amplitude_1hz =
        calibrate_amplitude_for_fid(nc.psd, nc.sens1_ghz, 0.4e-6);

    RamseyConfig rcfg;
    rcfg.detuning_mhz = 10.6;
    rcfg.taus_ns = linspace(0.0, 1200.0, 101);
    rcfg.t1_s = 0.0;
    rcfg.noise = nc;
    rcfg.n_realizations = 128;
    const PeTable ramsey = ramsey_experiment(rcfg);
    std::vector<double> t_us;
    for (double x : ramsey.x) t_us.push_back(x * 1e-3);
    const double t2 = fit_damped_sinusoid(t_us, ramsey.p_e).value("tau");

    EchoConfig ecfg;
    ecfg.taus_ns = linspace(0.0, 6000.0, 101);
    ecfg.t1_s = 0.0;
    ecfg.noise = nc;
    ecfg.n_realizations = 128;
    const PeTable echo = echo_experiment(ecfg);
    std::vector<double> e_us;
    for (double x : echo.x) e_us.push_back(x * 1e-3);
    const double t_echo = fit_exp_decay(e_us, echo.p_e).value("tau");

    CHECK(t_echo > 3.0 * t2);
  }
}

TEST_CASE("T1 saturation recovery") {
  T1Config cfg;
  cfg.t1_s = 61e-6;
  cfg.window_s = 180e-6;
  cfg.dt_s = 1e-6;
  const PeTable t = t1_experiment(cfg);
  CHECK(t.p_e.front() == doctest::Approx(0.5));
  for (std::size_t i = 0; i < t.x.size(); i += 20) {
    CHECK(t.p_e[i] ==
          doctest::Approx(0.5 * std::exp(-t.x[i] * 1e-6 / 61e-6))
              .epsilon(1e-12));
  }
}

TEST_CASE("continuous-wave spectroscopy line shape") {
  CpbParams cpb;
  cpb.e_c_ghz = 6.24;
  cpb.e_j_max_ghz = 19.0;
  cpb.c_g_af = 4.5;
  cpb.flux = flux_for_ej(cpb, 4.5);

  SUBCASE("strong resonant drive saturates to one half") {
    CwConfig cfg;
    cfg.n_g = {1.0};
    cfg.f_pump_ghz = {4.5};
    cfg.f_rabi_mhz = 5.0;
    cfg.t1_s = 20e-6;
    cfg.t2_s = 60e-9;
    const CwMap map = cw_spectroscopy(cpb, cfg);
    CHECK(map.p_e[0][0] == doctest::Approx(0.5).epsilon(1e-3));
  }

  SUBCASE("weak-drive half width at half maximum is 1/(2 pi T2)") {
    CwConfig cfg;
    cfg.n_g = {1.0};
    cfg.f_rabi_mhz = 0.02;
    cfg.t1_s = 20e-6;
    cfg.t2_s = 60e-9;
    const double hwhm_expected_ghz = 1.0 / (2.0 * kPi * cfg.t2_s) / 1e9;
    for (int i = 0; i <= 2000; ++i) {
      cfg.f_pump_ghz.push_back(4.5 - 0.02 + 0.04 * i / 2000.0);
    }
    const CwMap map = cw_spectroscopy(cpb, cfg);
    const double peak = map.p_e[0][1000];
    double hwhm = 0.0;
    for (std::size_t j = 1000; j < map.f_pump_ghz.size(); ++j) {
      if (map.p_e[0][j] < 0.5 * peak) {
        hwhm = map.f_pump_ghz[j] - 4.5;
        break;
      }
    }
    CHECK(hwhm == doctest::Approx(hwhm_expected_ghz).epsilon(0.02));
    CHECK(hwhm * 1e3 == doctest::Approx(2.65).epsilon(0.03));  // MHz
  }

  SUBCASE("map minima trace the transition parabola") {
    CwConfig cfg;
    cfg.n_g = linspace(0.88, 1.12, 25);
    cfg.f_pump_ghz = linspace(4.45, 6.3, 600);
    cfg.f_rabi_mhz = 0.05;
    cfg.t1_s = 20e-6;
    cfg.t2_s = 60e-9;
    const CwMap map = cw_spectroscopy(cpb, cfg);
    std::vector<double> ngs, peaks;
    for (std::size_t i = 0; i < map.n_g.size(); ++i) {
      std::size_t jmax = 0;
      for (std::size_t j = 1; j < map.f_pump_ghz.size(); ++j) {
        if (map.p_e[i][j] > map.p_e[i][jmax]) jmax = j;
      }
      ngs.push_back(map.n_g[i]);
      peaks.push_back(map.f_pump_ghz[jmax]);
    }
    const FitResult fit = fit_parabola_spectrum(ngs, peaks);
    CHECK(fit.value("e_c") == doctest::Approx(6.24).epsilon(0.01));
    CHECK(fit.value("e_j") == doctest::Approx(4.5).epsilon(0.01));
  }

  SUBCASE("branches are weighted by visibility") {
    DefectSpectrumModel model;
    model.e_c_ghz = 4.3;
    model.branches = {{7.33, 0.0, 1.0}, {6.7, 0.0, 0.5}};
    CwConfig cfg;
    cfg.n_g = {1.0};
    cfg.f_pump_ghz = {7.33, 6.7};
    cfg.f_rabi_mhz = 0.02;
    cfg.t1_s = 20e-6;
    cfg.t2_s = 60e-9;
    const CwMap map = cw_spectroscopy(model, cfg);
    CHECK(map.p_e[0][1] == doctest::Approx(0.5 * map.p_e[0][0]).epsilon(0.02));
  }
}
