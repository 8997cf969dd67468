#include "vlab/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "vlab/constants.hpp"
#include "vlab/dynamics.hpp"
#include "vlab/readout.hpp"
#include "vlab/rng.hpp"
#include "vlab/units.hpp"
#include "vlab/version.hpp"

namespace vlab {

std::string config_hash(const Json& config) {
  // Key-sorted canonical form, then FNV-1a 64.
  const nlohmann::json sorted = nlohmann::json::parse(config.dump());
  const std::string text = sorted.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

Json fit_result_to_json(const FitResult& fit) {
  Json j;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["residual_rms"] = fit.residual_rms;
  Json params = Json::object();
  Json errors = Json::object();
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    params[fit.names[i]] = fit.values[i];
    errors[fit.names[i]] = fit.std_errors[i];
  }
  j["params"] = params;
  j["std_errors"] = errors;
  j["flags"] = fit.flags;
  return j;
}

namespace {

double param(const Json& section, const std::string& key,
             const std::string& fallback, Kind kind) {
  if (section.contains(key)) {
    return parse_quantity(section.at(key).get<std::string>(), kind);
  }
  return parse_quantity(fallback, kind);
}

double param_number(const Json& section, const std::string& key,
                    double fallback) {
  if (section.contains(key)) return section.at(key).get<double>();
  return fallback;
}

Json section_or_empty(const Json& config, const std::string& key) {
  if (config.contains(key)) return config.at(key);
  return Json::object();
}

struct ReadoutContext {
  ResonatorParams res;
  double chi_mhz = 0.0;
  ReadoutConfig cfg;
  PhaseToPeMap map;
};

ReadoutContext make_readout(const DeviceRecord& dev, double f_q_ghz,
                            const Json& readout_section, std::uint64_t seed) {
  ReadoutContext ctx;
  ctx.res = dev.resonator;
  const double g_mhz = coupling_g_mhz(dev.qubit, dev.resonator);
  const double detuning_mhz = (f_q_ghz - dev.resonator.f_r_ghz) * 1e3;
  ctx.chi_mhz = dispersive_shift(g_mhz, detuning_mhz).chi_mhz;
  ctx.cfg.probe_freq_ghz = dev.resonator.f_r_ghz;
  ctx.cfg.if_freq_mhz =
      param(readout_section, "if_freq", "2 MHz", Kind::kFrequencyMhz);
  ctx.cfg.bin_ns = param(readout_section, "bin", "500 ns", Kind::kTimeNs);
  ctx.cfg.sample_rate_msps = param_number(readout_section, "sample_rate_msps",
                                          20.0);
  ctx.cfg.noise_sigma = param_number(readout_section, "noise_sigma", 0.01);
  ctx.cfg.seed = seed;
  ctx.cfg.validate();
  ctx.map = make_pe_map(ctx.res, ctx.chi_mhz, ctx.cfg.probe_freq_ghz);
  return ctx;
}

// One-bin measurement of a constant qubit population through the
// heterodyne chain.
double measure_pe(double pe, ReadoutContext& ctx, std::uint64_t point_seed) {
  ctx.cfg.seed = point_seed;
  const auto n = static_cast<std::size_t>(ctx.cfg.samples_per_bin());
  std::vector<double> timeline(n, pe);
  const IqTrace trace =
      synth_heterodyne(timeline, ctx.res, ctx.chi_mhz, ctx.cfg);
  const DemodResult demod = demodulate(trace, ctx.cfg);
  return ctx.map.pe_from_bin(demod.bins.front());
}

CpbParams qubit_at_fq(const DeviceRecord& dev, double f_q_ghz) {
  CpbParams cpb = dev.qubit;
  cpb.flux = flux_for_ej(cpb, f_q_ghz);
  return cpb;
}

std::vector<double> grid(double max_value, double step) {
  std::vector<double> xs;
  for (double x = 0.0; x <= max_value + 1e-9; x += step) xs.push_back(x);
  return xs;
}

struct CsvBuilder {
  std::ostringstream os;
  explicit CsvBuilder(const std::string& header) {
    os.precision(17);
    os << header << '\n';
  }
  template <typename... T>
  void row(T... vals) {
    bool first = true;
    ((os << (first ? "" : ","), os << vals, first = false), ...);
    os << '\n';
  }
  std::string str() const { return os.str(); }
};

RunOutput finish(const Json& config, const std::string& experiment,
                 const FitResult& fit, std::string csv,
                 const std::vector<std::string>& columns) {
  RunOutput out;
  out.fit = fit;
  out.data_csv = std::move(csv);
  out.record["config_hash"] = config_hash(config);
  out.record["code_version"] = kVersion;
  out.record["experiment"] = experiment;
  out.record["device"] = config.at("device").get<std::string>();
  out.record["seed"] = config.at("seed").get<std::uint64_t>();
  out.record["data_columns"] = columns;
  out.record["fit"] = fit_result_to_json(fit);
  return out;
}

RunOutput run_t1(const Registry& reg, const Json& config) {
  const auto& dev = reg.device(config.at("device").get<std::string>());
  const Json sec = section_or_empty(config, "t1");
  const auto seed = config.at("seed").get<std::uint64_t>();
  const double f_q = param(sec, "f_q", "4.5 GHz", Kind::kFrequencyGhz);
  const double t1_s = sec.contains("t1")
                          ? parse_quantity(sec.at("t1").get<std::string>(),
                                           Kind::kTimeS)
                          : dev.t1_at(f_q);
  const double window_s =
      sec.contains("window")
          ? parse_quantity(sec.at("window").get<std::string>(), Kind::kTimeS)
          : 3.0 * t1_s;

  Json readout_sec = section_or_empty(config, "readout");
  ReadoutContext ctx = make_readout(dev, f_q, readout_sec, seed);

  // Saturation-recovery timeline at the ADC rate, then the full chain.
  const double dt = ctx.cfg.dt_s();
  const auto n_samples = static_cast<std::size_t>(window_s / dt);
  std::vector<double> timeline(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    timeline[i] = 0.5 * std::exp(-(static_cast<double>(i) * dt) / t1_s);
  }
  const IqTrace trace =
      synth_heterodyne(timeline, ctx.res, ctx.chi_mhz, ctx.cfg);
  const DemodResult demod = demodulate(trace, ctx.cfg);

  std::vector<double> t_us, pe;
  CsvBuilder csv("t_us,p_e,in_phase_v");
  const std::complex<double> axis =
      (ctx.map.s_excited - ctx.map.s_ground) /
      std::abs(ctx.map.s_excited - ctx.map.s_ground);
  for (std::size_t b = 0; b < demod.bins.size(); ++b) {
    const double p = ctx.map.pe_from_bin(demod.bins[b]);
    t_us.push_back(demod.t_s[b] * 1e6);
    pe.push_back(p);
    // In-phase quadrature along the readout axis, as plotted for the
    // amplitude-readout regime.
    csv.row(t_us.back(), p, (demod.bins[b] * std::conj(axis)).real());
  }
  FitResult fit = fit_exp_decay(t_us, pe);
  fit.names.push_back("t1_us");
  fit.values.push_back(fit.value("tau"));
  fit.std_errors.push_back(fit.std_error("tau"));
  return finish(config, "t1", fit, csv.str(), {"t_us", "p_e", "in_phase_v"});
}

// Noise coupling for a dephasing experiment: either a named PSD preset or
// a 1/f template (optional soft cutoff) with the amplitude calibrated so
// the first-order FID 1/e time equals a T2* target.
NoiseCoupling noise_from_section(const Registry& reg, const Json& sec,
                                 const CpbParams& cpb, double gate_offset) {
  NoiseCoupling nc;
  nc.sens1_ghz = sensitivity_first(cpb, 1.0 + gate_offset);
  nc.sens2_ghz = sensitivity_second(cpb);
  if (sec.contains("t2_star_target")) {
    const double target_s = parse_quantity(
        sec.at("t2_star_target").get<std::string>(), Kind::kTimeS);
    NoisePsd psd;
    psd.exponent = 1.0;
    if (sec.contains("soft_cutoff")) {
      psd.soft_cutoff_hz = parse_quantity(
          sec.at("soft_cutoff").get<std::string>(), Kind::kFrequencyHz);
    }
    psd.amplitude_1hz =
        calibrate_amplitude_for_fid(psd, nc.sens1_ghz, target_s);
    nc.psd = psd;
  } else {
    nc.psd = reg.preset(sec.contains("psd")
                            ? sec.at("psd").get<std::string>()
                            : "device1-1f-cutoff200k");
  }
  return nc;
}

RunOutput run_ramsey(const Registry& reg, const Json& config) {
  const auto& dev = reg.device(config.at("device").get<std::string>());
  const Json sec = section_or_empty(config, "ramsey");
  const auto seed = config.at("seed").get<std::uint64_t>();
  const double f_q = param(sec, "f_q", "5.949 GHz", Kind::kFrequencyGhz);
  const double detuning_mhz =
      param(sec, "detuning", "10.6 MHz", Kind::kFrequencyMhz);
  const double f_rabi = param(sec, "f_rabi", "9.6 MHz", Kind::kFrequencyMhz);
  const double tau_max = param(sec, "tau_max", "1.4 us", Kind::kTimeNs);
  const double tau_step = param(sec, "tau_step", "12 ns", Kind::kTimeNs);
  const double gate_offset = param_number(sec, "gate_offset", 0.02);
  const int realizations =
      static_cast<int>(param_number(sec, "realizations", 256));

  const CpbParams cpb = qubit_at_fq(dev, f_q);
  const double t1_s = sec.contains("t1")
                          ? parse_quantity(sec.at("t1").get<std::string>(),
                                           Kind::kTimeS)
                          : dev.t1_at(f_q);

  RamseyConfig rc;
  rc.f_rabi_mhz = f_rabi;
  rc.detuning_mhz = detuning_mhz;
  rc.taus_ns = grid(tau_max, tau_step);
  rc.t1_s = t1_s;
  rc.n_realizations = realizations;
  rc.seed = Rng::derive(seed, 1);
  rc.noise = noise_from_section(reg, sec, cpb, gate_offset);

  if (sec.contains("t2_star_target")) {
    // Refine the calibrated amplitude until the fitted Ramsey decay time
    // matches the target: the analytic seed is exact for the Gaussian
    // envelope, the loop absorbs the exponential-fit convention.
    const double target_s = parse_quantity(
        sec.at("t2_star_target").get<std::string>(), Kind::kTimeS);
    for (int round = 0; round < 3; ++round) {
      const PeTable probe = ramsey_experiment(rc);
      std::vector<double> t_us(probe.x.size());
      for (std::size_t i = 0; i < probe.x.size(); ++i) {
        t_us[i] = probe.x[i] * 1e-3;
      }
      const FitResult pre = fit_damped_sinusoid(t_us, probe.p_e);
      const double fitted_us = pre.value("tau");
      const double scale = fitted_us * 1e-6 / target_s;
      if (std::abs(scale - 1.0) < 0.01) break;
      rc.noise->psd.amplitude_1hz *= scale * scale;
    }
  }

  const PeTable table = ramsey_experiment(rc);

  Json readout_sec = section_or_empty(config, "readout");
  ReadoutContext ctx = make_readout(dev, f_q, readout_sec, seed);
  CsvBuilder csv("tau_ns,p_e,p_e_measured");
  std::vector<double> t_us, pe_meas;
  for (std::size_t j = 0; j < table.x.size(); ++j) {
    const double p =
        measure_pe(table.p_e[j], ctx, Rng::derive(seed, 1000000 + j));
    csv.row(table.x[j], table.p_e[j], p);
    t_us.push_back(table.x[j] * 1e-3);
    pe_meas.push_back(p);
  }
  FitResult fit = fit_damped_sinusoid(t_us, pe_meas);
  fit.names.push_back("t2_star_us");
  fit.values.push_back(fit.value("tau"));
  fit.std_errors.push_back(fit.std_error("tau"));
  fit.names.push_back("detuning_mhz");
  fit.values.push_back(fit.value("frequency"));
  fit.std_errors.push_back(fit.std_error("frequency"));
  return finish(config, "ramsey", fit, csv.str(),
                {"tau_ns", "p_e", "p_e_measured"});
}

RunOutput run_echo(const Registry& reg, const Json& config) {
  const auto& dev = reg.device(config.at("device").get<std::string>());
  const Json sec = section_or_empty(config, "echo");
  const auto seed = config.at("seed").get<std::uint64_t>();
  const double f_q = param(sec, "f_q", "5.949 GHz", Kind::kFrequencyGhz);
  const double f_rabi = param(sec, "f_rabi", "9.6 MHz", Kind::kFrequencyMhz);
  const double tau_max = param(sec, "tau_max", "8 us", Kind::kTimeNs);
  const double tau_step = param(sec, "tau_step", "80 ns", Kind::kTimeNs);
  const double gate_offset = param_number(sec, "gate_offset", 0.02);
  const int realizations =
      static_cast<int>(param_number(sec, "realizations", 256));

  const CpbParams cpb = qubit_at_fq(dev, f_q);
  const NoiseCoupling nc = noise_from_section(reg, sec, cpb, gate_offset);
  const double t1_s = sec.contains("t1")
                          ? parse_quantity(sec.at("t1").get<std::string>(),
                                           Kind::kTimeS)
                          : dev.t1_at(f_q);

  EchoConfig ec;
  ec.f_rabi_mhz = f_rabi;
  ec.taus_ns = grid(tau_max, tau_step);
  ec.t1_s = t1_s;
  ec.noise = nc;
  ec.n_realizations = realizations;
  ec.seed = Rng::derive(seed, 1);
  const PeTable table = echo_experiment(ec);

  Json readout_sec = section_or_empty(config, "readout");
  ReadoutContext ctx = make_readout(dev, f_q, readout_sec, seed);
  CsvBuilder csv("tau_ns,p_e,p_e_measured");
  std::vector<double> t_us, pe_meas;
  for (std::size_t j = 0; j < table.x.size(); ++j) {
    const double p =
        measure_pe(table.p_e[j], ctx, Rng::derive(seed, 1000000 + j));
    csv.row(table.x[j], table.p_e[j], p);
    t_us.push_back(table.x[j] * 1e-3);
    pe_meas.push_back(p);
  }
  FitResult fit = fit_exp_decay(t_us, pe_meas);
  fit.names.push_back("t_echo_us");
  fit.values.push_back(fit.value("tau"));
  fit.std_errors.push_back(fit.std_error("tau"));
  return finish(config, "echo", fit, csv.str(),
                {"tau_ns", "p_e", "p_e_measured"});
}

RunOutput run_rabi(const Registry& reg, const Json& config) {
  const auto& dev = reg.device(config.at("device").get<std::string>());
  const Json sec = section_or_empty(config, "rabi");
  const auto seed = config.at("seed").get<std::uint64_t>();
  const double f_q = param(sec, "f_q", "5.949 GHz", Kind::kFrequencyGhz);
  const double amplitude_uv =
      param(sec, "amplitude", "10 uV", Kind::kVoltageUv);
  const double coupling =
      sec.contains("coupling")
          ? parse_quantity(sec.at("coupling").get<std::string>(),
                           Kind::kCouplingMhzPerUv)
          : dev.coupling_at(f_q);
  const double f_rabi_nominal = amplitude_uv * coupling;
  if (!(f_rabi_nominal > 0.0)) {
    throw std::invalid_argument("rabi: zero drive");
  }
  const double t_max_ns = param_number(sec, "periods", 3.5) * 1e3 /
                          f_rabi_nominal;
  const double t1_s = sec.contains("t1")
                          ? parse_quantity(sec.at("t1").get<std::string>(),
                                           Kind::kTimeS)
                          : dev.t1_at(f_q);

  RabiConfig rc;
  rc.drive_amplitude_uv = amplitude_uv;
  rc.coupling_mhz_per_uv = coupling;
  rc.durations_ns = grid(t_max_ns, t_max_ns / 56.0);
  rc.t1_s = t1_s;
  rc.seed = Rng::derive(seed, 1);
  if (sec.contains("psd")) {
    const CpbParams cpb = qubit_at_fq(dev, f_q);
    NoiseCoupling nc;
    nc.sens1_ghz =
        sensitivity_first(cpb, 1.0 + param_number(sec, "gate_offset", 0.02));
    nc.sens2_ghz = sensitivity_second(cpb);
    nc.psd = reg.preset(sec.at("psd").get<std::string>());
    rc.noise = nc;
    rc.n_realizations = static_cast<int>(param_number(sec, "realizations", 64));
  }
  const PeTable table = rabi_experiment(rc);

  Json readout_sec = section_or_empty(config, "readout");
  ReadoutContext ctx = make_readout(dev, f_q, readout_sec, seed);
  CsvBuilder csv("duration_ns,p_e,p_e_measured");
  std::vector<double> t_us, pe_meas;
  for (std::size_t j = 0; j < table.x.size(); ++j) {
    const double p =
        measure_pe(table.p_e[j], ctx, Rng::derive(seed, 1000000 + j));
    csv.row(table.x[j], table.p_e[j], p);
    t_us.push_back(table.x[j] * 1e-3);
    pe_meas.push_back(p);
  }
  FitResult fit = fit_damped_sinusoid(t_us, pe_meas);
  fit.names.push_back("f_rabi_mhz");
  fit.values.push_back(fit.value("frequency"));
  fit.std_errors.push_back(fit.std_error("frequency"));
  fit.names.push_back("t_prime_us");
  fit.values.push_back(fit.value("tau"));
  fit.std_errors.push_back(fit.std_error("tau"));
  return finish(config, "rabi", fit, csv.str(),
                {"duration_ns", "p_e", "p_e_measured"});
}

RunOutput run_spectroscopy(const Registry& reg, const Json& config) {
  const auto& dev = reg.device(config.at("device").get<std::string>());
  const Json sec = section_or_empty(config, "spectroscopy");
  const double ng_lo = param_number(sec, "n_g_min", 0.85);
  const double ng_hi = param_number(sec, "n_g_max", 1.15);
  const int ng_points = static_cast<int>(param_number(sec, "n_g_points", 31));
  const double f_q = param(sec, "f_q", "0 GHz", Kind::kFrequencyGhz);

  CwConfig cw;
  cw.t1_s = param(sec, "t1", "20 us", Kind::kTimeS);
  cw.t2_s = param(sec, "t2", "60 ns", Kind::kTimeS);
  cw.f_rabi_mhz = param(sec, "drive", "0.05 MHz", Kind::kFrequencyMhz);
  for (int i = 0; i < ng_points; ++i) {
    cw.n_g.push_back(ng_lo + (ng_hi - ng_lo) * i /
                     std::max(1, ng_points - 1));
  }

  CwMap map;
  double e_j = 0.0;
  if (dev.has_defect_model() && !sec.contains("f_q")) {
    double f_lo = 1e30, f_hi = 0.0;
    for (const auto& b : dev.defect_model.branches) {
      f_lo = std::min(f_lo, b.e_j_ghz);
      f_hi = std::max(f_hi, transition_frequency(dev.defect_model.e_c_ghz,
                                                 b.e_j_ghz,
                                                 ng_lo + b.charge_offset));
    }
    const double span = f_hi - f_lo;
    const int nf = static_cast<int>(param_number(sec, "f_points", 241));
    for (int i = 0; i < nf; ++i) {
      cw.f_pump_ghz.push_back(f_lo - 0.1 * span +
                              (span * 1.2) * i / (nf - 1));
    }
    map = cw_spectroscopy(dev.defect_model, cw);
  } else {
    CpbParams cpb = dev.qubit;
    e_j = f_q > 0.0 ? f_q : dev.qubit.e_j_max_ghz;
    cpb.flux = flux_for_ej(cpb, e_j);
    const double f_top = transition_frequency(cpb, ng_lo);
    const int nf = static_cast<int>(param_number(sec, "f_points", 241));
    for (int i = 0; i < nf; ++i) {
      cw.f_pump_ghz.push_back(e_j - 0.02 * (f_top - e_j) +
                              (f_top - e_j) * 1.1 * i / (nf - 1));
    }
    map = cw_spectroscopy(cpb, cw);
  }

  CsvBuilder csv("n_g,f_pump_ghz,p_e");
  for (std::size_t i = 0; i < map.n_g.size(); ++i) {
    for (std::size_t j = 0; j < map.f_pump_ghz.size(); ++j) {
      csv.row(map.n_g[i], map.f_pump_ghz[j], map.p_e[i][j]);
    }
  }

  FitResult fit;
  if (!dev.has_defect_model() || sec.contains("f_q")) {
    // Track the line peak per gate charge and fit the transition parabola.
    std::vector<double> ngs, peaks;
    for (std::size_t i = 0; i < map.n_g.size(); ++i) {
      std::size_t jmax = 0;
      for (std::size_t j = 1; j < map.f_pump_ghz.size(); ++j) {
        if (map.p_e[i][j] > map.p_e[i][jmax]) jmax = j;
      }
      if (jmax == 0 || jmax + 1 >= map.f_pump_ghz.size()) continue;
      const double pa = map.p_e[i][jmax - 1];
      const double pb = map.p_e[i][jmax];
      const double pc = map.p_e[i][jmax + 1];
      const double denom = pa - 2.0 * pb + pc;
      double f_peak = map.f_pump_ghz[jmax];
      if (denom < 0.0) {
        const double df = map.f_pump_ghz[1] - map.f_pump_ghz[0];
        f_peak += 0.5 * (pa - pc) / denom * df;
      }
      ngs.push_back(map.n_g[i]);
      peaks.push_back(f_peak);
    }
    fit = fit_parabola_spectrum(ngs, peaks);
  } else {
    // Multi-branch spectrum: report the distinct line minima at the sweet
    // spot instead of a single-parabola fit.
    fit.converged = true;
    fit.names = {};
    const auto lines = defect_spectrum(dev.defect_model, 1.0);
    for (std::size_t b = 0; b < lines.size(); ++b) {
      fit.names.push_back("branch" + std::to_string(b) + "_min_ghz");
      fit.values.push_back(lines[b].frequency_ghz);
      fit.std_errors.push_back(0.0);
    }
  }
  return finish(config, "spectroscopy", fit, csv.str(),
                {"n_g", "f_pump_ghz", "p_e"});
}

}  // namespace

RunOutput run_experiment(const Registry& reg, const Json& config) {
  if (!config.contains("device")) {
    throw std::invalid_argument("config: missing 'device'");
  }
  if (!config.contains("seed")) {
    throw std::invalid_argument("config: missing explicit 'seed'");
  }
  if (!config.contains("experiment")) {
    throw std::invalid_argument("config: missing 'experiment'");
  }
  const std::string kind = config.at("experiment").get<std::string>();
  if (kind == "t1") return run_t1(reg, config);
  if (kind == "ramsey") return run_ramsey(reg, config);
  if (kind == "echo") return run_echo(reg, config);
  if (kind == "rabi") return run_rabi(reg, config);
  if (kind == "spectroscopy") return run_spectroscopy(reg, config);
  throw std::invalid_argument("config: unknown experiment '" + kind + "'");
}

SweepOutput sweep_experiment(const Registry& reg, const Json& config,
                             int n_threads) {
  const auto& dev = reg.device(config.at("device").get<std::string>());
  const Json sec = section_or_empty(config, "sweep");
  const auto seed = config.at("seed").get<std::uint64_t>();
  const double f_lo = param(sec, "from", "4 GHz", Kind::kFrequencyGhz);
  const double f_hi = param(sec, "to", "8 GHz", Kind::kFrequencyGhz);
  const int points = static_cast<int>(param_number(sec, "points", 9));
  const bool respect_visibility =
      !sec.contains("respect_visibility") ||
      sec.at("respect_visibility").get<bool>();
  // A degenerate single-point sweep is the same pipeline as a plain run.
  if (points < 1 || (points > 1 && f_hi <= f_lo)) {
    throw std::invalid_argument("sweep: need a nonempty axis");
  }

  struct Point {
    double f_q = 0.0;
    double t1_us = 0.0;
    double decoupling = 0.0;
    bool skipped = false;
    std::string error;
  };
  std::vector<Point> results(static_cast<std::size_t>(points));

  auto run_point = [&](int idx) {
    Point& p = results[static_cast<std::size_t>(idx)];
    p.f_q = points == 1 ? f_lo : f_lo + (f_hi - f_lo) * idx / (points - 1);
    p.f_q = std::min(p.f_q, dev.qubit.e_j_max_ghz * 0.999);
    if (respect_visibility && !dev.visible_at(p.f_q)) {
      p.skipped = true;
      return;
    }
    try {
      const std::uint64_t point_seed =
          Rng::derive(seed, static_cast<std::uint64_t>(idx));
      // T1 experiment through the chain. The readout section passes
      // through so the probe SNR can be raised where chi shrinks.
      Json readout_sec = section_or_empty(config, "readout");
      if (!readout_sec.contains("noise_sigma")) {
        readout_sec["noise_sigma"] = 0.002;
      }
      Json t1_cfg;
      t1_cfg["device"] = dev.name;
      t1_cfg["experiment"] = "t1";
      t1_cfg["seed"] = point_seed;
      t1_cfg["t1"] = Json::object();
      t1_cfg["t1"]["f_q"] = format_quantity(p.f_q, Kind::kFrequencyGhz);
      t1_cfg["readout"] = readout_sec;
      const RunOutput t1_run = run_experiment(reg, t1_cfg);
      p.t1_us = t1_run.fit.value("t1_us");

      // Rabi frequency at three drive amplitudes, slope through origin.
      const double coupling_true = dev.coupling_at(p.f_q);
      std::vector<double> amps, freqs;
      for (const double target_mhz : {2.0, 4.0, 6.0}) {
        const double amp_uv = target_mhz / coupling_true;
        Json rabi_cfg;
        rabi_cfg["device"] = dev.name;
        rabi_cfg["experiment"] = "rabi";
        rabi_cfg["seed"] = Rng::derive(point_seed, amps.size() + 1);
        rabi_cfg["rabi"] = Json::object();
        rabi_cfg["rabi"]["f_q"] = format_quantity(p.f_q, Kind::kFrequencyGhz);
        rabi_cfg["rabi"]["amplitude"] =
            format_quantity(amp_uv, Kind::kVoltageUv);
        rabi_cfg["readout"] = readout_sec;
        const RunOutput rabi_run = run_experiment(reg, rabi_cfg);
        amps.push_back(amp_uv);
        freqs.push_back(rabi_run.fit.value("f_rabi_mhz"));
      }
      const RabiCouplingResult rc = rabi_coupling(amps, freqs);
      p.decoupling = rc.decoupling_uv_per_mhz;
    } catch (const std::exception& e) {
      p.error = e.what();
    }
  };

  if (n_threads <= 1) {
    for (int i = 0; i < points; ++i) run_point(i);
  } else {
    std::vector<std::thread> pool;
    std::mutex next_mutex;
    int next = 0;
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&]() {
        for (;;) {
          int idx;
          {
            std::lock_guard<std::mutex> lock(next_mutex);
            if (next >= points) return;
            idx = next++;
          }
          run_point(idx);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  SweepOutput out;
  CsvBuilder csv("f_q_ghz,t1_us,decoupling_uv_per_mhz");
  Json point_records = Json::array();
  for (const auto& p : results) {
    Json rec;
    rec["f_q_ghz"] = p.f_q;
    if (p.skipped) {
      rec["status"] = "skipped_blind_window";
    } else if (!p.error.empty()) {
      rec["status"] = "error";
      rec["error"] = p.error;
    } else {
      rec["status"] = "ok";
      rec["t1_us"] = p.t1_us;
      rec["decoupling_uv_per_mhz"] = p.decoupling;
      csv.row(p.f_q, p.t1_us, p.decoupling);
    }
    point_records.push_back(rec);
  }
  out.table_csv = csv.str();
  out.record["config_hash"] = config_hash(config);
  out.record["code_version"] = kVersion;
  out.record["experiment"] = "sweep";
  out.record["device"] = dev.name;
  out.record["seed"] = seed;
  out.record["points"] = point_records;
  return out;
}

}  // namespace vlab
