#include "vlab/readout.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "vlab/constants.hpp"
#include "vlab/rng.hpp"

namespace vlab {

int ReadoutConfig::samples_per_bin() const {
  return static_cast<int>(std::llround(bin_ns * 1e-9 * sample_rate_msps * 1e6));
}

void ReadoutConfig::validate() const {
  if (!(sample_rate_msps > 0.0) || !(bin_ns > 0.0) || !(if_freq_mhz > 0.0)) {
    throw std::invalid_argument("ReadoutConfig: rates and bin must be > 0");
  }
  const double spb = bin_ns * 1e-9 * sample_rate_msps * 1e6;
  if (std::abs(spb - std::llround(spb)) > 1e-9 || std::llround(spb) < 1) {
    throw std::invalid_argument(
        "ReadoutConfig: bin must hold an integer number of samples");
  }
  const double cycles = if_freq_mhz * 1e6 * bin_ns * 1e-9;
  if (std::abs(cycles - std::llround(cycles)) > 1e-9 ||
      std::llround(cycles) < 1) {
    throw std::invalid_argument(
        "ReadoutConfig: bin must hold an integer number of IF cycles");
  }
  if (noise_sigma < 0.0) {
    throw std::invalid_argument("ReadoutConfig: noise sigma must be >= 0");
  }
}

void IqTrace::validate() const {
  if (signal.size() != reference.size()) {
    throw std::invalid_argument("IqTrace: signal/reference length mismatch");
  }
  for (const auto& v : signal) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw std::invalid_argument("IqTrace: non-finite sample");
    }
  }
  for (const auto& v : reference) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw std::invalid_argument("IqTrace: non-finite reference sample");
    }
  }
}

std::complex<double> s21(const ResonatorParams& res, double chi_mhz,
                         double p_e, double f_ghz) {
  auto notch = [&](double f_res_ghz) {
    const std::complex<double> den(
        1.0, 2.0 * res.q_loaded * (f_ghz - f_res_ghz) / f_res_ghz);
    return 1.0 - (res.q_loaded / res.q_external) / den;
  };
  // sigma_z = +1 excited, -1 ground; the resonator is pulled to
  // f_r + chi sigma_z.
  const double chi_ghz = chi_mhz * 1e-3;
  const std::complex<double> excited = notch(res.f_r_ghz + chi_ghz);
  const std::complex<double> ground = notch(res.f_r_ghz - chi_ghz);
  return p_e * excited + (1.0 - p_e) * ground;
}

double linewidth_mhz(const ResonatorParams& res) {
  if (!(res.q_loaded > 0.0)) {
    throw std::invalid_argument("linewidth: Q_L must be > 0");
  }
  return res.f_r_ghz * 1e3 / res.q_loaded;
}

IqTrace synth_heterodyne(std::span<const double> pe_per_sample,
                         const ResonatorParams& res, double chi_mhz,
                         const ReadoutConfig& cfg) {
  cfg.validate();
  if (pe_per_sample.empty()) {
    throw std::invalid_argument("synth_heterodyne: empty P_e timeline");
  }
  IqTrace trace;
  trace.sample_rate_msps = cfg.sample_rate_msps;
  trace.signal.reserve(pe_per_sample.size());
  trace.reference.reserve(pe_per_sample.size());
  const double dt = cfg.dt_s();
  const double w_if = 2.0 * kPi * cfg.if_freq_mhz * kMhz;
  Rng rng(cfg.seed);
  for (std::size_t k = 0; k < pe_per_sample.size(); ++k) {
    const double t = static_cast<double>(k) * dt;
    const std::complex<double> phasor(std::cos(w_if * t), std::sin(w_if * t));
    std::complex<double> sample =
        s21(res, chi_mhz, pe_per_sample[k], cfg.probe_freq_ghz) * phasor;
    if (cfg.noise_sigma > 0.0) {
      sample += cfg.noise_sigma *
                std::complex<double>(rng.normal(), rng.normal());
    }
    trace.signal.push_back(sample);
    trace.reference.push_back(phasor);
  }
  return trace;
}

DemodResult demodulate(const IqTrace& trace, const ReadoutConfig& cfg) {
  cfg.validate();
  trace.validate();
  const int spb = cfg.samples_per_bin();
  const std::size_t n_bins = trace.signal.size() / static_cast<std::size_t>(spb);
  if (n_bins == 0) {
    throw std::invalid_argument("demodulate: record shorter than one bin");
  }
  DemodResult out;
  out.partial_bin_discarded =
      trace.signal.size() % static_cast<std::size_t>(spb) != 0;
  out.t_s.reserve(n_bins);
  out.amplitude.reserve(n_bins);
  out.phase_rad.reserve(n_bins);
  out.bins.reserve(n_bins);
  const double dt = cfg.dt_s();
  for (std::size_t b = 0; b < n_bins; ++b) {
    std::complex<double> acc{0.0, 0.0};
    for (int k = 0; k < spb; ++k) {
      const std::size_t i = b * static_cast<std::size_t>(spb) +
                            static_cast<std::size_t>(k);
      const std::complex<double> ref = trace.reference[i];
      const double mag = std::abs(ref);
      if (mag == 0.0) {
        throw std::invalid_argument("demodulate: zero reference sample");
      }
      acc += trace.signal[i] * std::conj(ref / mag);
    }
    acc /= static_cast<double>(spb);
    out.bins.push_back(acc);
    out.amplitude.push_back(std::abs(acc));
    out.phase_rad.push_back(std::arg(acc));
    out.t_s.push_back(trace.t0_s +
                      (static_cast<double>(b) + 0.5) * spb * dt);
  }
  return out;
}

double PhaseToPeMap::pe_from_bin(std::complex<double> v) const {
  const std::complex<double> chord = s_excited - s_ground;
  const double len2 = std::norm(chord);
  if (len2 == 0.0) {
    throw std::invalid_argument("PhaseToPeMap: zero readout contrast");
  }
  return ((v - s_ground) * std::conj(chord)).real() / len2;
}

double PhaseToPeMap::pe_from_phase(double phase_rad) const {
  const double p0 = std::arg(s_ground);
  const double p1 = std::arg(s_excited);
  if (p0 == p1) {
    throw std::invalid_argument("PhaseToPeMap: zero phase contrast");
  }
  return (phase_rad - p0) / (p1 - p0);
}

PhaseToPeMap make_pe_map(const ResonatorParams& res, double chi_mhz,
                         double f_probe_ghz) {
  PhaseToPeMap map;
  map.s_ground = s21(res, chi_mhz, 0.0, f_probe_ghz);
  map.s_excited = s21(res, chi_mhz, 1.0, f_probe_ghz);
  return map;
}

std::string iq_trace_to_csv(const IqTrace& trace) {
  std::ostringstream os;
  os.precision(17);
  os << "t_s,i_sig,q_sig,i_ref,q_ref\n";
  const double dt = 1e-6 / trace.sample_rate_msps;
  for (std::size_t k = 0; k < trace.signal.size(); ++k) {
    os << trace.t0_s + static_cast<double>(k) * dt << ','
       << trace.signal[k].real() << ',' << trace.signal[k].imag() << ','
       << trace.reference[k].real() << ',' << trace.reference[k].imag()
       << '\n';
  }
  return os.str();
}

IqTrace iq_trace_from_csv(const std::string& csv) {
  std::istringstream is(csv);
  std::string line;
  if (!std::getline(is, line)) {
    throw std::invalid_argument("iq_trace_from_csv: empty input");
  }
  IqTrace trace;
  double t0 = 0.0, t1 = 0.0;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    double t, is_, qs, ir, qr;
    char c;
    if (!(ls >> t >> c >> is_ >> c >> qs >> c >> ir >> c >> qr)) {
      throw std::invalid_argument("iq_trace_from_csv: malformed row");
    }
    if (row == 0) t0 = t;
    if (row == 1) t1 = t;
    trace.signal.emplace_back(is_, qs);
    trace.reference.emplace_back(ir, qr);
    ++row;
  }
  if (row >= 2) {
    trace.sample_rate_msps = 1e-6 / (t1 - t0);
    trace.t0_s = t0;
  }
  trace.validate();
  return trace;
}

std::string demod_to_csv(const DemodResult& demod) {
  std::ostringstream os;
  os.precision(17);
  os << "t_s,amplitude,phase_rad\n";
  for (std::size_t i = 0; i < demod.t_s.size(); ++i) {
    os << demod.t_s[i] << ',' << demod.amplitude[i] << ','
       << demod.phase_rad[i] << '\n';
  }
  return os.str();
}

}  // namespace vlab
