#include "vlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include <functional>

#include "vlab/constants.hpp"
#include "vlab/fft.hpp"
#include "vlab/rng.hpp"

namespace vlab {

double PulseSequence::total_duration_ns() const {
  double total = 0.0;
  for (const auto& s : segments) total += s.duration_ns;
  return total;
}

void PulseSequence::validate() const {
  for (const auto& s : segments) {
    if (s.duration_ns < 0.0) {
      throw std::invalid_argument("PulseSegment: duration must be >= 0");
    }
    if (s.edge_ns < 0.0) {
      throw std::invalid_argument("PulseSegment: edge must be >= 0");
    }
    if (s.rabi_mhz != 0.0 && s.edge_ns > 0.5 * s.duration_ns) {
      throw std::invalid_argument("PulseSegment: edge must be <= duration/2");
    }
  }
  if (repetition_delay_ms < 0.0) {
    throw std::invalid_argument("PulseSequence: repetition delay must be >= 0");
  }
}

bool PulseSequence::repetition_delay_sufficient(double t1_s) const {
  if (t1_s <= 0.0) return true;
  return repetition_delay_ms * 1e-3 >= 5.0 * t1_s;
}

double BlochState::norm() const { return std::sqrt(x * x + y * y + z * z); }

namespace {

constexpr double kTwoPiMhzNs = 2.0 * kPi * 1e-3;  // MHz * ns -> rad

// Complex drive amplitude (MHz, I + iQ) of the whole sequence at global
// time t. Each segment window is a pair of erf steps centered on its
// boundaries, so a plateau integrates to amplitude * duration exactly and
// adjacent segments crossfade smoothly.
class SequenceEnvelope {
 public:
  explicit SequenceEnvelope(const PulseSequence& seq) {
    double t = 0.0;
    for (const auto& s : seq.segments) {
      if (s.rabi_mhz != 0.0) {
        Window w;
        w.t0 = t;
        w.t1 = t + s.duration_ns;
        w.sigma = s.edge_ns;
        w.amp = s.rabi_mhz;
        w.phase = s.phase_rad;
        w.detuning = s.detuning_mhz;
        windows_.push_back(w);
      }
      t += s.duration_ns;
    }
    total_ = t;
  }

  double total_ns() const { return total_; }

  double max_edge_ns() const {
    double m = 0.0;
    for (const auto& w : windows_) m = std::max(m, w.sigma);
    return m;
  }

  double min_edge_ns() const {
    double m = -1.0;
    for (const auto& w : windows_) {
      if (w.sigma > 0.0) m = (m < 0.0) ? w.sigma : std::min(m, w.sigma);
    }
    return m;
  }

  std::complex<double> drive_mhz(double t) const {
    std::complex<double> sum{0.0, 0.0};
    for (const auto& w : windows_) {
      const double reach = 6.0 * w.sigma;
      if (t < w.t0 - reach || t > w.t1 + reach) continue;
      double gate = 0.0;
      if (w.sigma == 0.0) {
        gate = (t >= w.t0 && t < w.t1) ? 1.0 : 0.0;
      } else {
        const double inv = 1.0 / (std::sqrt(2.0) * w.sigma);
        gate = 0.5 * (std::erf((t - w.t0) * inv) - std::erf((t - w.t1) * inv));
      }
      if (gate == 0.0) continue;
      const double ph = w.phase + kTwoPiMhzNs * w.detuning * t;
      sum += w.amp * gate * std::complex<double>(std::cos(ph), std::sin(ph));
    }
    return sum;
  }

  // Merged intervals where any drive is non-negligible, padded by 5 sigma.
  std::vector<std::pair<double, double>> active_intervals() const {
    std::vector<std::pair<double, double>> spans;
    for (const auto& w : windows_) {
      const double pad = std::max(5.0 * w.sigma, 0.0);
      spans.emplace_back(w.t0 - pad, w.t1 + pad);
    }
    std::sort(spans.begin(), spans.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& s : spans) {
      if (!merged.empty() && s.first <= merged.back().second) {
        merged.back().second = std::max(merged.back().second, s.second);
      } else {
        merged.push_back(s);
      }
    }
    return merged;
  }

 private:
  struct Window {
    double t0, t1, sigma, amp, phase, detuning;
  };
  std::vector<Window> windows_;
  double total_ = 0.0;
};

// Linear interpolation into a noise trace; time in ns from sequence start.
class NoiseLookup {
 public:
  NoiseLookup(const NoiseTrace* trace, double sens1_ghz, double sens2_ghz,
              double static_offset = 0.0)
      : trace_(trace),
        s1_mhz_(sens1_ghz * 1e3),
        s2_mhz_(sens2_ghz * 1e3),
        offset_(static_offset) {}

  bool active() const {
    return trace_ != nullptr && (s1_mhz_ != 0.0 || s2_mhz_ != 0.0);
  }

  // Instantaneous frequency shift in MHz.
  double shift_mhz(double t_ns) const {
    if (!active()) return 0.0;
    const double dn = sample(t_ns) + offset_;
    return s1_mhz_ * dn + 0.5 * s2_mhz_ * dn * dn;
  }

  void check_span(double t_max_ns) const {
    if (trace_ == nullptr) return;
    if (t_max_ns * 1e-9 > trace_->duration_s() + 1e-15) {
      throw std::invalid_argument(
          "evolve: noise trace shorter than the pulse sequence");
    }
  }

 private:
  double sample(double t_ns) const {
    const double u = t_ns * 1e-9 / trace_->dt_s;
    if (u <= 0.0) return trace_->samples.front();
    const auto i = static_cast<std::size_t>(u);
    if (i + 1 >= trace_->samples.size()) return trace_->samples.back();
    const double frac = u - static_cast<double>(i);
    return trace_->samples[i] +
           frac * (trace_->samples[i + 1] - trace_->samples[i]);
  }

  const NoiseTrace* trace_;
  double s1_mhz_;
  double s2_mhz_;
  double offset_;
};

struct Rates {
  double gamma1_per_ns = 0.0;
  double gamma2_per_ns = 0.0;
};

Rates rates_from_t1(double t1_s) {
  Rates r;
  if (t1_s > 0.0) {
    r.gamma1_per_ns = 1e-9 / t1_s;
    r.gamma2_per_ns = 0.5 * r.gamma1_per_ns;
  }
  return r;
}

BlochState bloch_derivative(const BlochState& s, std::complex<double> drive_mhz,
                            double noise_shift_mhz, const Rates& r) {
  const double bx = kTwoPiMhzNs * drive_mhz.real();
  const double by = kTwoPiMhzNs * drive_mhz.imag();
  const double bz = -kTwoPiMhzNs * noise_shift_mhz;
  BlochState d;
  d.x = by * s.z - bz * s.y - r.gamma2_per_ns * s.x;
  d.y = bz * s.x - bx * s.z - r.gamma2_per_ns * s.y;
  d.z = bx * s.y - by * s.x + r.gamma1_per_ns * (1.0 - s.z);
  return d;
}

BlochState rk4_step(const BlochState& s, double t, double dt,
                    const SequenceEnvelope& env, const NoiseLookup& noise,
                    const Rates& r) {
  auto f = [&](double tt, const BlochState& ss) {
    return bloch_derivative(ss, env.drive_mhz(tt), noise.shift_mhz(tt), r);
  };
  const BlochState k1 = f(t, s);
  BlochState s2{s.x + 0.5 * dt * k1.x, s.y + 0.5 * dt * k1.y,
                s.z + 0.5 * dt * k1.z};
  const BlochState k2 = f(t + 0.5 * dt, s2);
  BlochState s3{s.x + 0.5 * dt * k2.x, s.y + 0.5 * dt * k2.y,
                s.z + 0.5 * dt * k2.z};
  const BlochState k3 = f(t + 0.5 * dt, s3);
  BlochState s4{s.x + dt * k3.x, s.y + dt * k3.y, s.z + dt * k3.z};
  const BlochState k4 = f(t + dt, s4);
  return BlochState{
      s.x + dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
      s.y + dt / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
      s.z + dt / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z)};
}

BlochState rk4_span(BlochState s, double t0, double t1, double dt,
                    const SequenceEnvelope& env, const NoiseLookup& noise,
                    const Rates& r) {
  if (t1 <= t0) return s;
  const auto n = static_cast<std::size_t>(std::ceil((t1 - t0) / dt - 1e-12));
  const double h = (t1 - t0) / static_cast<double>(n);
  double t = t0;
  for (std::size_t i = 0; i < n; ++i) {
    s = rk4_step(s, t, h, env, noise, r);
    t += h;
  }
  return s;
}

void check_step_size(const SequenceEnvelope& env, double dt_ns) {
  if (!(dt_ns > 0.0) || dt_ns > 1.0) {
    throw std::invalid_argument("evolve: require 0 < dt <= 1 ns");
  }
  const double min_edge = env.min_edge_ns();
  if (min_edge > 0.0 && dt_ns > min_edge / 3.0) {
    throw std::invalid_argument("evolve: require dt <= edge/3 for shaped pulses");
  }
}

}  // namespace

Trajectory evolve(const PulseSequence& seq, double t1_s,
                  const NoiseTrace* noise, double sens1_ghz, double sens2_ghz,
                  double dt_ns, BlochState initial) {
  seq.validate();
  const SequenceEnvelope env(seq);
  check_step_size(env, dt_ns);
  const NoiseLookup lookup(noise, sens1_ghz, sens2_ghz);
  lookup.check_span(env.total_ns());
  const Rates r = rates_from_t1(t1_s);

  const auto n_steps =
      static_cast<std::size_t>(std::ceil(env.total_ns() / dt_ns - 1e-12));
  Trajectory traj;
  traj.t_ns.reserve(n_steps + 1);
  traj.states.reserve(n_steps + 1);
  BlochState s = initial;
  double t = 0.0;
  traj.t_ns.push_back(t);
  traj.states.push_back(s);
  for (std::size_t i = 0; i < n_steps; ++i) {
    const double h = std::min(dt_ns, env.total_ns() - t);
    s = rk4_step(s, t, h, env, lookup, r);
    t += h;
    if (s.x * s.x + s.y * s.y + s.z * s.z > 1.0 + 1e-9) {
      throw std::runtime_error("evolve: Bloch norm exceeded 1 + 1e-9");
    }
    traj.t_ns.push_back(t);
    traj.states.push_back(s);
  }
  return traj;
}

namespace {

PulseSegment delay_segment(double duration_ns) {
  PulseSegment s;
  s.duration_ns = duration_ns;
  s.rabi_mhz = 0.0;
  s.edge_ns = 0.0;
  return s;
}

double repetition_delay_ms_for(double t1_s) {
  const double five_t1_ms = 5.0 * t1_s * 1e3;
  return std::clamp(five_t1_ms, 0.2, 2.0);
}

// Shared machinery for the averaged pulse experiments: RK4 through the
// drive-active intervals, exact free evolution elsewhere using trapezoid
// prefix integrals of the noise trace.
class SequenceRunner {
 public:
  SequenceRunner(const PulseSequence& seq, double t1_s, double dt_ns)
      : env_(seq), rates_(rates_from_t1(t1_s)), dt_ns_(dt_ns) {
    seq.validate();
    check_step_size(env_, dt_ns);
    intervals_ = env_.active_intervals();
  }

  double total_ns() const { return env_.total_ns(); }

  // Noise integrals are provided by the caller as prefix sums over the
  // trace grid (seconds); empty vectors mean no noise.
  BlochState run(const NoiseLookup& lookup, const std::vector<double>& cum1,
                 const std::vector<double>& cum2, double trace_dt_s,
                 double static_offset, double s1_ghz, double s2_ghz) const {
    BlochState s;  // ground state
    double t = 0.0;
    const double total = env_.total_ns();
    for (const auto& [a0, b0] : intervals_) {
      const double a = std::max(a0, 0.0);
      const double b = std::min(b0, total);
      if (b <= t) continue;
      if (a > t) {
        s = free_evolve(s, t, a, cum1, cum2, trace_dt_s, static_offset,
                        s1_ghz, s2_ghz);
        t = a;
      }
      s = rk4_span(s, t, b, dt_ns_, env_, lookup, rates_);
      t = b;
    }
    if (t < total) {
      s = free_evolve(s, t, total, cum1, cum2, trace_dt_s, static_offset,
                      s1_ghz, s2_ghz);
    }
    return s;
  }

 private:
  BlochState free_evolve(BlochState s, double t0_ns, double t1_ns,
                         const std::vector<double>& cum1,
                         const std::vector<double>& cum2, double trace_dt_s,
                         double static_offset, double s1_ghz,
                         double s2_ghz) const {
    const double span_s = (t1_ns - t0_ns) * 1e-9;
    double theta = 0.0;
    if (!cum1.empty()) {
      const double i1 = interp(cum1, t1_ns, trace_dt_s) -
                        interp(cum1, t0_ns, trace_dt_s) +
                        static_offset * span_s;
      // (dn + dn0)^2 = dn^2 + 2 dn0 dn + dn0^2
      const double i2 = interp(cum2, t1_ns, trace_dt_s) -
                        interp(cum2, t0_ns, trace_dt_s) +
                        2.0 * static_offset *
                            (interp(cum1, t1_ns, trace_dt_s) -
                             interp(cum1, t0_ns, trace_dt_s)) +
                        static_offset * static_offset * span_s;
      theta = 2.0 * kPi * (s1_ghz * kGhz * i1 + 0.5 * s2_ghz * kGhz * i2);
    }
    const double c = std::cos(theta);
    const double sn = std::sin(theta);
    // transverse rotation by -theta, matching b_z = -2 pi df
    const double x = s.x * c + s.y * sn;
    const double y = -s.x * sn + s.y * c;
    double decay2 = 1.0, decay1 = 0.0;
    if (rates_.gamma1_per_ns > 0.0) {
      decay2 = std::exp(-rates_.gamma2_per_ns * (t1_ns - t0_ns));
      decay1 = std::exp(-rates_.gamma1_per_ns * (t1_ns - t0_ns));
      s.z = 1.0 + (s.z - 1.0) * decay1;
    }
    s.x = x * decay2;
    s.y = y * decay2;
    return s;
  }

  static double interp(const std::vector<double>& cum, double t_ns,
                       double trace_dt_s) {
    const double u = t_ns * 1e-9 / trace_dt_s;
    if (u <= 0.0) return cum.front();
    const auto i = static_cast<std::size_t>(u);
    if (i + 1 >= cum.size()) return cum.back();
    const double frac = u - static_cast<double>(i);
    return cum[i] + frac * (cum[i + 1] - cum[i]);
  }

  SequenceEnvelope env_;
  Rates rates_;
  double dt_ns_;
  std::vector<std::pair<double, double>> intervals_;
};

struct RealizationNoise {
  NoiseTrace trace;
  std::vector<double> cum1, cum2;
  double static_offset = 0.0;
};

RealizationNoise make_realization(const NoiseCoupling& nc, double span_s,
                                  double trace_dt_s, std::uint64_t sub_seed,
                                  int realization, int n_realizations) {
  RealizationNoise rn;
  const std::size_t n_fft = next_power_of_two(
      static_cast<std::size_t>(std::llround(span_s / trace_dt_s)));
  const double f_low = 1.0 / (static_cast<double>(n_fft) * trace_dt_s);
  // Quasistatic offsets stratified over Gaussian quantiles, as in
  // mc_dephasing.
  const double quantile = (static_cast<double>(realization) + 0.5) /
                          static_cast<double>(n_realizations);
  rn.static_offset = std::sqrt(quasistatic_variance(nc.psd, 0.5 * f_low)) *
                     inverse_normal_cdf(quantile);
  rn.trace = synth_trace(nc.psd, span_s, trace_dt_s, sub_seed);
  const auto n = rn.trace.samples.size();
  rn.cum1.resize(n);
  rn.cum2.resize(n);
  rn.cum1[0] = 0.0;
  rn.cum2[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double a = rn.trace.samples[i - 1];
    const double b = rn.trace.samples[i];
    rn.cum1[i] = rn.cum1[i - 1] + 0.5 * (a + b) * trace_dt_s;
    rn.cum2[i] = rn.cum2[i - 1] + 0.5 * (a * a + b * b) * trace_dt_s;
  }
  return rn;
}

constexpr double kLeadNs = 20.0;       // covers the 5 sigma pulse bleed
constexpr double kTraceDtS = 4e-9;

}  // namespace

double calibrate_pi_half_ns(double f_rabi_mhz, double edge_ns, double dt_ns) {
  if (!(f_rabi_mhz > 0.0)) {
    throw std::invalid_argument("calibrate_pi_half: Rabi amplitude must be > 0");
  }
  const double nominal = 250.0 / f_rabi_mhz;  // quarter period in ns
  auto z_after = [&](double d_ns) {
    PulseSequence seq;
    seq.segments.push_back(delay_segment(kLeadNs));
    PulseSegment p;
    p.duration_ns = d_ns;
    p.rabi_mhz = f_rabi_mhz;
    p.edge_ns = edge_ns;
    seq.segments.push_back(p);
    seq.segments.push_back(delay_segment(kLeadNs));
    const auto traj = evolve(seq, 0.0, nullptr, 0.0, 0.0, dt_ns);
    return traj.states.back().z;
  };
  double lo = 0.6 * nominal, hi = 1.4 * nominal;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (z_after(mid) > 0.0) {
      lo = mid;  // under-rotated
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

PeTable averaged_experiment(
    const std::vector<double>& xs, double t1_s,
    const std::optional<NoiseCoupling>& noise, int n_realizations,
    std::uint64_t seed, double dt_ns, double span_max_ns,
    const std::function<PulseSequence(double)>& make_seq) {
  PeTable out;
  out.x = xs;
  out.p_e.assign(xs.size(), 0.0);

  std::vector<SequenceRunner> runners;
  runners.reserve(xs.size());
  for (const double x : xs) runners.emplace_back(make_seq(x), t1_s, dt_ns);

  if (!noise || noise->psd.amplitude_1hz == 0.0) {
    const NoiseLookup lookup(nullptr, 0.0, 0.0);
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const BlochState s =
          runners[j].run(lookup, {}, {}, 1.0, 0.0, 0.0, 0.0);
      out.p_e[j] = s.p_excited();
    }
    return out;
  }

  // The synthesized record is periodic and carries nothing below
  // 1/duration; stretch it well past the sequence span so the slow part
  // of the spectrum (handled as a quasistatic offset) stays below the
  // dephasing filters' passbands.
  const double span_s = (span_max_ns + 2.0 * kLeadNs) * 1e-9;
  const double record_s = 16.0 * span_s;
  for (int r = 0; r < n_realizations; ++r) {
    const std::uint64_t sub = Rng::derive(seed, static_cast<std::uint64_t>(r));
    const RealizationNoise rn =
        make_realization(*noise, std::max(record_s, 64 * kTraceDtS), kTraceDtS,
                         sub, r, n_realizations);
    const NoiseLookup lookup(&rn.trace, noise->sens1_ghz, noise->sens2_ghz,
                             rn.static_offset);
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const BlochState s =
          runners[j].run(lookup, rn.cum1, rn.cum2, kTraceDtS,
                         rn.static_offset, noise->sens1_ghz, noise->sens2_ghz);
      out.p_e[j] += s.p_excited();
    }
  }
  for (auto& p : out.p_e) p /= static_cast<double>(n_realizations);
  return out;
}

}  // namespace

PeTable rabi_experiment(const RabiConfig& cfg) {
  if (cfg.durations_ns.empty()) {
    throw std::invalid_argument("rabi_experiment: empty duration grid");
  }
  const double f_rabi =
      cfg.drive_amplitude_uv * cfg.coupling_mhz_per_uv;
  const double span_max =
      *std::max_element(cfg.durations_ns.begin(), cfg.durations_ns.end());
  auto make_seq = [&](double d_ns) {
    PulseSequence seq;
    seq.repetition_delay_ms = repetition_delay_ms_for(cfg.t1_s);
    seq.segments.push_back(delay_segment(kLeadNs));
    if (d_ns > 0.0 && f_rabi > 0.0) {
      PulseSegment p;
      p.duration_ns = d_ns;
      p.rabi_mhz = f_rabi;
      p.edge_ns = std::min(cfg.edge_ns, 0.5 * d_ns);
      seq.segments.push_back(p);
    } else if (d_ns > 0.0) {
      seq.segments.push_back(delay_segment(d_ns));
    }
    seq.segments.push_back(delay_segment(kLeadNs));
    return seq;
  };
  return averaged_experiment(cfg.durations_ns, cfg.t1_s, cfg.noise,
                             cfg.n_realizations, cfg.seed, cfg.dt_ns,
                             span_max, make_seq);
}

PeTable ramsey_experiment(const RamseyConfig& cfg) {
  if (cfg.taus_ns.empty()) {
    throw std::invalid_argument("ramsey_experiment: empty tau grid");
  }
  const double pi2 = 250.0 / cfg.f_rabi_mhz;
  const double tau_max =
      *std::max_element(cfg.taus_ns.begin(), cfg.taus_ns.end());
  auto make_seq = [&](double tau_ns) {
    PulseSequence seq;
    seq.repetition_delay_ms = repetition_delay_ms_for(cfg.t1_s);
    seq.segments.push_back(delay_segment(kLeadNs));
    PulseSegment p;
    p.duration_ns = pi2;
    p.rabi_mhz = cfg.f_rabi_mhz;
    p.detuning_mhz = cfg.detuning_mhz;
    p.edge_ns = std::min(cfg.edge_ns, 0.5 * pi2);
    seq.segments.push_back(p);
    seq.segments.push_back(delay_segment(tau_ns));
    seq.segments.push_back(p);
    seq.segments.push_back(delay_segment(kLeadNs));
    return seq;
  };
  return averaged_experiment(cfg.taus_ns, cfg.t1_s, cfg.noise,
                             cfg.n_realizations, cfg.seed, cfg.dt_ns,
                             tau_max + 2.0 * pi2, make_seq);
}

PeTable echo_experiment(const EchoConfig& cfg) {
  if (cfg.taus_ns.empty()) {
    throw std::invalid_argument("echo_experiment: empty tau grid");
  }
  const double pi2 = 250.0 / cfg.f_rabi_mhz;
  const double tau_max =
      *std::max_element(cfg.taus_ns.begin(), cfg.taus_ns.end());
  auto make_seq = [&](double tau_ns) {
    PulseSequence seq;
    seq.repetition_delay_ms = repetition_delay_ms_for(cfg.t1_s);
    seq.segments.push_back(delay_segment(kLeadNs));
    PulseSegment p2;
    p2.duration_ns = pi2;
    p2.rabi_mhz = cfg.f_rabi_mhz;
    p2.edge_ns = std::min(cfg.edge_ns, 0.5 * pi2);
    seq.segments.push_back(p2);
    seq.segments.push_back(delay_segment(0.5 * tau_ns));
    PulseSegment ppi = p2;  // out-of-phase pi pulse
    ppi.duration_ns = 2.0 * pi2;
    ppi.phase_rad = 0.5 * kPi;
    ppi.edge_ns = std::min(cfg.edge_ns, pi2);
    seq.segments.push_back(ppi);
    seq.segments.push_back(delay_segment(0.5 * tau_ns));
    // Closing in-phase pi/2: maps the refocused coherence onto the
    // excited state, so the recorded P_e decays monotonically from 1
    // toward the fully dephased 1/2.
    seq.segments.push_back(p2);
    seq.segments.push_back(delay_segment(kLeadNs));
    return seq;
  };
  return averaged_experiment(cfg.taus_ns, cfg.t1_s, cfg.noise,
                             cfg.n_realizations, cfg.seed, cfg.dt_ns,
                             tau_max + 4.0 * pi2, make_seq);
}

PeTable t1_experiment(const T1Config& cfg) {
  if (!(cfg.t1_s > 0.0) || !(cfg.window_s > 0.0) || !(cfg.dt_s > 0.0)) {
    throw std::invalid_argument("t1_experiment: need positive T1, window, dt");
  }
  PeTable out;
  const auto n = static_cast<std::size_t>(cfg.window_s / cfg.dt_s) + 1;
  out.x.resize(n);
  out.p_e.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * cfg.dt_s;
    out.x[i] = t * 1e6;  // microseconds
    out.p_e[i] = 0.5 * std::exp(-t / cfg.t1_s);
  }
  return out;
}

namespace {

CwMap cw_map_from_lines(
    const CwConfig& cfg,
    const std::function<std::vector<BranchLine>(double)>& lines_at) {
  if (cfg.n_g.empty() || cfg.f_pump_ghz.empty()) {
    throw std::invalid_argument("cw_spectroscopy: empty grid");
  }
  if (!(cfg.t1_s > 0.0) || !(cfg.t2_s > 0.0)) {
    throw std::invalid_argument("cw_spectroscopy: need positive T1 and T2");
  }
  const double omega = 2.0 * kPi * cfg.f_rabi_mhz * kMhz;  // rad/s
  const double sat = omega * omega * cfg.t1_s * cfg.t2_s;
  CwMap map;
  map.n_g = cfg.n_g;
  map.f_pump_ghz = cfg.f_pump_ghz;
  map.p_e.assign(cfg.n_g.size(),
                 std::vector<double>(cfg.f_pump_ghz.size(), 0.0));
  for (std::size_t i = 0; i < cfg.n_g.size(); ++i) {
    const auto lines = lines_at(cfg.n_g[i]);
    for (std::size_t j = 0; j < cfg.f_pump_ghz.size(); ++j) {
      double pe = 0.0;
      for (const auto& line : lines) {
        const double delta_hz =
            (cfg.f_pump_ghz[j] - line.frequency_ghz) * kGhz;
        const double dw = 2.0 * kPi * delta_hz * cfg.t2_s;
        pe += line.weight * 0.5 * sat / (1.0 + dw * dw + sat);
      }
      map.p_e[i][j] = pe;
    }
  }
  return map;
}

}  // namespace

CwMap cw_spectroscopy(const DefectSpectrumModel& model, const CwConfig& cfg) {
  model.validate();
  return cw_map_from_lines(
      cfg, [&](double ng) { return defect_spectrum(model, ng); });
}

CwMap cw_spectroscopy(const CpbParams& cpb, const CwConfig& cfg) {
  return cw_map_from_lines(cfg, [&](double ng) {
    return std::vector<BranchLine>{{transition_frequency(cpb, ng), 1.0}};
  });
}

}  // namespace vlab
