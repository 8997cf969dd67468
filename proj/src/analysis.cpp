#include "vlab/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "vlab/constants.hpp"
#include "vlab/fft.hpp"

namespace vlab {

double FitResult::value(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return values[i];
  }
  throw std::invalid_argument("FitResult: unknown parameter " + name);
}

double FitResult::std_error(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return std_errors[i];
  }
  throw std::invalid_argument("FitResult: unknown parameter " + name);
}

bool FitResult::has_flag(const std::string& flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

namespace {

// model(x, p) and jacobian row d model / d p.
struct Model {
  std::function<double(double, const Eigen::VectorXd&)> eval;
  std::function<void(double, const Eigen::VectorXd&, Eigen::RowVectorXd&)> jac;
};

FitResult levenberg_marquardt(const std::vector<double>& xs,
                              const std::vector<double>& ys,
                              const Model& model, Eigen::VectorXd p,
                              const std::vector<std::string>& names,
                              int max_iter = 200) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  const auto np = p.size();
  Eigen::VectorXd resid(n);
  Eigen::MatrixXd jac(n, np);
  Eigen::RowVectorXd row(np);

  auto residuals = [&](const Eigen::VectorXd& params, Eigen::VectorXd& r) {
    for (Eigen::Index i = 0; i < n; ++i) {
      r(i) = ys[static_cast<std::size_t>(i)] -
             model.eval(xs[static_cast<std::size_t>(i)], params);
    }
    return 0.5 * r.squaredNorm();
  };

  double cost = residuals(p, resid);
  double lambda = 1e-3;
  bool converged = false;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    for (Eigen::Index i = 0; i < n; ++i) {
      model.jac(xs[static_cast<std::size_t>(i)], p, row);
      jac.row(i) = row;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * resid;
    const double gnorm = g.lpNorm<Eigen::Infinity>();
    const double scale = std::max(1.0, std::abs(cost));
    if (gnorm < 1e-12 * scale) {
      converged = true;
      break;
    }
    bool stepped = false;
    for (int tries = 0; tries < 40; ++tries) {
      Eigen::MatrixXd a = jtj;
      for (Eigen::Index k = 0; k < np; ++k) {
        a(k, k) += lambda * std::max(jtj(k, k), 1e-30);
      }
      const Eigen::VectorXd step = -a.ldlt().solve(g);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd trial = p + step;
      Eigen::VectorXd trial_resid(n);
      const double trial_cost = residuals(trial, trial_resid);
      if (trial_cost < cost) {
        const double rel_step = step.norm() / std::max(p.norm(), 1e-30);
        p = trial;
        resid = trial_resid;
        cost = trial_cost;
        lambda = std::max(lambda * 0.3, 1e-14);
        stepped = true;
        if (rel_step < 1e-14) converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!stepped) {
      converged = true;  // stalled: no descent direction left
      break;
    }
    if (converged) break;
  }

  FitResult out;
  out.names = names;
  out.values.assign(p.data(), p.data() + np);
  out.iterations = iter;
  out.converged = converged;
  out.residual_rms = std::sqrt(resid.squaredNorm() / static_cast<double>(n));

  // Standard errors from the linearized covariance at the solution.
  out.std_errors.assign(static_cast<std::size_t>(np), 0.0);
  if (n > np) {
    for (Eigen::Index i = 0; i < n; ++i) {
      model.jac(xs[static_cast<std::size_t>(i)], p, row);
      jac.row(i) = row;
    }
    const double sigma2 = resid.squaredNorm() / static_cast<double>(n - np);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::MatrixXd cov =
        jtj.completeOrthogonalDecomposition().pseudoInverse() * sigma2;
    for (Eigen::Index k = 0; k < np; ++k) {
      const double v = cov(k, k);
      out.std_errors[static_cast<std::size_t>(k)] =
          v > 0.0 ? std::sqrt(v) : 0.0;
    }
  }
  return out;
}

double span_of(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

}  // namespace

FitResult fit_exp_decay(const std::vector<double>& t,
                        const std::vector<double>& y) {
  if (t.size() != y.size() || t.size() < 8) {
    throw std::invalid_argument("fit_exp_decay: need >= 8 points");
  }
  const double y_span = span_of(y);
  const double y_scale = std::max(
      std::abs(*std::max_element(y.begin(), y.end(),
                                 [](double a, double b) {
                                   return std::abs(a) < std::abs(b);
                                 })),
      1e-300);
  // Degenerate constant input: report it rather than iterating blindly.
  if (y_span < 1e-12 * y_scale) {
    FitResult out;
    out.names = {"amplitude", "tau", "offset"};
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) /
                        static_cast<double>(y.size());
    out.values = {0.0, span_of(t), mean};
    out.std_errors = {0.0, 0.0, 0.0};
    out.converged = true;
    out.flags = {"tau_unidentifiable"};
    return out;
  }

  // Log-linear pre-fit for the initialization.
  const double c0 = *std::min_element(y.begin(), y.end());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int m = 0;
  const double floor = 0.05 * y_span;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = y[i] - c0;
    if (r > floor) {
      const double ly = std::log(r);
      sx += t[i];
      sy += ly;
      sxx += t[i] * t[i];
      sxy += t[i] * ly;
      ++m;
    }
  }
  double tau0 = span_of(t) / 2.0;
  double a0 = y.front() - c0;
  if (m >= 2) {
    const double denom = m * sxx - sx * sx;
    if (std::abs(denom) > 0.0) {
      const double slope = (m * sxy - sx * sy) / denom;
      const double intercept = (sy - slope * sx) / m;
      if (slope < 0.0) tau0 = -1.0 / slope;
      a0 = std::exp(intercept);
    }
  }

  Model model;
  model.eval = [](double x, const Eigen::VectorXd& p) {
    return p(0) * std::exp(-x / p(1)) + p(2);
  };
  model.jac = [](double x, const Eigen::VectorXd& p, Eigen::RowVectorXd& row) {
    const double e = std::exp(-x / p(1));
    row(0) = -e;
    row(1) = -p(0) * e * x / (p(1) * p(1));
    row(2) = -1.0;
  };
  Eigen::VectorXd p0(3);
  p0 << a0, tau0, c0;
  auto out = levenberg_marquardt(t, y, model, p0,
                                 {"amplitude", "tau", "offset"});
  if (std::abs(out.values[0]) < 1e-9 * y_scale) {
    out.flags.push_back("tau_unidentifiable");
  }
  return out;
}

FitResult fit_damped_sinusoid(const std::vector<double>& t,
                              const std::vector<double>& y) {
  if (t.size() != y.size() || t.size() < 16) {
    throw std::invalid_argument("fit_damped_sinusoid: need >= 16 points");
  }
  const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  const double mean =
      std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  std::vector<double> centered(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) centered[i] = y[i] - mean;

  // Periodogram peak (zero-padded 4x for interpolation accuracy).
  std::vector<double> padded = centered;
  padded.resize(next_power_of_two(4 * centered.size()), 0.0);
  const auto psd = periodogram(padded, dt);
  std::size_t peak = 1;
  for (std::size_t k = 2; k + 1 < psd.size(); ++k) {
    if (psd[k] > psd[peak]) peak = k;
  }
  std::vector<double> sorted_psd(psd.begin() + 1, psd.end());
  std::sort(sorted_psd.begin(), sorted_psd.end());
  const double median = sorted_psd[sorted_psd.size() / 2];

  FitResult out;
  if (psd[peak] < 6.0 * std::max(median, 1e-300)) {
    out.names = {"amplitude", "tau", "frequency", "phase", "offset"};
    out.values = {0.0, span_of(t), 0.0, 0.0, mean};
    out.std_errors.assign(5, 0.0);
    out.converged = false;
    out.flags = {"no_spectral_peak"};
    return out;
  }
  const double df =
      1.0 / (static_cast<double>(padded.size()) * dt);
  // Parabolic refinement of the peak bin.
  double f0 = static_cast<double>(peak) * df;
  if (peak + 1 < psd.size() && peak >= 1) {
    const double la = std::log(std::max(psd[peak - 1], 1e-300));
    const double lb = std::log(std::max(psd[peak], 1e-300));
    const double lc = std::log(std::max(psd[peak + 1], 1e-300));
    const double denom = la - 2.0 * lb + lc;
    if (denom < 0.0) f0 += 0.5 * (la - lc) / denom * df;
  }

  // Quadrature projections at f0 for amplitude and phase.
  std::complex<double> zsum{0.0, 0.0};
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double ang = 2.0 * kPi * f0 * t[i];
    zsum += centered[i] * std::complex<double>(std::cos(ang), -std::sin(ang));
  }
  const double a0 = 2.0 * std::abs(zsum) / static_cast<double>(t.size());
  const double phi0 = std::arg(zsum);
  const double tau0 = span_of(t) / 2.0;

  Model model;
  model.eval = [](double x, const Eigen::VectorXd& p) {
    return p(0) * std::exp(-x / p(1)) * std::cos(2.0 * kPi * p(2) * x + p(3)) +
           p(4);
  };
  model.jac = [](double x, const Eigen::VectorXd& p, Eigen::RowVectorXd& row) {
    const double e = std::exp(-x / p(1));
    const double arg = 2.0 * kPi * p(2) * x + p(3);
    const double c = std::cos(arg);
    const double s = std::sin(arg);
    row(0) = -e * c;
    row(1) = -p(0) * e * c * x / (p(1) * p(1));
    row(2) = p(0) * e * s * 2.0 * kPi * x;
    row(3) = p(0) * e * s;
    row(4) = -1.0;
  };
  Eigen::VectorXd p0(5);
  p0 << a0, tau0, f0, phi0, mean;
  out = levenberg_marquardt(t, y, model, p0,
                            {"amplitude", "tau", "frequency", "phase",
                             "offset"});
  const double y_scale = std::max(std::abs(span_of(y)), 1e-300);
  if (std::abs(out.values[0]) < 1e-9 * y_scale) {
    out.flags.push_back("amplitude_unidentifiable");
  }
  return out;
}

FitResult fit_parabola_spectrum(const std::vector<double>& n_g,
                                const std::vector<double>& f_ghz) {
  if (n_g.size() != f_ghz.size() || n_g.size() < 5) {
    throw std::invalid_argument("fit_parabola_spectrum: need >= 5 points");
  }
  FitResult out;
  if (span_of(n_g) < 1e-6) {
    out.names = {"e_c", "e_j"};
    out.values = {0.0, *std::min_element(f_ghz.begin(), f_ghz.end())};
    out.std_errors = {0.0, 0.0};
    out.converged = false;
    out.flags = {"e_c_unidentifiable"};
    return out;
  }
  const double ej0 = *std::min_element(f_ghz.begin(), f_ghz.end());
  // Farthest point from the sweet spot pins the curvature initialization.
  std::size_t far = 0;
  for (std::size_t i = 1; i < n_g.size(); ++i) {
    if (std::abs(n_g[i] - 1.0) > std::abs(n_g[far] - 1.0)) far = i;
  }
  double ec0 = 5.0;
  const double wing = f_ghz[far] * f_ghz[far] - ej0 * ej0;
  if (wing > 0.0 && std::abs(n_g[far] - 1.0) > 1e-9) {
    ec0 = std::sqrt(wing) / (4.0 * std::abs(1.0 - n_g[far]));
  }

  Model model;
  model.eval = [](double x, const Eigen::VectorXd& p) {
    return std::hypot(4.0 * p(0) * (1.0 - x), p(1));
  };
  model.jac = [](double x, const Eigen::VectorXd& p, Eigen::RowVectorXd& row) {
    const double u = 4.0 * p(0) * (1.0 - x);
    const double f = std::hypot(u, p(1));
    row(0) = -u * 4.0 * (1.0 - x) / f;
    row(1) = -p(1) / f;
  };
  Eigen::VectorXd p0(2);
  p0 << ec0, ej0;
  out = levenberg_marquardt(n_g, f_ghz, model, p0, {"e_c", "e_j"});
  return out;
}

RabiCouplingResult rabi_coupling(const std::vector<double>& amplitude_uv,
                                 const std::vector<double>& f_rabi_mhz) {
  if (amplitude_uv.size() != f_rabi_mhz.size() || amplitude_uv.size() < 3) {
    throw std::invalid_argument("rabi_coupling: need >= 3 amplitudes");
  }
  std::vector<std::size_t> order(amplitude_uv.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return amplitude_uv[a] < amplitude_uv[b];
  });
  RabiCouplingResult out;
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (f_rabi_mhz[order[i]] <= f_rabi_mhz[order[i - 1]]) {
      out.flags.push_back("non_monotone");
      break;
    }
  }
  double saa = 0.0, saf = 0.0;
  for (std::size_t i = 0; i < amplitude_uv.size(); ++i) {
    saa += amplitude_uv[i] * amplitude_uv[i];
    saf += amplitude_uv[i] * f_rabi_mhz[i];
  }
  if (saa == 0.0) {
    throw std::invalid_argument("rabi_coupling: zero drive amplitudes");
  }
  out.coupling_mhz_per_uv = saf / saa;
  out.decoupling_uv_per_mhz =
      out.coupling_mhz_per_uv != 0.0 ? 1.0 / out.coupling_mhz_per_uv : 0.0;
  double ss_res = 0.0, ss_tot = 0.0;
  const double fmean =
      std::accumulate(f_rabi_mhz.begin(), f_rabi_mhz.end(), 0.0) /
      static_cast<double>(f_rabi_mhz.size());
  for (std::size_t i = 0; i < amplitude_uv.size(); ++i) {
    const double pred = out.coupling_mhz_per_uv * amplitude_uv[i];
    ss_res += (f_rabi_mhz[i] - pred) * (f_rabi_mhz[i] - pred);
    ss_tot += (f_rabi_mhz[i] - fmean) * (f_rabi_mhz[i] - fmean);
  }
  out.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return out;
}

FitResult linewidth_t2(const std::vector<double>& f_mhz,
                       const std::vector<double>& p_e) {
  if (f_mhz.size() != p_e.size() || f_mhz.size() < 8) {
    throw std::invalid_argument("linewidth_t2: need >= 8 points");
  }
  const std::size_t imax = static_cast<std::size_t>(
      std::max_element(p_e.begin(), p_e.end()) - p_e.begin());
  const double c0 = *std::min_element(p_e.begin(), p_e.end());
  const double h0 = p_e[imax] - c0;
  const double fc0 = f_mhz[imax];
  // Half-maximum crossing estimate for the initial width.
  double w0 = span_of(f_mhz) / 8.0;
  for (std::size_t i = imax; i < p_e.size(); ++i) {
    if (p_e[i] - c0 < 0.5 * h0) {
      w0 = std::abs(f_mhz[i] - fc0);
      break;
    }
  }

  Model model;
  model.eval = [](double x, const Eigen::VectorXd& p) {
    const double u = (x - p(1)) / p(2);
    return p(0) / (1.0 + u * u) + p(3);
  };
  model.jac = [](double x, const Eigen::VectorXd& p, Eigen::RowVectorXd& row) {
    const double u = (x - p(1)) / p(2);
    const double den = 1.0 + u * u;
    row(0) = -1.0 / den;
    row(1) = -p(0) * 2.0 * u / (p(2) * den * den);
    row(2) = -p(0) * 2.0 * u * u / (p(2) * den * den);
    row(3) = -1.0;
  };
  Eigen::VectorXd p0(4);
  p0 << h0, fc0, std::max(w0, 1e-6), c0;
  auto out = levenberg_marquardt(f_mhz, p_e, model, p0,
                                 {"height", "center", "hwhm_mhz", "offset"});

  const double hwhm = std::abs(out.value("hwhm_mhz"));
  const double t2_ns = 1e3 / (2.0 * kPi * hwhm);
  out.names.push_back("t2_ns");
  out.values.push_back(t2_ns);
  out.std_errors.push_back(t2_ns * out.std_error("hwhm_mhz") /
                           std::max(hwhm, 1e-30));

  // On-resonance height 1/2 s/(1+s) inverts to the saturation parameter.
  const double h = out.value("height");
  if (h > 0.0 && h < 0.5) {
    const double sat = 2.0 * h / (1.0 - 2.0 * h);
    out.names.push_back("saturation");
    out.values.push_back(sat);
    out.std_errors.push_back(0.0);
    if (sat > 0.1) {
      out.flags.push_back("saturation_broadened");
      const double corrected = t2_ns * std::sqrt(1.0 + sat);
      out.names.push_back("t2_corrected_ns");
      out.values.push_back(corrected);
      out.std_errors.push_back(0.0);
    }
  }
  return out;
}

NoiseBounds noise_bounds(const NoiseBoundsInput& in) {
  if (!(in.t1_s > 0.0) || !(in.t2_star_s > 0.0) || !(in.e_c_ghz > 0.0) ||
      !(in.sens2_ghz > 0.0)) {
    throw std::invalid_argument("noise_bounds: inputs must be positive");
  }
  NoiseBounds out;
  out.sq_high_e2_per_hz = t1_to_sq(in.e_c_ghz, in.t1_s);

  // Sweet-spot FID 1/e time from the Monte Carlo oracle, bisected on the
  // 1/f amplitude. Larger amplitude shortens the decay, so the bracket is
  // monotone.
  std::vector<double> taus;
  for (int i = 1; i <= 24; ++i) {
    taus.push_back(in.t2_star_s * 0.25 * static_cast<double>(i));
  }
  auto time_1e_at = [&](double amplitude) {
    NoisePsd psd;
    psd.amplitude_1hz = amplitude;
    const auto curve = mc_dephasing(psd, 0.0, in.sens2_ghz, taus,
                                    in.n_realizations, in.seed,
                                    DephasingProtocol::kFreeInduction);
    const double target = std::exp(-1.0);
    for (std::size_t j = 1; j < curve.coherence.size(); ++j) {
      if (curve.coherence[j] <= target && curve.coherence[j - 1] > target) {
        const double frac = (curve.coherence[j - 1] - target) /
                            (curve.coherence[j - 1] - curve.coherence[j]);
        return curve.tau_s[j - 1] +
               frac * (curve.tau_s[j] - curve.tau_s[j - 1]);
      }
    }
    return curve.coherence.back() > target ? taus.back() * 2.0
                                           : taus.front() * 0.5;
  };

  double lo = 1e-12, hi = 1e-2;
  if (time_1e_at(lo) < in.t2_star_s || time_1e_at(hi) > in.t2_star_s) {
    throw std::runtime_error("noise_bounds: amplitude bracket failure");
  }
  for (int i = 0; i < 40; ++i) {
    const double mid = std::sqrt(lo * hi);
    if (time_1e_at(mid) > in.t2_star_s) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.sq_1hz_e2_per_hz = std::sqrt(lo * hi);
  return out;
}

double correlate(const std::vector<double>& f_a, const std::vector<double>& a,
                 const std::vector<double>& f_b, const std::vector<double>& b) {
  if (f_a.size() != a.size() || f_b.size() != b.size()) {
    throw std::invalid_argument("correlate: series length mismatch");
  }
  constexpr double kJoinWindowGhz = 0.1;  // 100 MHz
  std::vector<double> xa, xb;
  for (std::size_t i = 0; i < f_a.size(); ++i) {
    double best = kJoinWindowGhz;
    std::size_t match = f_b.size();
    for (std::size_t j = 0; j < f_b.size(); ++j) {
      const double d = std::abs(f_a[i] - f_b[j]);
      if (d <= best) {
        best = d;
        match = j;
      }
    }
    if (match < f_b.size()) {
      xa.push_back(a[i]);
      xb.push_back(b[match]);
    }
  }
  if (xa.size() < 4) {
    throw std::invalid_argument("correlate: fewer than 4 joined points");
  }
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
      std::size_t j = i;
      while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto ra = ranks(xa);
  const auto rb = ranks(xb);
  const double n = static_cast<double>(ra.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  if (da == 0.0 || db == 0.0) {
    throw std::invalid_argument("correlate: degenerate ranks");
  }
  return num / std::sqrt(da * db);
}

}  // namespace vlab
