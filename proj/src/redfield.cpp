#include "photoiso/redfield.hpp"

#include <gsl/gsl_sf_expint.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <limits>
#include <map>
#include <cmath>
#include <string>

#include "photoiso/errors.hpp"
#include "photoiso/units.hpp"

namespace photoiso {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using units::pi;

MatrixXd rate_generator(const MatrixXd& w) {
  MatrixXd K = w;
  K.diagonal().setZero();
  const VectorXd out = K.colwise().sum().transpose();
  K.diagonal() = -out;
  return K;
}

RedfieldModel assemble_rates(const TorsionalSystem& sys, const BathSpec& bath) {
  bath.validate();
  const int M = sys.size();
  RedfieldModel m;
  m.energies = sys.energies;
  m.mu = sys.mu;
  m.Q = sys.Q;
  m.C = bath.C();
  m.omega.resize(M, M);
  m.w_env = MatrixXd::Zero(M, M);
  m.w_spont = MatrixXd::Zero(M, M);
  m.w_rad = MatrixXd::Zero(M, M);
  const double kTe = bath.kT_env(), kTr = bath.kT_rad();
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) m.omega(i, j) = sys.energies[i] - sys.energies[j];

  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < M; ++j) {
      if (i == j) continue;
      // transition i -> j releases energy lambda_i - lambda_j
      const double release = sys.energies[i] - sys.energies[j];
      const double w = std::abs(release);
      if (w < kDegenerateOmega) {
        if (i < j) m.degenerate_pairs.emplace_back(i, j);
        continue;
      }
      const double q2 = sys.Q(j, i) * sys.Q(j, i);
      const double nb = bose(w, kTe);
      const double J = ohmic_density(w, bath);
      const auto ab = einstein_coefficients(sys.mu(j, i), w);
      m.w_env(j, i) = q2 * J * (release > 0 ? nb + 1.0 : nb);
      if (release > 0) m.w_spont(j, i) = ab.A;
      m.w_rad(j, i) = m.C * ab.B * planck_density(w, kTr);
    }
  }
  return m;
}

std::complex<double> trigamma(std::complex<double> z) {
  if (z.real() <= 0.0 && z.imag() == 0.0 && z.real() == std::floor(z.real()))
    throw DomainError("trigamma pole");
  std::complex<double> acc = 0.0;
  // reflection is not needed for Re z > 0; shift upwards until asymptotic
  while (std::abs(z) < 16.0) {
    acc += 1.0 / (z * z);
    z += 1.0;
  }
  const std::complex<double> r = 1.0 / z, r2 = r * r;
  // psi_1(z) ~ 1/z + 1/(2z^2) + sum_k B_2k / z^(2k+1)
  static constexpr double b[] = {1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66,
                                 -691.0 / 2730, 7.0 / 6};
  std::complex<double> series = 0.0, p = r * r2;
  for (double bk : b) {
    series += bk * p;
    p *= r2;
  }
  return acc + r + 0.5 * r2 + series;
}

std::complex<double> env_correlation(double tau, double omega_c, double kT) {
  const double a = 1.0 / omega_c;
  const std::complex<double> zp(a, tau), zm(a, -tau);
  const std::complex<double> vac = 1.0 / (zp * zp);
  const std::complex<double> th = kT * kT * (trigamma(1.0 + zp * kT) + trigamma(1.0 + zm * kT));
  return (vac + th) / (2.0 * pi);
}

namespace {

struct TauGrid {
  std::vector<double> re, im;
  double h = 0.0, T = 0.0, tail_c = 0.0;
};

TauGrid make_tau_grid(const BathSpec& bath, double step_fs, double horizon_fs) {
  TauGrid g;
  g.h = step_fs * units::fs;
  const long n = std::lround(horizon_fs / step_fs);
  g.T = n * g.h;
  g.re.resize(n + 1);
  g.im.resize(n + 1);
  for (long k = 0; k <= n; ++k) {
    const auto c = env_correlation(k * g.h, bath.omega_c(), bath.kT_env());
    g.re[k] = c.real();
    g.im[k] = c.imag();
  }
  g.tail_c = g.re[n] * g.T * g.T;  // Re C(tau) ~ c / tau^2 for large tau
  return g;
}

// Returns G(+w), G(-w), H(+w), H(-w) for w >= 0.
struct Pair {
  double gp, gm, hp, hm;
};

Pair half_fourier(const TauGrid& g, double w) {
  const size_t n = g.re.size() - 1;
  const std::complex<double> step = std::polar(1.0, w * g.h);
  std::complex<double> z = 1.0;
  double sc = 0.0, ss = 0.0, ic = 0.0, is = 0.0;
  for (size_t k = 0; k <= n; ++k) {
    const double wt = (k == 0 || k == n) ? 0.5 : 1.0;
    const double c = z.real(), s = z.imag();
    sc += wt * g.re[k] * c;
    ss += wt * g.im[k] * s;
    is += wt * g.re[k] * s;
    ic += wt * g.im[k] * c;
    z *= step;
  }
  double tail;
  if (w == 0.0) {
    tail = g.tail_c / g.T;
  } else {
    const double x = w * g.T;
    tail = g.tail_c * (std::cos(x) / g.T - w * (0.5 * pi - gsl_sf_Si(x)));
  }
  const double h = g.h;
  return {h * (sc - ss) + tail, h * (sc + ss) + tail, h * (is + ic), h * (ic - is)};
}

}  // namespace

HalfFourier env_half_fourier(const MatrixXd& omega, const BathSpec& bath, const QuadratureSpec& q) {
  if (!(q.step_fs > 0.0) || !(q.horizon_fs > q.step_fs))
    throw ConfigError("invalid quadrature specification");
  const int M = static_cast<int>(omega.rows());
  const TauGrid g = make_tau_grid(bath, q.step_fs, q.horizon_fs);
  HalfFourier hf;
  hf.re.resize(M, M);
  hf.im.resize(M, M);
  const Pair zero = half_fourier(g, 0.0);
  hf.zero_re = zero.gp;
  for (int i = 0; i < M; ++i) {
    hf.re(i, i) = zero.gp;
    hf.im(i, i) = zero.hp;
    for (int k = i + 1; k < M; ++k) {
      const double w = omega(i, k);
      const Pair p = half_fourier(g, std::abs(w));
      const bool pos = w >= 0;
      hf.re(i, k) = pos ? p.gp : p.gm;
      hf.re(k, i) = pos ? p.gm : p.gp;
      hf.im(i, k) = pos ? p.hp : p.hm;
      hf.im(k, i) = pos ? p.hm : p.hp;
    }
  }
  return hf;
}

MatrixXd assemble_dephasing(const RedfieldModel& m, const BathSpec& bath, const QuadratureSpec& q,
                            bool include_spontaneous, DephasingReport* report) {
  bath.validate();
  const int M = m.size();
  const HalfFourier hf = env_half_fourier(m.omega, bath, q);

  double conv = 0.0;
  if (q.check) {
    // refine on a sample of Bohr frequencies: half the step, double the horizon
    const TauGrid coarse = make_tau_grid(bath, q.step_fs, q.horizon_fs);
    const TauGrid fine = make_tau_grid(bath, 0.5 * q.step_fs, 2.0 * q.horizon_fs);
    std::vector<double> ws{0.0};
    const double wmax = m.omega.cwiseAbs().maxCoeff();
    for (int k = 1; k <= 24; ++k) ws.push_back(wmax * k / 24.0);
    std::vector<Pair> a, b;
    double big = 0.0;
    for (double w : ws) {
      a.push_back(half_fourier(coarse, w));
      b.push_back(half_fourier(fine, w));
      big = std::max({big, std::abs(b.back().gp), std::abs(b.back().gm)});
    }
    // values far below the largest rate cannot move gamma; judge them absolutely
    const double floor = 1e-4 * big + 1e-300;
    for (size_t k = 0; k < ws.size(); ++k)
      for (auto [x, y] : {std::pair{a[k].gp, b[k].gp}, std::pair{a[k].gm, b[k].gm}})
        conv = std::max(conv, std::abs(x - y) / std::max(std::abs(y), floor));
    if (conv > q.tolerance)
      throw NumericalError("dephasing quadrature not converged: relative change " +
                           std::to_string(conv) + " under refinement");
  }

  const MatrixXd Q2 = m.Q.cwiseAbs2();
  // S_i = sum_k Q_ik^2 G(omega_ik)
  VectorXd S(M), shift(M);
  for (int i = 0; i < M; ++i) {
    S[i] = Q2.row(i).dot(hf.re.row(i));
    shift[i] = bath.eta * Q2.row(i).dot(hf.im.row(i));
  }
  S *= bath.eta;
  const double G0 = bath.eta * hf.zero_re;
  VectorXd sp = VectorXd::Zero(M);
  if (include_spontaneous) sp = m.w_spont.colwise().sum().transpose();

  MatrixXd gamma = MatrixXd::Zero(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = i + 1; j < M; ++j) {
      double g = S[i] + S[j] - 2.0 * m.Q(i, i) * m.Q(j, j) * G0 + 0.5 * (sp[i] + sp[j]);
      gamma(i, j) = gamma(j, i) = g;
    }
  if (report) {
    report->convergence_error = conv;
    report->level_shifts = shift;
    report->max_level_shift = shift.cwiseAbs().maxCoeff();
  }
  return gamma;
}

// --- pulse ---------------------------------------------------------------------

void PulseSpec::validate() const {
  if (!(E0 >= 0.0)) throw ConfigError("pulse amplitude must be >= 0");
  if (!(fwhm_fs > 0.0)) throw ConfigError("pulse FWHM must be > 0");
}

double PulseSpec::envelope(double t_au) const {
  const double x = (t_au - t0_fs * units::fs) / (fwhm_fs * units::fs);
  if (shape == Envelope::Gaussian) return std::exp(-4.0 * std::log(2.0) * x * x);
  // cos^2 lobe of total duration 2 * FWHM
  if (std::abs(x) >= 1.0) return 0.0;
  const double c = std::cos(0.5 * pi * x);
  return c * c;
}

double PulseSpec::active_half_width(double level) const {
  if (shape == Envelope::Gaussian)
    return fwhm_fs * units::fs * std::sqrt(std::log(1.0 / level) / (4.0 * std::log(2.0)));
  return fwhm_fs * units::fs * (2.0 / pi) * std::acos(std::sqrt(level));
}

double field(double t_au, const PulseSpec& p) {
  const double E0 = p.E0 * units::volt_per_m;
  const double w0 = p.omega0_cm * units::wavenumber;
  return E0 * p.envelope(t_au) * std::cos(w0 * (t_au - p.t0_fs * units::fs));
}

double field_Vm(double t_fs, const PulseSpec& p) { return field(t_fs * units::fs, p) / units::volt_per_m; }

double pulse_fluence(const PulseSpec& p) {
  const double hw = p.active_half_width(1e-12);
  const double t0 = p.t0_fs * units::fs;
  const long n = 200000;
  const double h = 2.0 * hw / n;
  double s = 0.0;
  for (long k = 0; k <= n; ++k) {
    const double e = field(t0 - hw + k * h, p) / units::volt_per_m;
    s += (k == 0 || k == n ? 0.5 : 1.0) * e * e;
  }
  return s * h * units::au_time_s;
}

// --- propagation -----------------------------------------------------------------

DensityState ground_state(int M) {
  DensityState s;
  s.rho = MatrixXcd::Zero(M, M);
  s.rho(0, 0) = 1.0;
  return s;
}

DensityState boltzmann_state(const VectorXd& energies, double kT) {
  const int M = static_cast<int>(energies.size());
  VectorXd p(M);
  for (int i = 0; i < M; ++i) p[i] = std::exp(-(energies[i] - energies[0]) / kT);
  p /= p.sum();
  DensityState s;
  s.rho = MatrixXcd::Zero(M, M);
  s.rho.diagonal() = p.cast<cd>();
  return s;
}

namespace {

class RedfieldRHS {
 public:
  RedfieldRHS(const RedfieldModel& m, const PulseSpec& p, bool field_on)
      : pulse_(p), field_on_(field_on) {
    const int M = m.size();
    L_.resize(M, M);
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j)
        L_(i, j) = i == j ? cd(0.0) : cd(-m.gamma(i, j), -m.omega(i, j));
    K_ = rate_generator(m.w_total());
    mu_ = m.mu;
  }

  const MatrixXcd& coherence_generator() const { return L_; }
  const MatrixXd& rates() const { return K_; }

  void operator()(double t, const MatrixXcd& rho, MatrixXcd& d) const {
    d.noalias() = L_.cwiseProduct(rho);
    const VectorXd p = rho.diagonal().real();
    d.diagonal() = (K_ * p).cast<cd>();
    const double E = field_on_ ? field(t, pulse_) : 0.0;
    if (E != 0.0) {
      // mu is real: two real products instead of one complex one
      const MatrixXd Xr = rho.real() * mu_, Xi = rho.imag() * mu_;
      // -iE (X - X^dagger), X = Xr + i Xi
      d.real() += E * (Xi + Xi.transpose());
      d.imag() -= E * (Xr - Xr.transpose());
    }
  }

 private:
  PulseSpec pulse_;
  bool field_on_;
  MatrixXcd L_;
  MatrixXd K_;
  MatrixXd mu_;
};

double error_norm(const MatrixXcd& err, const MatrixXcd& y0, const MatrixXcd& y1, double atol,
                  double rtol) {
  const Eigen::ArrayXXd sc = atol + rtol * y0.cwiseAbs().array().max(y1.cwiseAbs().array());
  return (err.cwiseAbs().array() / sc).maxCoeff();
}

}  // namespace

Trajectory propagate(const DensityState& rho0, const RedfieldModel& model, const PulseSpec& pulse,
                     const std::vector<double>& t_grid_fs, const MatrixXd& theta_cis,
                     const MatrixXd& theta_trans, const PropagationOptions& opt) {
  const int M = model.size();
  if (rho0.rho.rows() != M || rho0.rho.cols() != M)
    throw ConfigError("initial density matrix has wrong dimension");
  if (std::abs(rho0.rho.trace() - 1.0) > 1e-9) throw ConfigError("initial density matrix not normalized");
  for (size_t k = 1; k < t_grid_fs.size(); ++k)
    if (!(t_grid_fs[k] > t_grid_fs[k - 1])) throw ConfigError("time grid must be increasing");
  pulse.validate();

  const RedfieldRHS f(model, pulse, opt.field_on);
  // sin^2 has compact support; a Gaussian is cut where it no longer matters
  const double hw_on =
      pulse.shape == Envelope::Sin2 ? pulse.fwhm_fs * units::fs : pulse.active_half_width(1e-12);
  const double t_on0 = pulse.t0_fs * units::fs - hw_on;
  const double t_on1 = pulse.t0_fs * units::fs + hw_on;
  const bool has_field = opt.field_on && pulse.E0 > 0.0;
  const double hmax_on = opt.max_step_on_fs * opt.step_scale * units::fs;
  const double hmax_off = opt.max_step_off_fs * opt.step_scale * units::fs;
  const double rtol = opt.rtol * std::pow(opt.step_scale, 5);
  const double atol = opt.atol * std::pow(opt.step_scale, 5);

  Trajectory tr;
  MatrixXcd y = rho0.rho;
  double t = rho0.t;
  auto record = [&](double tt) {
    const MatrixXd re = y.real();
    const double pc = theta_cis.cwiseProduct(re).sum();
    const double pt = theta_trans.cwiseProduct(re).sum();
    const double trace = y.trace().real();
    const double mn = y.diagonal().real().minCoeff();
    const double herm = (y - y.adjoint()).cwiseAbs().maxCoeff();
    tr.t_fs.push_back(tt / units::fs);
    tr.P_cis.push_back(pc);
    tr.P_trans.push_back(pt);
    tr.P_e.push_back(1.0 - pc - pt);
    tr.trace.push_back(trace);
    tr.min_pop.push_back(mn);
    tr.max_trace_drift = std::max(tr.max_trace_drift, std::abs(trace - 1.0));
    tr.max_hermiticity = std::max(tr.max_hermiticity, herm);
    tr.min_population = std::min(tr.min_population, mn);
    if (std::abs(trace - 1.0) > opt.trace_abort)
      throw NumericalError("trace drift " + std::to_string(trace - 1.0) + " at t = " +
                           std::to_string(tt / units::fs) + " fs");
  };

  // Dormand-Prince 5(4)
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  MatrixXcd k1(M, M), k2(M, M), k3(M, M), k4(M, M), k5(M, M), k6(M, M), k7(M, M), ytmp(M, M), ynew(M, M);
  double h = std::min(hmax_on, 0.01 * units::fs);
  f(t, y, k1);

  // Without the field the secular equations decouple: populations follow
  // exp(K dt) and every coherence its own exponential. Propagators are
  // cached per interval length (output grids are usually uniform).
  std::map<long long, MatrixXd> expK;
  auto exact_step = [&](double dt) {
    const long long key = std::llround(dt * 1e6);
    auto it = expK.find(key);
    if (it == expK.end()) it = expK.emplace(key, (f.rates() * dt).exp()).first;
    const VectorXd p = it->second * y.diagonal().real();
    const MatrixXcd& Lc = f.coherence_generator();
    for (int j = 0; j < M; ++j)
      for (int i = 0; i < M; ++i)
        if (i != j) y(i, j) *= std::exp(Lc(i, j) * dt);
    y.diagonal() = p.cast<cd>();
  };
  // end of the field-free stretch starting at t (t itself if the field is on)
  auto free_until = [&](double tt) {
    if (!has_field || tt >= t_on1) return std::numeric_limits<double>::infinity();
    return tt < t_on0 ? t_on0 : tt;
  };

  size_t next = 0;
  while (next < t_grid_fs.size() && t_grid_fs[next] * units::fs <= t + 1e-12) {
    record(t_grid_fs[next] * units::fs);
    ++next;
  }
  while (next < t_grid_fs.size()) {
    const double t_out = t_grid_fs[next] * units::fs;
    if (opt.exact_field_free) {
      const double seg = free_until(t);
      if (seg > t) {
        const double target = std::min(t_out, seg);
        exact_step(target - t);
        t = target;
        f(t, y, k1);
        if (t >= t_out) {
          record(t);
          ++next;
        }
        continue;
      }
    }
    const bool on = has_field && t >= t_on0 - 1e-9 && t < t_on1;
    double hcap = on ? hmax_on : hmax_off;
    if (has_field && !on && t < t_on0) hcap = std::min(hcap, t_on0 - t);
    if (has_field && on) hcap = std::min(hcap, std::max(t_on1 - t, 1e-6));
    h = std::min({h, hcap, t_out - t});
    if (h < 1e-12 * std::max(1.0, std::abs(t))) throw NumericalError("step size underflow");

    ytmp = y + h * a21 * k1;
    f(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t + h, ytmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    f(t + h, ynew, k7);
    const MatrixXcd err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = error_norm(err, y, ynew, atol, rtol);
    if (en <= 1.0) {
      t += h;
      y = ynew;
      k1 = k7;
      ++tr.steps;
      while (next < t_grid_fs.size() && t_grid_fs[next] * units::fs <= t + 1e-9 * units::fs) {
        record(t);
        ++next;
      }
    } else {
      ++tr.rejected;
    }
    const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
    h *= fac;
  }
  tr.final_state.rho = y;
  tr.final_state.t = t;
  return tr;
}

}  // namespace photoiso
