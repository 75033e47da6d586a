#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "photoiso/errors.hpp"
#include "photoiso/redfield.hpp"
#include "photoiso/units.hpp"

using namespace photoiso;
namespace u = photoiso::units;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

const TorsionalSystem& small_system() {
  static const TorsionalSystem s = [] {
    SystemConfig c;
    c.N = 128;
    c.max_states = 60;
    return build_system(c);
  }();
  return s;
}

// brute-force psi_1(z) = sum 1/(z+k)^2 with an Euler-Maclaurin tail
std::complex<double> trigamma_series(std::complex<double> z) {
  std::complex<double> s = 0.0;
  const int K = 200000;
  for (int k = 0; k < K; ++k) s += 1.0 / ((z + double(k)) * (z + double(k)));
  const auto w = z + double(K);
  return s + 1.0 / w + 0.5 / (w * w) + 1.0 / (6.0 * w * w * w);
}

// Random dissipative model with M levels; energies in a.u.
RedfieldModel toy_model(int M, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  RedfieldModel m;
  m.energies.resize(M);
  for (int i = 0; i < M; ++i) m.energies[i] = 0.02 * i + 0.005 * U(rng);
  m.omega.resize(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) m.omega(i, j) = m.energies[i] - m.energies[j];
  m.w_env = MatrixXd::Zero(M, M);
  m.w_spont = MatrixXd::Zero(M, M);
  m.w_rad = MatrixXd::Zero(M, M);
  m.gamma = MatrixXd::Zero(M, M);
  m.mu = MatrixXd::Zero(M, M);
  m.Q = MatrixXd::Zero(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      if (i != j) {
        m.w_env(j, i) = 1e-3 * U(rng);
        if (i < j) {
          m.gamma(i, j) = m.gamma(j, i) = 2e-3 + 1e-3 * U(rng);
          m.mu(i, j) = m.mu(j, i) = 2.0 * (U(rng) - 0.5);
        }
      }
  return m;
}

// Independent fixed-step RK4 on the full equation of motion.
MatrixXcd rk4_reference(const RedfieldModel& m, const PulseSpec& p, MatrixXcd rho, double t0, double t1,
                        int steps) {
  const int M = m.size();
  const MatrixXd K = rate_generator(m.w_total());
  auto rhs = [&](double t, const MatrixXcd& r) {
    MatrixXcd d(M, M);
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j)
        d(i, j) = i == j ? std::complex<double>(0.0) : std::complex<double>(-m.gamma(i, j), -m.omega(i, j)) * r(i, j);
    const VectorXd pop = r.diagonal().real();
    d.diagonal() = (K * pop).cast<std::complex<double>>();
    const MatrixXcd mu = m.mu.cast<std::complex<double>>();
    d += std::complex<double>(0.0, -field(t, p)) * (r * mu - mu * r);
    return d;
  };
  const double h = (t1 - t0) / steps;
  double t = t0;
  for (int s = 0; s < steps; ++s) {
    const MatrixXcd k1 = rhs(t, rho), k2 = rhs(t + h / 2, rho + h / 2 * k1), k3 = rhs(t + h / 2, rho + h / 2 * k2),
                    k4 = rhs(t + h, rho + h * k3);
    rho += h / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += h;
  }
  return rho;
}

}  // namespace

TEST_CASE("rate generator conserves probability") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  MatrixXd w(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) w(i, j) = U(rng);
  const MatrixXd K = rate_generator(w);
  CHECK(K.colwise().sum().cwiseAbs().maxCoeff() < 1e-15);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      if (i != j) CHECK(K(i, j) == w(i, j));
}

TEST_CASE("transition rates of the torsional model") {
  const auto& sys = small_system();
  BathSpec b;
  b.luminance = 0.03;
  const auto m = assemble_rates(sys, b);
  const double kT = b.kT_env();
  for (int i = 0; i < sys.size(); ++i)
    for (int j = 0; j < sys.size(); ++j) {
      if (i == j) continue;
      // environment: detailed balance at T_env
      if (m.w_env(j, i) > 0.0 && m.w_env(i, j) > 0.0)
        CHECK(m.w_env(j, i) / m.w_env(i, j) ==
              doctest::Approx(std::exp(-(sys.energies[j] - sys.energies[i]) / kT)).epsilon(1e-9));
      // radiation: induced rates symmetric, spontaneous only downward
      CHECK(m.w_rad(j, i) == doctest::Approx(m.w_rad(i, j)).epsilon(1e-14));
      if (sys.energies[j] > sys.energies[i]) CHECK(m.w_spont(j, i) == 0.0);
    }
  // induced part scales with luminance
  BathSpec b2 = b;
  b2.luminance = 0.06;
  const auto m2 = assemble_rates(sys, b2);
  CHECK((m2.w_rad - 2.0 * m.w_rad).cwiseAbs().maxCoeff() <= 1e-12 * m2.w_rad.cwiseAbs().maxCoeff());
  CHECK((m2.w_env - m.w_env).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("complex trigamma") {
  CHECK(std::abs(trigamma(1.0) - u::pi * u::pi / 6.0) < 1e-13);
  CHECK(std::abs(trigamma(0.5) - u::pi * u::pi / 2.0) < 1e-13);
  for (auto z : {std::complex<double>(1.3, 0.7), std::complex<double>(2.0, -15.0), std::complex<double>(1.0, 40.0),
                 std::complex<double>(25.0, 3.0)}) {
    CHECK(std::abs(trigamma(z) - trigamma_series(z)) < 1e-9 * std::abs(trigamma(z)));
    // recurrence
    CHECK(std::abs(trigamma(z) - trigamma(z + 1.0) - 1.0 / (z * z)) < 1e-13 * std::abs(trigamma(z)));
  }
}

TEST_CASE("half-Fourier transform of the correlation function reproduces the rates") {
  // 2 Re int_0^inf C(t) e^{iwt} dt = J(w)(n(w)+1) for w > 0, J(|w|) n(|w|) for w < 0,
  // and kT * J'(0) at w = 0 (eta = 1).
  BathSpec b;
  b.eta = 1.0;
  QuadratureSpec q;
  std::vector<double> ws_cm{10.0, 100.0, 300.0, 700.0, 1500.0};
  MatrixXd om = MatrixXd::Zero(ws_cm.size() + 1, ws_cm.size() + 1);
  for (size_t k = 0; k < ws_cm.size(); ++k) {
    om(k + 1, 0) = ws_cm[k] * u::wavenumber;
    om(0, k + 1) = -om(k + 1, 0);
  }
  const auto hf = env_half_fourier(om, b, q);
  CHECK(2.0 * hf.zero_re == doctest::Approx(b.kT_env()).epsilon(1e-6));
  for (size_t k = 0; k < ws_cm.size(); ++k) {
    const double w = ws_cm[k] * u::wavenumber;
    CHECK(2.0 * hf.re(k + 1, 0) == doctest::Approx(env_rate_down(w, b)).epsilon(1e-6));
    CHECK(2.0 * hf.re(0, k + 1) == doctest::Approx(env_rate_up(w, b)).epsilon(1e-6));
  }
  // C(0) > 0 and C(-t) = C(t)*
  const auto c1 = env_correlation(30 * u::fs, b.omega_c(), b.kT_env());
  const auto c2 = env_correlation(-30 * u::fs, b.omega_c(), b.kT_env());
  CHECK(std::abs(c1 - std::conj(c2)) < 1e-14 * std::abs(c1));
  CHECK(env_correlation(0.0, b.omega_c(), b.kT_env()).real() > 0.0);
}

TEST_CASE("dephasing of a two-level system") {
  // gamma = (w_up + w_down)/2 + eta G(0) (Q00 - Q11)^2
  RedfieldModel m;
  const double w = 400 * u::wavenumber;
  m.energies = Eigen::Vector2d(0.0, w);
  m.omega.resize(2, 2);
  m.omega << 0.0, -w, w, 0.0;
  m.Q.resize(2, 2);
  m.Q << 0.9, 0.2, 0.2, 0.4;
  m.w_spont = m.w_rad = MatrixXd::Zero(2, 2);
  m.w_env = MatrixXd::Zero(2, 2);
  BathSpec b;
  b.eta = 25.0;
  m.w_env(1, 0) = 0.04 * env_rate_up(w, b);
  m.w_env(0, 1) = 0.04 * env_rate_down(w, b);
  DephasingReport rep;
  const MatrixXd g = assemble_dephasing(m, b, QuadratureSpec{}, false, &rep);
  const double expected = 0.5 * (m.w_env(1, 0) + m.w_env(0, 1)) + b.eta * 0.5 * b.kT_env() * 0.25;
  CHECK(g(0, 1) == doctest::Approx(expected).epsilon(1e-6));
  CHECK(g(1, 0) == g(0, 1));
  CHECK(g(0, 0) == 0.0);
  CHECK(rep.convergence_error < 1e-3);
}

TEST_CASE("dephasing matrix of the torsional model") {
  const auto& sys = small_system();
  BathSpec b;
  b.eta = 12.5;
  const auto m = assemble_rates(sys, b);
  const MatrixXd g = assemble_dephasing(m, b);
  CHECK((g - g.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.minCoeff() >= -1e-15 * g.maxCoeff());
  // eta enters linearly
  BathSpec b2 = b;
  b2.eta = 25.0;
  const MatrixXd g2 = assemble_dephasing(assemble_rates(sys, b2), b2);
  CHECK((g2 - 2.0 * g).cwiseAbs().maxCoeff() < 1e-12 * g2.maxCoeff());
}

TEST_CASE("pulse envelopes") {
  PulseSpec p;
  p.shape = Envelope::Sin2;
  const double t0 = p.t0_fs * u::fs, hw = 0.5 * p.fwhm_fs * u::fs;
  CHECK(p.envelope(t0) == doctest::Approx(1.0));
  CHECK(p.envelope(t0 + hw) == doctest::Approx(0.5));
  CHECK(p.envelope(t0 - hw) == doctest::Approx(0.5));
  CHECK(p.envelope(t0 + 2.01 * hw) == 0.0);
  CHECK(field_Vm(p.t0_fs, p) == doctest::Approx(p.E0));
  p.shape = Envelope::Gaussian;
  CHECK(p.envelope(t0 + hw) == doctest::Approx(0.5));
  CHECK(p.active_half_width(1e-4) > hw);
  PulseSpec bad;
  bad.fwhm_fs = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("field-free propagation agrees with the closed form") {
  // two levels: coherence decays as exp(-(gamma + i w) t), populations relax
  // exponentially toward k_up / (k_up + k_down)
  RedfieldModel m;
  const double w = 0.01, ku = 2e-4, kd = 6e-4, g = 1e-3;
  m.energies = Eigen::Vector2d(0.0, w);
  m.omega.resize(2, 2);
  m.omega << 0.0, -w, w, 0.0;
  m.w_env = MatrixXd::Zero(2, 2);
  m.w_env(1, 0) = ku;
  m.w_env(0, 1) = kd;
  m.w_spont = m.w_rad = MatrixXd::Zero(2, 2);
  m.gamma.resize(2, 2);
  m.gamma << 0.0, g, g, 0.0;
  m.mu = m.Q = MatrixXd::Zero(2, 2);
  DensityState r0;
  r0.rho.resize(2, 2);
  r0.rho << 0.7, std::complex<double>(0.2, 0.1), std::complex<double>(0.2, -0.1), 0.3;
  const MatrixXd th0 = (MatrixXd(2, 2) << 1, 0, 0, 0).finished(), th1 = (MatrixXd(2, 2) << 0, 0, 0, 1).finished();
  std::vector<double> grid;
  for (int k = 0; k <= 40; ++k) grid.push_back(5.0 * k);

  for (bool exact : {true, false}) {
    PropagationOptions o;
    o.field_on = false;
    o.exact_field_free = exact;
    const auto tr = propagate(r0, m, PulseSpec{}, grid, th0, th1, o);
    for (size_t k = 0; k < grid.size(); ++k) {
      const double t = grid[k] * u::fs;
      const double p1 = ku / (ku + kd) + (0.3 - ku / (ku + kd)) * std::exp(-(ku + kd) * t);
      CHECK(tr.P_trans[k] == doctest::Approx(p1).epsilon(1e-9));
    }
    const auto c = tr.final_state.rho(1, 0);
    const double T = grid.back() * u::fs;
    const auto expect = std::complex<double>(0.2, -0.1) * std::exp(std::complex<double>(-g, -w) * T);
    CHECK(std::abs(c - expect) < 1e-9);
  }
}

TEST_CASE("driven propagation matches a brute-force RK4 integration") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 3; ++trial) {
    const int M = 4;
    const RedfieldModel m = toy_model(M, rng);
    PulseSpec p;
    p.E0 = 2e10;
    p.omega0_cm = 0.02 / u::wavenumber;
    p.t0_fs = 5.0;
    const MatrixXd th0 = VectorXd::Unit(M, 0).asDiagonal().toDenseMatrix();
    const MatrixXd th1 = VectorXd::Unit(M, M - 1).asDiagonal().toDenseMatrix();
    const std::vector<double> grid{0.0, 5.0, 10.0, 20.0};
    const auto tr = propagate(ground_state(M), m, p, grid, th0, th1);
    const MatrixXcd ref = rk4_reference(m, p, ground_state(M).rho, 0.0, 20.0 * u::fs, 40000);
    CHECK((tr.final_state.rho - ref).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(tr.max_trace_drift < 1e-12);
    CHECK(tr.max_hermiticity < 1e-12);
    // the field actually did something
    CHECK(tr.P_cis.back() < 0.999);
    PropagationOptions dp;
    dp.exact_field_free = false;
    const auto tr2 = propagate(ground_state(M), m, p, grid, th0, th1, dp);
    CHECK((tr2.final_state.rho - ref).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("initial states") {
  const auto g = ground_state(5);
  CHECK(g.rho.trace().real() == 1.0);
  const VectorXd E = VectorXd::LinSpaced(5, 0.0, 0.004);
  const auto b = boltzmann_state(E, 300 * u::kelvin);
  CHECK(b.rho.trace().real() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(b.rho(1, 1).real() / b.rho(0, 0).real() == doctest::Approx(std::exp(-0.001 / (300 * u::kelvin))));
  PropagationOptions o;
  DensityState bad = g;
  bad.rho(0, 0) = 0.5;
  const MatrixXd th = MatrixXd::Identity(5, 5);
  RedfieldModel m;
  m.energies = E;
  CHECK_THROWS_AS(propagate(bad, m, PulseSpec{}, {0.0, 1.0}, th, th, o), ConfigError);
}
