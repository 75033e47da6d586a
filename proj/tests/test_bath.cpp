#include <doctest.h>

#include <cmath>
#include <random>

#include "photoiso/bath.hpp"
#include "photoiso/errors.hpp"
#include "photoiso/units.hpp"

using namespace photoiso;
namespace u = photoiso::units;

namespace {
// trapezoid on [a, b] with n panels
template <class F>
double trapz(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = 0.5 * (f(a) + f(b));
  for (int k = 1; k < n; ++k) s += f(a + k * h);
  return s * h;
}
}  // namespace

TEST_CASE("Ohmic density shape") {
  BathSpec b;
  b.eta = 12.5;
  const double wc = b.omega_c();
  CHECK(ohmic_density(wc, b) == doctest::Approx(12.5 * wc / std::exp(1.0)).epsilon(1e-14));
  CHECK(ohmic_density(0.0, b) == 0.0);
  CHECK_THROWS_AS(ohmic_density(-wc, b), DomainError);
  // maximum sits at the cutoff
  CHECK(ohmic_density(wc, b) > ohmic_density(0.99 * wc, b));
  CHECK(ohmic_density(wc, b) > ohmic_density(1.01 * wc, b));
}

TEST_CASE("Bose occupation identities") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> x(1e-3, 40.0);
  const double kT = 300 * u::kelvin;
  for (int k = 0; k < 200; ++k) {
    const double w = x(rng) * kT;
    const double n = bose(w, kT);
    CHECK(n * std::exp(w / kT) == doctest::Approx(n + 1.0).epsilon(1e-12));
  }
  CHECK(bose(kT * std::log(2.0), kT) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(bose(0.0, kT), DomainError);
  CHECK_THROWS_AS(bose(1.0, 0.0), DomainError);
}

TEST_CASE("environment rates obey detailed balance") {
  BathSpec b;
  for (double wcm : {10.0, 300.0, 1000.0, 5000.0}) {
    const double w = wcm * u::wavenumber;
    const double up = env_rate_up(w, b), down = env_rate_down(w, b);
    CHECK(up / down == doctest::Approx(std::exp(-w / b.kT_env())).epsilon(1e-12));
    CHECK(down - up == doctest::Approx(ohmic_density(w, b)).epsilon(1e-12));
  }
}

TEST_CASE("Planck density integrates to the Stefan-Boltzmann energy density") {
  const double sigma_SB = 5.670374419e-8;  // W m^-2 K^-4
  for (double T : {300.0, 4100.0}) {
    const double wT = u::kB_SI * T / u::hbar_SI;
    const double total = trapz([&](double x) { return x > 0 ? planck_density_SI(x * wT, T) * wT : 0.0; },
                               0.0, 60.0, 60000);
    CHECK(total == doctest::Approx(4.0 * sigma_SB / u::c_SI * std::pow(T, 4)).epsilon(1e-8));

    const double kT = T * u::kelvin;
    const double au = trapz([&](double x) { return x > 0 ? planck_density(x * kT, kT) * kT : 0.0; }, 0.0,
                            60.0, 60000);
    const double c3 = u::c_au * u::c_au * u::c_au;
    CHECK(au == doctest::Approx(u::pi * u::pi * std::pow(kT, 4) / (15.0 * c3)).epsilon(1e-8));
  }
}

TEST_CASE("Planck density agrees between unit systems") {
  const double T = 4100.0;
  for (double wcm : {1000.0, 20000.0, 40000.0}) {
    const double w = wcm * u::wavenumber;
    const double si = planck_density_SI(w / u::au_time_s, T);
    const double au = planck_density(w, T * u::kelvin) * u::hartree_J * u::au_time_s / std::pow(u::bohr_m, 3);
    CHECK(au == doctest::Approx(si).epsilon(1e-9));
  }
}

TEST_CASE("Einstein coefficients against SI formulas") {
  const double mu_D = 10.0, wcm = 2.0e4;
  const double mu_si = mu_D * u::debye_Cm;
  const double w_si = 2.0 * u::pi * u::c_SI * 100.0 * wcm;
  const auto ab = einstein_coefficients(mu_D * u::debye, wcm * u::wavenumber);
  // spontaneous rate of a two-level dipole emitter
  const double A_si = std::pow(w_si, 3) * mu_si * mu_si / (3.0 * u::pi * u::eps0_SI * u::hbar_SI * std::pow(u::c_SI, 3));
  CHECK(ab.A / u::au_time_s == doctest::Approx(A_si).epsilon(1e-8));
  // induced rate B W computed both ways
  const double W_si = planck_density_SI(w_si, 4100.0);
  const double rate_si = einstein_B_SI(mu_si) * W_si;
  const double rate_au = ab.B * planck_density(wcm * u::wavenumber, 4100.0 * u::kelvin) / u::au_time_s;
  CHECK(rate_au == doctest::Approx(rate_si).epsilon(1e-8));
  // A / B is the mode density factor
  CHECK(ab.A / ab.B == doctest::Approx(std::pow(wcm * u::wavenumber, 3) / (u::pi * u::pi * std::pow(u::c_au, 3))));
  CHECK_THROWS_AS(einstein_coefficients(1.0, 0.0), DomainError);
}

TEST_CASE("photoexcitation rate per unit luminance matches the published figure") {
  // 10 D, 2e4 cm^-1, 4100 K, C = L / 4.0e10: k1 = L * 5.6e-6 s^-1
  const double mu_si = 10.0 * u::debye_Cm;
  const double w_si = 2.0 * u::pi * u::c_SI * 100.0 * 2.0e4;
  const double k1_per_L = einstein_B_SI(mu_si) * planck_density_SI(w_si, 4100.0) * luminance_to_scale(1.0);
  CHECK(k1_per_L == doctest::Approx(5.6e-6).epsilon(0.10));
}

TEST_CASE("luminance scaling") {
  CHECK(luminance_to_scale(0.03) == doctest::Approx(0.03 / 4.0e10));
  CHECK(luminance_to_scale(0.0) == 0.0);
  CHECK_THROWS_AS(luminance_to_scale(-1.0), DomainError);
  BathSpec b;
  b.luminance = 0.06;
  CHECK(b.C() == doctest::Approx(1.5e-12));
}

TEST_CASE("scotopic table and the radiometric denominator") {
  const ScotopicTable V = load_scotopic_table(default_scotopic_path());
  CHECK(V.peak_wavelength() == doctest::Approx(507.0));
  CHECK(V.peak_value() == doctest::Approx(1.0));
  CHECK(V(300.0) == 0.0);
  CHECK(V(900.0) == 0.0);
  CHECK(V(505.0) > V(450.0));

  EyeGeometry eye;
  const double D = derive_luminance_scale(eye, V);
  CHECK(D == doctest::Approx(4.0e10).epsilon(0.10));
  // linear in the photometric efficacy, inverse in the pupil area
  EyeGeometry e2 = eye;
  e2.luminous_efficacy *= 2.0;
  e2.pupil_area *= 2.0;
  CHECK(derive_luminance_scale(e2, V) == doctest::Approx(D).epsilon(1e-12));
  e2 = eye;
  e2.transmission = 0.0;
  CHECK_THROWS_AS(derive_luminance_scale(e2, V), DomainError);
  CHECK_THROWS_AS(load_scotopic_table("/nonexistent/table.txt"), ConfigError);
}

TEST_CASE("bath spec validation") {
  BathSpec b;
  CHECK_NOTHROW(b.validate());
  b.eta = 0.0;
  CHECK_THROWS_AS(b.validate(), ConfigError);
  b = BathSpec{};
  b.luminance = -0.1;
  CHECK_THROWS_AS(b.validate(), ConfigError);
}
