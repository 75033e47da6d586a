#include "photoiso/bath.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "photoiso/errors.hpp"
#include "photoiso/units.hpp"

namespace photoiso {

using units::pi;

double BathSpec::omega_c() const { return omega_c_cm * units::wavenumber; }
double BathSpec::kT_env() const { return T_env * units::kelvin; }
double BathSpec::kT_rad() const { return T_rad * units::kelvin; }

void BathSpec::validate() const {
  if (!(eta > 0.0)) throw ConfigError("eta must be > 0");
  if (!(omega_c_cm > 0.0)) throw ConfigError("omega_c must be > 0");
  if (!(T_env > 0.0) || !(T_rad > 0.0)) throw ConfigError("temperatures must be > 0");
  if (!(luminance >= 0.0)) throw ConfigError("luminance must be >= 0");
  if (!(scale_denominator > 0.0)) throw ConfigError("luminance scale must be > 0");
}

double ohmic_density_unit(double omega, double omega_c) {
  if (omega < 0.0) throw DomainError("Ohmic density needs omega >= 0");
  return omega * std::exp(-omega / omega_c);
}

double ohmic_density(double omega, const BathSpec& spec) {
  return spec.eta * ohmic_density_unit(omega, spec.omega_c());
}

double bose(double omega, double kT) {
  if (!(omega > 0.0)) throw DomainError("Bose occupation needs omega > 0");
  if (!(kT > 0.0)) throw DomainError("Bose occupation needs T > 0");
  return 1.0 / std::expm1(omega / kT);
}

double planck_density(double omega, double kT) {
  const double c3 = units::c_au * units::c_au * units::c_au;
  return omega * omega * omega / (pi * pi * c3) * bose(omega, kT);
}

double planck_density_SI(double w, double T) {
  using namespace units;
  if (!(w > 0.0)) throw DomainError("Planck density needs omega > 0");
  return hbar_SI * w * w * w / (pi * pi * c_SI * c_SI * c_SI) / std::expm1(hbar_SI * w / (kB_SI * T));
}

EinsteinCoefficients einstein_coefficients(double mu, double omega) {
  if (omega == 0.0) throw DomainError("Einstein coefficients need a nonzero Bohr frequency");
  // B = pi mu^2 / (3 eps0 hbar^2) with eps0 = 1/(4 pi) in atomic units
  const double B = 4.0 * pi * pi * mu * mu / 3.0;
  const double w = std::abs(omega);
  const double c3 = units::c_au * units::c_au * units::c_au;
  return {w * w * w / (pi * pi * c3) * B, B};
}

double einstein_B_SI(double mu) {
  using namespace units;
  return pi * mu * mu / (3.0 * eps0_SI * hbar_SI * hbar_SI);
}

double luminance_to_scale(double L, double denominator) {
  if (!(L >= 0.0)) throw DomainError("luminance must be >= 0");
  return L / denominator;
}

double env_rate_down(double w, const BathSpec& s) {
  return ohmic_density(w, s) * (bose(w, s.kT_env()) + 1.0);
}

double env_rate_up(double w, const BathSpec& s) { return ohmic_density(w, s) * bose(w, s.kT_env()); }

double ScotopicTable::operator()(double x) const {
  if (lambda_nm.empty() || x < lambda_nm.front() || x > lambda_nm.back()) return 0.0;
  auto it = std::upper_bound(lambda_nm.begin(), lambda_nm.end(), x);
  if (it == lambda_nm.end()) return value.back();
  const auto i = static_cast<size_t>(it - lambda_nm.begin());
  const double f = (x - lambda_nm[i - 1]) / (lambda_nm[i] - lambda_nm[i - 1]);
  return value[i - 1] + f * (value[i] - value[i - 1]);
}

double ScotopicTable::peak_value() const { return *std::max_element(value.begin(), value.end()); }

double ScotopicTable::peak_wavelength() const {
  const auto i = std::max_element(value.begin(), value.end()) - value.begin();
  return lambda_nm[static_cast<size_t>(i)];
}

std::string default_scotopic_path() {
  return std::string(PHOTOISO_DATA_DIR) + "/scotopic_cie1951.txt";
}

ScotopicTable load_scotopic_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scotopic table: " + path);
  ScotopicTable t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    double l, v;
    if (!(ss >> l >> v) || v < 0.0)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed scotopic entry");
    if (!t.lambda_nm.empty() && l <= t.lambda_nm.back())
      throw ConfigError(path + ":" + std::to_string(lineno) + ": wavelengths must increase");
    t.lambda_nm.push_back(l);
    t.value.push_back(v);
  }
  if (t.lambda_nm.size() < 2) throw ConfigError("scotopic table has fewer than two rows");
  return t;
}

double derive_luminance_scale(const EyeGeometry& eye, const ScotopicTable& V) {
  using namespace units;
  if (!(eye.pupil_area > 0.0) || !(eye.transmission > 0.0))
    throw DomainError("degenerate eye geometry: no light reaches the retina");
  if (!(eye.retina_distance > 0.0) || !(eye.T_source > 0.0) || !(eye.luminous_efficacy > 0.0))
    throw DomainError("eye geometry parameters must be positive");

  // Spectral energy density per unit wavelength of the isotropic blackbody,
  // weighted by V'(lambda).
  const double l0 = V.lambda_nm.front() * 1e-9, l1 = V.lambda_nm.back() * 1e-9;
  const int n = 40000;
  const double h = (l1 - l0) / n;
  double integral = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double l = l0 + k * h;
    const double u = 8.0 * pi * h_SI * c_SI / std::pow(l, 5) / std::expm1(h_SI * c_SI / (l * kB_SI * eye.T_source));
    integral += (k == 0 || k == n ? 0.5 : 1.0) * u * V(l * 1e9);
  }
  integral *= h;
  // Luminance of a source whose radiance is a fraction f of the blackbody's:
  //   L = K f (c / 4pi) integral.
  // Retinal irradiance E = radiance * solid angle of the pupil * transmission,
  // energy density u = E / c = f W_BB Omega / (4 pi), so C = f Omega / (4 pi).
  const double omega_eff = eye.pupil_area * eye.transmission / (eye.retina_distance * eye.retina_distance);
  return eye.luminous_efficacy * c_SI * integral / omega_eff;
}

}  // namespace photoiso
