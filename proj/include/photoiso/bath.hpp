#pragma once
// Reservoir spectral functions. Frequencies and energies are in Hartree
// atomic units (hbar = 1) unless a function name says _SI.
#include <string>
#include <vector>

namespace photoiso {

struct BathSpec {
  double eta = 25.0;
  double omega_c_cm = 300.0;   // Ohmic cutoff, cm^-1
  double T_env = 300.0;        // K
  double T_rad = 4100.0;       // K
  double luminance = 0.03;     // cd/m^2
  double scale_denominator = 4.0e10;

  double omega_c() const;      // Hartree
  double kT_env() const;
  double kT_rad() const;
  double C() const { return luminance / scale_denominator; }
  void validate() const;       // throws ConfigError
};

double ohmic_density(double omega, const BathSpec& spec);
// Ohmic density at unit coupling; used where eta is factored out.
double ohmic_density_unit(double omega, double omega_c);
double bose(double omega, double kT);
// Energy density per unit angular frequency, hbar*w^3/(pi^2 c^3) * nbar.
double planck_density(double omega, double kT);
double planck_density_SI(double omega_rad_s, double T_kelvin);  // J s m^-3

struct EinsteinCoefficients {
  double A;  // spontaneous rate, a.u.
  double B;  // per unit energy density per unit angular frequency, a.u.
};
EinsteinCoefficients einstein_coefficients(double mu, double omega);
double einstein_B_SI(double mu_Cm);  // m^3 J^-1 s^-2

double luminance_to_scale(double L, double denominator = 4.0e10);

// Environment rates for a transition of energy |omega| (down = emission into
// the bath, up = absorption from it).
double env_rate_down(double omega_abs, const BathSpec& spec);
double env_rate_up(double omega_abs, const BathSpec& spec);

struct ScotopicTable {
  std::vector<double> lambda_nm, value;
  double operator()(double lambda_nm) const;  // linear interpolation, 0 outside
  double peak_wavelength() const;
  double peak_value() const;
};
ScotopicTable load_scotopic_table(const std::string& path);
std::string default_scotopic_path();

struct EyeGeometry {
  double pupil_area = 3.8e-5;        // m^2
  double retina_distance = 0.0167;   // m
  double transmission = 0.5;
  double T_source = 4100.0;          // K
  double luminous_efficacy = 683.0;  // lm/W
};

// Luminance-to-radiation denominator D with C = L / D, from the radiometric chain:
// source radiance scaled to luminance L, imaged through the pupil onto the retina,
// energy density there = irradiance / c, compared with the isotropic blackbody.
double derive_luminance_scale(const EyeGeometry& eye, const ScotopicTable& table);

}  // namespace photoiso
