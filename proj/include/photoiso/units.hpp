#pragma once
// Physical constants and unit conversions. Internal unit system is Hartree
// atomic units (hbar = e = m_e = 1); every energy, frequency, time, dipole and
// field value inside the library is stored in those units.
#include <string>
#include <string_view>

namespace photoiso::units {

// SI defining / CODATA 2018 constants
inline constexpr double h_SI = 6.62607015e-34;         // J s, exact
inline constexpr double hbar_SI = h_SI / (2.0 * 3.14159265358979323846);
inline constexpr double c_SI = 299792458.0;            // m/s
inline constexpr double kB_SI = 1.380649e-23;          // J/K
inline constexpr double eps0_SI = 8.8541878128e-12;    // F/m
inline constexpr double e_SI = 1.602176634e-19;        // C
inline constexpr double hartree_J = 4.3597447222071e-18;
inline constexpr double bohr_m = 5.29177210903e-11;

// Derived atomic-unit scales
inline constexpr double au_time_s = hbar_SI / hartree_J;          // 2.4188843e-17 s
inline constexpr double au_dipole_Cm = e_SI * bohr_m;             // 8.478e-30 C m
inline constexpr double au_field_Vm = hartree_J / (e_SI * bohr_m);// 5.142e11 V/m
inline constexpr double debye_Cm = 1e-21 / c_SI;                  // 3.33564e-30 C m
inline constexpr double c_au = 137.035999084;
inline constexpr double pi = 3.14159265358979323846;

inline constexpr double eV = e_SI / hartree_J;                    // Ha per eV
inline constexpr double wavenumber = h_SI * c_SI * 100.0 / hartree_J;  // Ha per cm^-1
inline constexpr double kelvin = kB_SI / hartree_J;               // Ha per K (k_B)
inline constexpr double fs = 1e-15 / au_time_s;                   // a.u. per fs
inline constexpr double ps = 1e-12 / au_time_s;
inline constexpr double second = 1.0 / au_time_s;
inline constexpr double debye = debye_Cm / au_dipole_Cm;          // a.u. per D
inline constexpr double volt_per_m = 1.0 / au_field_Vm;           // a.u. per V/m

enum class Dimension { Energy, Time, Dipole, Field, Luminance };

enum class Unit {
  Hartree, eV, Joule, Wavenumber, Kelvin, RadPerSecond, Hertz,  // energy-like
  AuTime, Femtosecond, Picosecond, Second,                      // time
  AuDipole, Debye, CoulombMeter,                                 // dipole
  AuField, VoltPerMeter,                                         // field
  CandelaPerM2                                                   // photometric, passthrough
};

Dimension dimension(Unit u);
// Factor f such that value_in_u * f = value in internal units.
double to_internal(Unit u);
double convert(double value, Unit from, Unit to);
Unit parse_unit(std::string_view name);
std::string unit_name(Unit u);

}  // namespace photoiso::units
