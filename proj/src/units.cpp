#include "photoiso/units.hpp"

#include <array>
#include <utility>

#include "photoiso/errors.hpp"

namespace photoiso::units {

namespace {
struct Entry {
  Unit unit;
  const char* name;
  Dimension dim;
  double factor;
};

constexpr std::array<Entry, 17> kTable{{
    {Unit::Hartree, "Ha", Dimension::Energy, 1.0},
    {Unit::eV, "eV", Dimension::Energy, eV},
    {Unit::Joule, "J", Dimension::Energy, 1.0 / hartree_J},
    {Unit::Wavenumber, "cm^-1", Dimension::Energy, wavenumber},
    {Unit::Kelvin, "K", Dimension::Energy, kelvin},
    {Unit::RadPerSecond, "rad/s", Dimension::Energy, au_time_s},
    {Unit::Hertz, "Hz", Dimension::Energy, 2.0 * pi * au_time_s},
    {Unit::AuTime, "au_time", Dimension::Time, 1.0},
    {Unit::Femtosecond, "fs", Dimension::Time, fs},
    {Unit::Picosecond, "ps", Dimension::Time, ps},
    {Unit::Second, "s", Dimension::Time, second},
    {Unit::AuDipole, "au_dipole", Dimension::Dipole, 1.0},
    {Unit::Debye, "D", Dimension::Dipole, debye},
    {Unit::CoulombMeter, "C*m", Dimension::Dipole, 1.0 / au_dipole_Cm},
    {Unit::AuField, "au_field", Dimension::Field, 1.0},
    {Unit::VoltPerMeter, "V/m", Dimension::Field, volt_per_m},
    {Unit::CandelaPerM2, "cd/m^2", Dimension::Luminance, 1.0},
}};

const Entry& lookup(Unit u) {
  for (const auto& e : kTable)
    if (e.unit == u) return e;
  throw UnitError("unknown unit");
}
}  // namespace

Dimension dimension(Unit u) { return lookup(u).dim; }
double to_internal(Unit u) { return lookup(u).factor; }
std::string unit_name(Unit u) { return lookup(u).name; }

Unit parse_unit(std::string_view name) {
  for (const auto& e : kTable)
    if (name == e.name) return e.unit;
  throw UnitError("unknown unit '" + std::string(name) + "'");
}

double convert(double value, Unit from, Unit to) {
  const auto& a = lookup(from);
  const auto& b = lookup(to);
  if (a.dim != b.dim)
    throw UnitError("incompatible units: " + std::string(a.name) + " -> " + b.name);
  if (from == to) return value;
  return value * (a.factor / b.factor);
}

}  // namespace photoiso::units
