#include "photoiso/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "photoiso/errors.hpp"

namespace photoiso {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (trim(v.substr(pos)).empty()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
}

long to_long(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x)) throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  return static_cast<long>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': expected true/false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

std::string fmt_double(double x) { return fmt::format("{}", x); }

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt_double(v[i]);
  return s;
}

struct Field {
  std::string section, key, comment;
  std::function<void(ScenarioConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

#define NUM(sec, k, member, note)                                                            \
  Field{sec, k, note, [](ScenarioConfig& c, const std::string& key, const std::string& v) {  \
          c.member = to_double(key, v); },                                                   \
        [](const ScenarioConfig& c) { return fmt_double(c.member); }}
#define INT(sec, k, member, note)                                                            \
  Field{sec, k, note, [](ScenarioConfig& c, const std::string& key, const std::string& v) {  \
          c.member = static_cast<decltype(c.member)>(to_long(key, v)); },                    \
        [](const ScenarioConfig& c) { return std::to_string(c.member); }}
#define BOOL(sec, k, member, note)                                                           \
  Field{sec, k, note, [](ScenarioConfig& c, const std::string& key, const std::string& v) {  \
          c.member = to_bool(key, v); },                                                     \
        [](const ScenarioConfig& c) { return std::string(c.member ? "true" : "false"); }}
#define LIST(sec, k, member, note)                                                           \
  Field{sec, k, note, [](ScenarioConfig& c, const std::string& key, const std::string& v) {  \
          c.member = to_list(key, v); },                                                     \
        [](const ScenarioConfig& c) { return fmt_list(c.member); }}
#define STR(sec, k, member, note)                                                            \
  Field{sec, k, note, [](ScenarioConfig& c, const std::string&, const std::string& v) {      \
          c.member = v; },                                                                   \
        [](const ScenarioConfig& c) { return c.member; }}

const std::vector<Field>& fields() {
  static const std::vector<Field> f{
      INT("system", "grid_points", system.N, ""),
      NUM("system", "W0_eV", system.model.W0, "model choice: ground barrier"),
      NUM("system", "W1_eV", system.model.W1, "model choice: excited-state well depth"),
      NUM("system", "E1_eV", system.model.E1, "vertical gap, resonant with the carrier"),
      NUM("system", "inverse_inertia_eV", system.model.B, "model choice: hbar^2/2m"),
      NUM("system", "coupling_eV", system.model.coupling, "model choice: peak diabatic coupling"),
      NUM("system", "coupling_width_rad", system.model.sigma, "model choice"),
      BOOL("system", "constant_coupling", system.model.constant_coupling, ""),
      NUM("system", "cutoff_above_E1_eV", system.cutoff_above_E1_eV, ""),
      INT("system", "max_states", system.max_states, ""),
      NUM("system", "dipole_debye", system.mu0_debye, ""),
      BOOL("system", "symmetric_trans_window", system.symmetric_trans,
           "model choice: count both trans wells"),

      NUM("bath", "omega_c_cm", omega_c_cm, ""),
      NUM("bath", "T_env_K", T_env, ""),
      NUM("bath", "T_rad_K", T_rad, ""),
      NUM("bath", "luminance_denominator", scale_denominator, "C = L / denominator"),
      LIST("bath", "etas", etas, ""),
      LIST("bath", "luminances", luminances, "cd/m^2"),
      NUM("bath", "eta_ref", eta_ref, "eta used for luminance sweeps"),
      NUM("bath", "L_ref", L_ref, "luminance used for eta sweeps"),

      NUM("pulse", "E0_V_per_m", pulse.E0, ""),
      NUM("pulse", "carrier_cm", pulse.omega0_cm, ""),
      NUM("pulse", "fwhm_fs", pulse.fwhm_fs, "model choice: sin2 lobe of 5 fs total duration"),
      NUM("pulse", "t0_fs", pulse.t0_fs, "model choice"),
      Field{"pulse", "envelope", "gaussian | sin2",
            [](ScenarioConfig& c, const std::string& key, const std::string& v) {
              if (v == "gaussian") c.pulse.shape = Envelope::Gaussian;
              else if (v == "sin2") c.pulse.shape = Envelope::Sin2;
              else throw ConfigError("key '" + key + "': expected gaussian or sin2");
            },
            [](const ScenarioConfig& c) {
              return std::string(c.pulse.shape == Envelope::Gaussian ? "gaussian" : "sin2");
            }},

      NUM("coherent", "t_end_fs", coherent_t_end_fs, ""),
      NUM("coherent", "dt_out_fs", coherent_dt_out_fs, ""),
      STR("coherent", "initial_state", initial_state, "ground | boltzmann"),
      NUM("coherent", "max_step_on_fs", propagation.max_step_on_fs, ""),
      NUM("coherent", "max_step_off_fs", propagation.max_step_off_fs, ""),
      NUM("coherent", "rtol", propagation.rtol, ""),
      NUM("coherent", "atol", propagation.atol, ""),
      NUM("coherent", "quadrature_step_fs", quadrature.step_fs, ""),
      NUM("coherent", "quadrature_horizon_fs", quadrature.horizon_fs, ""),
      NUM("coherent", "quadrature_tolerance", quadrature.tolerance, ""),
      BOOL("coherent", "dephasing_include_spontaneous", dephasing_include_spontaneous, ""),

      NUM("incoherent", "t_min_s", incoherent_t_min, ""),
      NUM("incoherent", "t_max_s", incoherent_t_max, ""),
      INT("incoherent", "points_per_octave", incoherent_points_per_octave, ""),
      NUM("incoherent", "fit_end_times_eta_s", fit_end_eta,
          "model choice: slope window ends at this / eta"),

      NUM("response", "molecules", molecules, ""),
      INT("response", "threshold", response_threshold, ""),
      NUM("response", "horizon_s", response_horizon_s, ""),

      STR("run", "out_dir", out_dir, ""),
      INT("run", "seed", seed, "property tests only"),
      INT("run", "threads", threads, ""),
  };
  return f;
}

}  // namespace

BathSpec ScenarioConfig::bath(double eta, double L) const {
  BathSpec b;
  b.eta = eta;
  b.luminance = L;
  b.omega_c_cm = omega_c_cm;
  b.T_env = T_env;
  b.T_rad = T_rad;
  b.scale_denominator = scale_denominator;
  return b;
}

void ScenarioConfig::validate() const {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  need(system.N >= 64 && system.N <= 4096, "grid_points must be in [64, 4096]");
  need(system.max_states >= 2, "max_states must be >= 2");
  need(system.model.B > 0 && system.model.W0 > 0 && system.model.W1 > 0 && system.model.E1 > 0,
       "potential parameters must be positive");
  need(system.model.coupling >= 0, "coupling must be >= 0");
  need(system.mu0_debye >= 0, "dipole must be >= 0");
  for (double e : etas) need(e > 0 && e <= 1e3, "eta must be in (0, 1000]");
  for (double L : luminances) need(L >= 0 && L <= 1e3, "luminance must be in [0, 1000]");
  need(eta_ref > 0 && eta_ref <= 1e3, "eta_ref must be in (0, 1000]");
  need(L_ref >= 0 && L_ref <= 1e3, "L_ref must be in [0, 1000]");
  need(omega_c_cm > 0 && T_env > 0 && T_rad > 0 && scale_denominator > 0,
       "bath parameters must be positive");
  pulse.validate();
  need(coherent_t_end_fs > 0 && coherent_dt_out_fs > 0, "coherent grid must be positive");
  need(initial_state == "ground" || initial_state == "boltzmann", "initial_state must be ground or boltzmann");
  need(propagation.max_step_on_fs > 0 && propagation.max_step_off_fs > 0, "max steps must be positive");
  need(propagation.rtol > 0 && propagation.atol > 0, "tolerances must be positive");
  need(incoherent_t_min > 0 && incoherent_t_max > incoherent_t_min, "incoherent grid invalid");
  need(incoherent_points_per_octave >= 1 && incoherent_points_per_octave <= 256,
       "points_per_octave must be in [1, 256]");
  need(fit_end_eta > 0, "fit_end_times_eta_s must be positive");
  need(molecules >= response_threshold && response_threshold >= 1, "molecule count must be >= threshold");
  need(response_horizon_s > 0, "response horizon must be positive");
  need(threads >= 1, "threads must be >= 1");
}

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig c;
  std::map<std::string, const Field*> index;
  for (const auto& f : fields()) index[f.section + "." + f.key] = &f;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    const std::string full = section + "." + key;
    const auto it = index.find(full);
    if (it == index.end()) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + full + "'");
    it->second->set(c, full, value);
  }
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ScenarioConfig& cfg) {
  std::string out, section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      out += (section.empty() ? "" : "\n") + std::string("[") + f.section + "]\n";
      section = f.section;
    }
    out += f.key + " = " + f.get(cfg);
    if (!f.comment.empty()) out += "  # " + f.comment;
    out += "\n";
  }
  return out;
}

}  // namespace photoiso
