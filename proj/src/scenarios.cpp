#include "photoiso/scenarios.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include "photoiso/errors.hpp"
#include "photoiso/svg.hpp"
#include "photoiso/units.hpp"

namespace photoiso {

namespace fs = std::filesystem;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double photoexcitation_rate(const ScenarioConfig& cfg, double L, double mu_debye, double omega_cm) {
  const BathSpec b = cfg.bath(cfg.eta_ref, L);
  const double w = omega_cm * units::wavenumber;
  const auto ab = einstein_coefficients(mu_debye * units::debye, w);
  return b.C() * ab.B * planck_density(w, b.kT_rad()) * units::second;
}

double photoexcitation_rate(const ScenarioConfig& cfg, double L) {
  return photoexcitation_rate(cfg, L, cfg.system.mu0_debye);
}

// --- coherent pulse ------------------------------------------------------------

std::vector<double> uniform_grid_fs(double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end > 0.0)) throw ConfigError("output grid needs positive t_end and dt");
  std::vector<double> g;
  const long n = std::lround(t_end / dt);
  for (long k = 0; k <= n; ++k) g.push_back(k * dt);
  return g;
}

PulseResult run_pulse(const ScenarioConfig& cfg, const TorsionalSystem& sys, double eta,
                      const std::vector<double>& grid, const PropagationOptions& opt) {
  const BathSpec b = cfg.bath(eta, 0.0);
  RedfieldModel m = assemble_rates(sys, b);
  PulseResult r;
  r.eta = eta;
  m.gamma = assemble_dephasing(m, b, cfg.quadrature, cfg.dephasing_include_spontaneous, &r.dephasing);
  const DensityState rho0 =
      cfg.initial_state == "boltzmann" ? boltzmann_state(sys.energies, b.kT_env()) : ground_state(sys.size());
  try {
    r.traj = propagate(rho0, m, cfg.pulse, grid, sys.theta_cis, sys.theta_trans, opt);
  } catch (const NumericalError& e) {
    throw NumericalError(fmt::format("pulse run at eta = {}: {}", eta, e.what()));
  }
  const auto& T = r.traj;
  r.P_cis0 = T.P_cis.front();
  r.plateau = T.P_trans.back();
  const double t_end_pulse = cfg.pulse.t0_fs + cfg.pulse.active_half_width() / units::fs;
  for (size_t k = 0; k < T.t_fs.size(); ++k)
    if (T.t_fs[k] >= t_end_pulse) {
      r.excited_after_pulse = 1.0 - T.P_cis[k];
      break;
    }
  r.quantum_yield = r.excited_after_pulse > 0 ? r.plateau / r.excited_after_pulse : 0.0;

  const double target = 0.632 * r.plateau;
  r.rise_fs = std::numeric_limits<double>::quiet_NaN();
  for (size_t k = 1; k < T.t_fs.size(); ++k) {
    if (T.t_fs[k] < cfg.pulse.t0_fs || T.P_trans[k] < target) continue;
    const double f = (target - T.P_trans[k - 1]) / (T.P_trans[k] - T.P_trans[k - 1]);
    r.rise_fs = T.t_fs[k - 1] + std::clamp(f, 0.0, 1.0) * (T.t_fs[k] - T.t_fs[k - 1]) - cfg.pulse.t0_fs;
    break;
  }
  return r;
}

PulseResult run_pulse(const ScenarioConfig& cfg, const TorsionalSystem& sys, double eta) {
  return run_pulse(cfg, sys, eta, uniform_grid_fs(cfg.coherent_t_end_fs, cfg.coherent_dt_out_fs),
                   cfg.propagation);
}

// --- incoherent light -------------------------------------------------------------

IncoherentResult run_incoherent(const ScenarioConfig& cfg, const TorsionalSystem& sys, double eta, double L) {
  const BathSpec b = cfg.bath(eta, L);
  const RedfieldModel m = assemble_rates(sys, b);
  const RateNetwork net = make_network(m, sys);
  const VectorXd p0 = thermal_cis_populations(net, b.kT_env());
  LogGrid g;
  g.t_min = cfg.incoherent_t_min;
  g.t_max = cfg.incoherent_t_max;
  g.points_per_octave = cfg.incoherent_points_per_octave;

  IncoherentResult r;
  r.eta = eta;
  r.L = L;
  r.series = propagate_populations(net, p0, g);

  // The linear regime is read off before slow back-conversion curves the
  // trans population; that horizon scales as 1/eta like every bath rate.
  const double t_fit = cfg.fit_end_eta / eta;
  std::vector<double> t, P;
  for (size_t k = 0; k < r.series.t.size(); ++k)
    if (r.series.t[k] > 0.0 && r.series.t[k] <= t_fit * (1.0 + 1e-12)) {
      t.push_back(r.series.t[k]);
      P.push_back(r.series.P_trans[k]);
    }
  try {
    r.fit = extract_slope_and_onset(t, P);
  } catch (const NumericalError& e) {
    throw NumericalError(fmt::format("incoherent run at eta = {}, L = {}: {}", eta, L, e.what()));
  }
  r.k1 = photoexcitation_rate(cfg, L);
  if (r.k1 > 0.0) {
    r.reference = reference_three_state(eta, r.k1);
    r.slope_three_state = r.reference.slope();
    r.discrepancy = r.fit.slope > 0 ? 1.0 - r.slope_three_state / r.fit.slope : 0.0;
    if (r.fit.slope > 0) r.fitted = fit_three_state(r.k1, r.fit.slope, r.fit.t_c);
  }
  return r;
}

// --- invariants -------------------------------------------------------------------

double detailed_balance_error(const MatrixXd& w, const VectorXd& E, double kT) {
  double worst = 0.0;
  const int n = static_cast<int>(E.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double up = w(j, i), down = w(i, j);
      if (up == 0.0 && down == 0.0) continue;
      if (up == 0.0 || down == 0.0) {
        worst = std::max(worst, 1.0);
        continue;
      }
      // w(j,i) / w(i,j) should equal exp(-(E_j - E_i)/kT)
      const double lr = std::log(up) - std::log(down) + (E[j] - E[i]) / kT;
      worst = std::max(worst, std::abs(std::expm1(lr)));
    }
  return worst;
}

double relative_entropy(const VectorXd& p, const VectorXd& q) {
  double kl = 0.0;
  for (int i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) kl += p[i] * std::log(p[i] / q[i]);
  return std::max(kl, 0.0);
}

double dark_equilibrium_divergence(const ScenarioConfig& cfg, const TorsionalSystem& sys, double eta) {
  const BathSpec b = cfg.bath(eta, 0.0);
  const RedfieldModel m = assemble_rates(sys, b);
  const MatrixXd K = rate_generator(m.w_total());
  const int n = sys.size();
  VectorXd boltz(n);
  for (int i = 0; i < n; ++i) boltz[i] = std::exp(-(sys.energies[i] - sys.energies[0]) / b.kT_env());
  boltz /= boltz.sum();
  // Symmetry sectors never exchange population, so each starts with its
  // Boltzmann share, placed on its lowest state.
  VectorXd p0 = VectorXd::Zero(n);
  for (const auto& cls : communicating_classes(K)) {
    double mass = 0.0;
    int lowest = cls.front();
    for (int i : cls) {
      mass += boltz[i];
      if (sys.energies[i] < sys.energies[lowest]) lowest = i;
    }
    p0[lowest] += mass;
  }
  const VectorXd pinf = stationary_distribution(K, p0);
  return relative_entropy(pinf, boltz);
}

std::vector<Check> run_validation(const ScenarioConfig& cfg, const TorsionalSystem& sys,
                                  const ValidationOptions& opt) {
  std::vector<Check> out;
  auto add = [&](std::string name, double v, double tol) { out.push_back({std::move(name), v, tol, v <= tol}); };

  add("eigenvector residual (Ha)", sys.max_residual, 1e-8);
  add("eigenvector orthonormality", sys.orthonormality_error, 1e-10);

  {
    const BathSpec b = cfg.bath(cfg.eta_ref, cfg.L_ref);
    const RedfieldModel m = assemble_rates(sys, b);
    const RateNetwork net = make_network(m, sys);
    add("generator column sums", net.column_sum_error(), 1e-12);
    add("environment detailed balance", detailed_balance_error(m.w_env, m.energies, b.kT_env()), 1e-8);
  }
  add("dark equilibrium KL divergence", dark_equilibrium_divergence(cfg, sys, cfg.eta_ref), 1e-6);

  {
    const BathSpec b = cfg.bath(cfg.eta_ref, 0.0);
    RedfieldModel m = assemble_rates(sys, b);
    QuadratureSpec q = cfg.quadrature, q2 = cfg.quadrature;
    q.check = q2.check = false;
    q2.step_fs /= 2.0;
    q2.horizon_fs *= 2.0;
    const MatrixXd g1 = assemble_dephasing(m, b, q), g2 = assemble_dephasing(m, b, q2);
    double worst = 0.0;
    for (int i = 0; i < g1.rows(); ++i)
      for (int j = 0; j < g1.cols(); ++j)
        if (i != j && g2(i, j) > 0.0) worst = std::max(worst, std::abs(g1(i, j) / g2(i, j) - 1.0));
    add("dephasing quadrature refinement (rel)", worst, 1e-3);
  }

  if (opt.grid_doubling) {
    SystemConfig sc = cfg.system;
    sc.N *= 2;
    const TorsionalSystem fine = build_system(sc);
    const int n = std::min(fine.size(), sys.size());
    const double d = (fine.energies.head(n) - sys.energies.head(n)).cwiseAbs().maxCoeff() / units::wavenumber;
    add("eigenvalues under grid doubling (cm^-1)", d, 0.1);
  }

  for (double eta : cfg.etas) {
    const PulseResult r = run_pulse(cfg, sys, eta);
    add(fmt::format("pulse eta={} trace drift", eta), r.traj.max_trace_drift, 1e-9);
    add(fmt::format("pulse eta={} hermiticity", eta), r.traj.max_hermiticity, 1e-10);
    add(fmt::format("pulse eta={} negativity", eta), std::max(0.0, -r.traj.min_population), 1e-8);
  }

  if (opt.step_halving) {
    const auto grid = uniform_grid_fs(opt.step_halving_t_end_fs, cfg.coherent_dt_out_fs);
    PropagationOptions o1 = cfg.propagation, o2 = cfg.propagation;
    o2.step_scale = o1.step_scale * 0.5;
    const auto a = run_pulse(cfg, sys, cfg.eta_ref, grid, o1).traj;
    const auto c = run_pulse(cfg, sys, cfg.eta_ref, grid, o2).traj;
    double d = 0.0;
    for (size_t k = 0; k < a.t_fs.size(); ++k)
      d = std::max({d, std::abs(a.P_cis[k] - c.P_cis[k]), std::abs(a.P_trans[k] - c.P_trans[k])});
    add("pulse observables under step halving", d, 1e-5);
  }

  {
    const auto r = run_incoherent(cfg, sys, cfg.eta_ref, cfg.L_ref);
    double d = 0.0;
    for (double s : r.series.total) d = std::max(d, std::abs(s - 1.0));
    add("incoherent probability conservation", d, 1e-10);
  }
  return out;
}

// --- output -----------------------------------------------------------------------

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << content;
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  fs::rename(tmp, p);
}

namespace {

std::string num(double x) { return fmt::format("{:.10e}", x); }

std::string path_in(const ScenarioConfig& cfg, const std::string& name) {
  return (fs::path(cfg.out_dir) / name).string();
}

std::string tag(double x) { return fmt::format("{:g}", x); }

}  // namespace

std::string eigens_csv(const TorsionalSystem& sys) {
  std::string s = "index,energy_cm,excitation_cm,w_cis,w_trans,w_e,parity\n";
  for (int i = 0; i < sys.size(); ++i)
    s += fmt::format("{},{},{},{},{},{},{}\n", i, num(sys.energies[i] / units::wavenumber),
                     num((sys.energies[i] - sys.energies[0]) / units::wavenumber), num(sys.w_cis[i]),
                     num(sys.w_trans[i]), num(sys.w_e[i]), num(sys.parity[i]));
  return s;
}

FigureOutput run_eigens(const ScenarioConfig& cfg, const TorsionalSystem& sys) {
  FigureOutput o;
  const std::string p = path_in(cfg, "eigens.csv");
  write_file_atomic(p, eigens_csv(sys));
  o.files.push_back(p);
  o.notes.push_back(fmt::format("M = {} states, mu completeness {:.6f}, max residual {:.2e} Ha", sys.size(),
                                sys.mu_completeness, sys.max_residual));
  return o;
}

FigureOutput run_figure1(const ScenarioConfig& cfg, const TorsionalSystem& sys, std::vector<PulseResult>* res) {
  const auto runs = parallel_map<PulseResult>(static_cast<int>(cfg.etas.size()), cfg.threads,
                                              [&](int i) { return run_pulse(cfg, sys, cfg.etas[i]); });
  FigureOutput o;
  std::vector<Plot> panels;
  std::string summary =
      "eta,P_cis0,excited_after_pulse,plateau_trans,quantum_yield,rise_fs,max_trace_drift,max_hermiticity,"
      "min_population,steps\n";
  for (const auto& r : runs) {
    const auto& T = r.traj;
    std::string csv = "t_fs,P_cis,P_trans,P_e,trace,min_pop\n";
    for (size_t k = 0; k < T.t_fs.size(); ++k)
      csv += fmt::format("{},{},{},{},{},{}\n", num(T.t_fs[k]), num(T.P_cis[k]), num(T.P_trans[k]),
                         num(T.P_e[k]), num(T.trace[k]), num(T.min_pop[k]));
    const std::string p = path_in(cfg, "fig1_eta" + tag(r.eta) + ".csv");
    write_file_atomic(p, csv);
    o.files.push_back(p);
    summary += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", tag(r.eta), num(r.P_cis0), num(r.excited_after_pulse),
                           num(r.plateau), num(r.quantum_yield), num(r.rise_fs), num(T.max_trace_drift),
                           num(T.max_hermiticity), num(T.min_population), T.steps);
    Plot pl;
    pl.title = fmt::format("eta = {}", tag(r.eta));
    pl.xlabel = "t (fs)";
    pl.ylabel = "population";
    pl.series.push_back({"cis", T.t_fs, T.P_cis, ""});
    pl.series.push_back({"trans", T.t_fs, T.P_trans, "6,3"});
    panels.push_back(std::move(pl));
    o.notes.push_back(fmt::format("eta {:>5}: P_cis(0) {:.4f}  trans plateau {:.4f}  yield {:.3f}  rise {:.0f} fs",
                                  tag(r.eta), r.P_cis0, r.plateau, r.quantum_yield, r.rise_fs));
  }
  const std::string ps = path_in(cfg, "fig1_summary.csv");
  write_file_atomic(ps, summary);
  const std::string svg = path_in(cfg, "fig1.svg");
  write_file_atomic(svg, render_svg(panels));
  o.files.push_back(ps);
  o.files.push_back(svg);
  if (res) *res = runs;
  return o;
}

FigureOutput run_figure2(const ScenarioConfig& cfg, const TorsionalSystem& sys,
                         std::vector<IncoherentResult>* res) {
  std::vector<std::pair<double, double>> jobs;
  std::set<std::pair<double, double>> seen;
  for (double eta : cfg.etas)
    if (seen.insert({eta, cfg.L_ref}).second) jobs.emplace_back(eta, cfg.L_ref);
  for (double L : cfg.luminances)
    if (seen.insert({cfg.eta_ref, L}).second) jobs.emplace_back(cfg.eta_ref, L);

  const auto runs = parallel_map<IncoherentResult>(static_cast<int>(jobs.size()), cfg.threads, [&](int i) {
    return run_incoherent(cfg, sys, jobs[i].first, jobs[i].second);
  });

  FigureOutput o;
  std::string summary =
      "eta,L,s,t_c,t_c_eta_ps,s_over_L,k1,k2,k3,k4,k2_fit,slope_three_state,ratio_redfield_to_three_state,"
      "discrepancy,fit_r2,method\n";
  Plot a, b;
  a.title = fmt::format("L = {} cd/m^2", tag(cfg.L_ref));
  b.title = fmt::format("eta = {}", tag(cfg.eta_ref));
  for (Plot* p : {&a, &b}) {
    p->logx = p->logy = true;
    p->xlabel = "t (s)";
    p->ylabel = "P_trans";
  }
  const char* dashes[] = {"", "6,3", "2,2", "8,2,2,2"};
  for (size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    const auto& S = r.series;
    std::string csv = "t_s,P_cis,P_trans,P_e,total\n";
    for (size_t k = 0; k < S.t.size(); ++k)
      csv += fmt::format("{},{},{},{},{}\n", num(S.t[k]), num(S.P_cis[k]), num(S.P_trans[k]), num(S.P_e[k]),
                         num(S.total[k]));
    const std::string p = path_in(cfg, fmt::format("fig2_eta{}_L{}.csv", tag(r.eta), tag(r.L)));
    write_file_atomic(p, csv);
    o.files.push_back(p);
    const double ratio = r.slope_three_state > 0 ? r.fit.slope / r.slope_three_state : 0.0;
    summary += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", tag(r.eta), tag(r.L),
                           num(r.fit.slope), num(r.fit.t_c), num(r.fit.t_c * r.eta * 1e12),
                           num(r.L > 0 ? r.fit.slope / r.L : 0.0), num(r.k1), num(r.reference.k2),
                           num(r.reference.k3), num(r.reference.k4), num(r.fitted.k2), num(r.slope_three_state),
                           num(ratio), num(r.discrepancy), num(r.fit.r2), S.method);
    std::vector<double> t(S.t.begin() + 1, S.t.end()), P(S.P_trans.begin() + 1, S.P_trans.end());
    if (r.L == cfg.L_ref && std::count(cfg.etas.begin(), cfg.etas.end(), r.eta))
      a.series.push_back({"eta = " + tag(r.eta), t, P, dashes[a.series.size() % 4]});
    if (r.eta == cfg.eta_ref && std::count(cfg.luminances.begin(), cfg.luminances.end(), r.L))
      b.series.push_back({"L = " + tag(r.L), t, P, dashes[b.series.size() % 4]});
    o.notes.push_back(fmt::format("eta {:>5} L {:<6}: s = {:.4e} /s  t_c = {:.3e} s  (t_c eta = {:.2f} ps)  [{}]",
                                  tag(r.eta), tag(r.L), r.fit.slope, r.fit.t_c, r.fit.t_c * r.eta * 1e12,
                                  S.method));
    for (const auto& w : S.warnings) o.notes.push_back("  note: " + w);
  }
  const std::string ps = path_in(cfg, "fig2_summary.csv");
  write_file_atomic(ps, summary);
  const std::string svg = path_in(cfg, "fig2.svg");
  write_file_atomic(svg, render_svg({a, b}));
  o.files.push_back(ps);
  o.files.push_back(svg);
  if (res) *res = runs;
  return o;
}

FigureOutput run_figure3(const ScenarioConfig& cfg, double slope_ref) {
  std::vector<double> t;
  const int n = 500;
  for (int k = 0; k <= n; ++k) t.push_back(cfg.response_horizon_s * k / n);
  const auto curves =
      response_curve(slope_ref, cfg.L_ref, cfg.luminances, cfg.molecules, t, cfg.response_threshold);

  FigureOutput o;
  std::string csv = "t_s";
  for (const auto& c : curves) csv += ",P3_L" + tag(c.L);
  csv += "\n";
  for (size_t k = 0; k < t.size(); ++k) {
    csv += num(t[k]);
    for (const auto& c : curves) csv += "," + num(c.P3[k]);
    csv += "\n";
  }
  std::string summary = "L,slope,t_half_s\n";
  Plot pl;
  pl.title = fmt::format("N = {:g}, at least {}", cfg.molecules, cfg.response_threshold);
  pl.xlabel = "t (ms)";
  pl.ylabel = "P3";
  const char* dashes[] = {"4,4", "2,2", ""};
  for (size_t i = 0; i < curves.size(); ++i) {
    const auto& c = curves[i];
    summary += fmt::format("{},{},{}\n", tag(c.L), num(c.slope), num(c.t_half));
    std::vector<double> tm;
    for (double x : c.t) tm.push_back(x * 1e3);
    pl.series.push_back({"L = " + tag(c.L), tm, c.P3, dashes[i % 3]});
    o.notes.push_back(fmt::format("L {:<6}: P3 = 0.5 at {:.3f} ms", tag(c.L), c.t_half * 1e3));
  }
  for (const auto& [name, body] : {std::pair{"fig3_p3.csv", csv}, std::pair{"fig3_summary.csv", summary}}) {
    const std::string p = path_in(cfg, name);
    write_file_atomic(p, body);
    o.files.push_back(p);
  }
  const std::string svg = path_in(cfg, "fig3.svg");
  write_file_atomic(svg, render_svg({pl}));
  o.files.push_back(svg);
  return o;
}

FigureOutput run_figure4(const ScenarioConfig& cfg, const std::vector<IncoherentResult>& runs) {
  FigureOutput o;
  std::vector<Plot> panels;
  std::string summary = "eta,L,s_redfield,s_three_state,discrepancy\n";
  for (const auto& r : runs) {
    if (r.eta != cfg.eta_ref || !std::count(cfg.luminances.begin(), cfg.luminances.end(), r.L) || r.k1 <= 0)
      continue;
    const auto& S = r.series;
    const auto ts = three_state_solve(r.reference, S.t);
    std::string csv = "t_s,P_trans_redfield,P_A,P_B,P_C\n";
    for (size_t k = 0; k < S.t.size(); ++k)
      csv += fmt::format("{},{},{},{},{}\n", num(S.t[k]), num(S.P_trans[k]), num(ts.PA[k]), num(ts.PB[k]),
                         num(ts.PC[k]));
    const std::string p = path_in(cfg, fmt::format("fig4_L{}.csv", tag(r.L)));
    write_file_atomic(p, csv);
    o.files.push_back(p);
    summary += fmt::format("{},{},{},{},{}\n", tag(r.eta), tag(r.L), num(r.fit.slope), num(r.slope_three_state),
                           num(r.discrepancy));
    Plot pl;
    pl.title = fmt::format("L = {}", tag(r.L));
    pl.logx = pl.logy = true;
    pl.xlabel = "t (s)";
    pl.ylabel = "trans population";
    std::vector<double> t(S.t.begin() + 1, S.t.end());
    pl.series.push_back({"master equation", t, std::vector<double>(S.P_trans.begin() + 1, S.P_trans.end()), ""});
    pl.series.push_back({"three-state P_C", t, std::vector<double>(ts.PC.begin() + 1, ts.PC.end()), "6,3"});
    panels.push_back(std::move(pl));
    o.notes.push_back(fmt::format("L {:<6}: three-state slope {:.4e} vs {:.4e} /s ({:+.1f}%)", tag(r.L),
                                  r.slope_three_state, r.fit.slope, -100.0 * r.discrepancy));
  }
  const std::string ps = path_in(cfg, "fig4_summary.csv");
  write_file_atomic(ps, summary);
  o.files.push_back(ps);
  if (!panels.empty()) {
    const std::string svg = path_in(cfg, "fig4.svg");
    write_file_atomic(svg, render_svg(panels));
    o.files.push_back(svg);
  }
  return o;
}

}  // namespace photoiso
