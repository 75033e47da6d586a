// photoiso: command-line front end for the scenarios.
#include <fmt/format.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <string>

#include "photoiso/config.hpp"
#include "photoiso/errors.hpp"
#include "photoiso/scenarios.hpp"

using namespace photoiso;

namespace {

struct Options {
  std::string config, out, scenario = "all";
  int threads = 0;
  bool strict = false, dump_config = false;
  double slope = 0.0;  // p3: use this slope instead of computing one
  std::vector<double> etas;
};

void report(const FigureOutput& o) {
  for (const auto& n : o.notes) fmt::print("  {}\n", n);
  for (const auto& f : o.files) fmt::print("  wrote {}\n", f);
}

// Invariant tolerances for pulse runs; --strict turns a breach into an error.
void check_pulse(const std::vector<PulseResult>& runs, bool strict) {
  for (const auto& r : runs) {
    const auto& T = r.traj;
    const bool bad = T.max_trace_drift > 1e-9 || T.max_hermiticity > 1e-10 || T.min_population < -1e-8;
    if (!bad) continue;
    const auto msg = fmt::format("eta = {}: trace drift {:.2e}, hermiticity {:.2e}, min population {:.2e}", r.eta,
                                 T.max_trace_drift, T.max_hermiticity, T.min_population);
    if (strict) throw NumericalError("invariant breach, " + msg);
    fmt::print(stderr, "warning: {}\n", msg);
  }
}

void check_incoherent(const std::vector<IncoherentResult>& runs, bool strict) {
  for (const auto& r : runs) {
    double d = 0.0;
    for (double s : r.series.total) d = std::max(d, std::abs(s - 1.0));
    if (d <= 1e-10) continue;
    const auto msg = fmt::format("eta = {}, L = {}: probability drift {:.2e}", r.eta, r.L, d);
    if (strict) throw NumericalError("invariant breach, " + msg);
    fmt::print(stderr, "warning: {}\n", msg);
  }
}

int run(const std::string& cmd, const Options& o) {
  ScenarioConfig cfg = o.config.empty() ? ScenarioConfig{} : load_config(o.config);
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (o.threads > 0) cfg.threads = o.threads;
  if (!o.etas.empty()) cfg.etas = o.etas;
  cfg.validate();
  if (o.dump_config) {
    fmt::print("{}", serialize_config(cfg));
    return 0;
  }

  const auto t0 = std::chrono::steady_clock::now();
  const TorsionalSystem sys = build_system(cfg.system);
  fmt::print("system: N = {}, M = {} retained states\n", sys.N, sys.size());

  auto want = [&](const char* name) { return o.scenario == "all" || o.scenario == name; };

  if (cmd == "eigens") {
    report(run_eigens(cfg, sys));
  } else if (cmd == "pulse") {
    std::vector<PulseResult> runs;
    fmt::print("pulse runs\n");
    report(run_figure1(cfg, sys, &runs));
    check_pulse(runs, o.strict);
  } else if (cmd == "incoherent") {
    std::vector<IncoherentResult> runs;
    fmt::print("incoherent runs\n");
    report(run_figure2(cfg, sys, &runs));
    check_incoherent(runs, o.strict);
  } else if (cmd == "kinetics") {
    ScenarioConfig c = cfg;
    c.etas = {cfg.eta_ref};
    std::vector<IncoherentResult> runs;
    fmt::print("three-state comparison\n");
    run_figure2(c, sys, &runs);
    check_incoherent(runs, o.strict);
    report(run_figure4(cfg, runs));
  } else if (cmd == "p3") {
    double s = o.slope;
    if (!(s > 0.0)) s = run_incoherent(cfg, sys, cfg.eta_ref, cfg.L_ref).fit.slope;
    fmt::print("response statistics, s = {:.4e} /s at L = {}\n", s, cfg.L_ref);
    report(run_figure3(cfg, s));
  } else if (cmd == "figures") {
    if (want("eigens")) report(run_eigens(cfg, sys));
    if (want("fig1")) {
      std::vector<PulseResult> runs;
      fmt::print("figure 1\n");
      report(run_figure1(cfg, sys, &runs));
      check_pulse(runs, o.strict);
    }
    if (want("fig2") || want("fig3") || want("fig4")) {
      std::vector<IncoherentResult> runs;
      fmt::print("figure 2\n");
      report(run_figure2(cfg, sys, &runs));
      check_incoherent(runs, o.strict);
      double s = 0.0;
      for (const auto& r : runs)
        if (r.eta == cfg.eta_ref && r.L == cfg.L_ref) s = r.fit.slope;
      if (want("fig3")) {
        fmt::print("figure 3\n");
        report(run_figure3(cfg, s));
      }
      if (want("fig4")) {
        fmt::print("figure 4\n");
        report(run_figure4(cfg, runs));
      }
    }
  } else if (cmd == "validate") {
    const auto checks = run_validation(cfg, sys);
    int failed = 0;
    for (const auto& c : checks) {
      fmt::print("{} {:<48} {:.3e} (tol {:.0e})\n", c.pass ? "ok  " : "FAIL", c.name, c.value, c.tolerance);
      failed += !c.pass;
    }
    fmt::print("{} of {} checks passed\n", checks.size() - failed, checks.size());
    if (failed && o.strict) throw NumericalError(fmt::format("{} invariant checks failed", failed));
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  fmt::print("done in {:.1f} s\n", dt);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photoisomerization simulator: torsional two-state model with secular Redfield dynamics"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "scenario configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", o.out, "output directory (overrides [run] out_dir)");
  app.add_option("--scenario", o.scenario, "figures subset: all | eigens | fig1 | fig2 | fig3 | fig4");
  app.add_option("--threads", o.threads, "concurrent scenario workers")->check(CLI::PositiveNumber);
  app.add_flag("--strict", o.strict, "treat any invariant tolerance breach as a numerical failure");
  app.add_flag("--dump-config", o.dump_config, "print the effective configuration and exit");
  app.add_option("--eta", o.etas, "override the coupling list");
  for (auto* name : {"eigens", "pulse", "incoherent", "kinetics", "figures", "validate"})
    app.add_subcommand(name)->fallthrough();
  auto* p3 = app.add_subcommand("p3")->fallthrough();
  p3->add_option("--slope", o.slope, "per-molecule isomerization rate at the reference luminance (s^-1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return run(cmd, o);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 2;
  } catch (const UnitError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    fmt::print(stderr, "numerical failure: {}\n", e.what());
    return 3;
  } catch (const DomainError& e) {
    fmt::print(stderr, "numerical failure: {}\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 3;
  }
}
