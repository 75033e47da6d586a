#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "photoiso/config.hpp"
#include "photoiso/errors.hpp"

using namespace photoiso;

TEST_CASE("default configuration is valid and round-trips") {
  const ScenarioConfig d;
  CHECK_NOTHROW(d.validate());
  const std::string text = serialize_config(d);
  const ScenarioConfig back = parse_config(text);
  CHECK(serialize_config(back) == text);
  CHECK(back.etas == d.etas);
  CHECK(back.system.N == d.system.N);
  CHECK(back.pulse.shape == d.pulse.shape);
  CHECK(back.fit_end_eta == d.fit_end_eta);
}

TEST_CASE("perturbed configurations round-trip exactly") {
  std::mt19937_64 rng(ScenarioConfig{}.seed);
  std::uniform_real_distribution<double> U(0.5, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    ScenarioConfig c;
    c.system.model.B *= U(rng);
    c.system.model.coupling *= U(rng);
    c.T_env *= U(rng);
    c.etas = {U(rng) * 10, U(rng) * 40};
    c.luminances = {U(rng) * 0.01};
    c.pulse.E0 *= U(rng);
    c.pulse.shape = trial % 2 ? Envelope::Gaussian : Envelope::Sin2;
    c.incoherent_points_per_octave = 1 + trial;
    c.propagation.rtol = 1e-9 * U(rng);
    c.dephasing_include_spontaneous = trial % 3 == 0;
    c.out_dir = "runs/case" + std::to_string(trial);
    const std::string s = serialize_config(c);
    const ScenarioConfig back = parse_config(s);
    CHECK(serialize_config(back) == s);
    CHECK(back.system.model.B == c.system.model.B);  // shortest round-trip formatting
    CHECK(back.etas == c.etas);
    CHECK(back.out_dir == c.out_dir);
  }
}

TEST_CASE("comments, blank lines and partial files") {
  const auto c = parse_config(R"(
# a comment
[bath]
etas = 10, 20   # trailing comment
L_ref = 0.05

[pulse]
envelope = gaussian
)");
  CHECK(c.etas == std::vector<double>{10.0, 20.0});
  CHECK(c.L_ref == 0.05);
  CHECK(c.pulse.shape == Envelope::Gaussian);
  CHECK(c.system.N == ScenarioConfig{}.system.N);  // untouched keys keep defaults
}

TEST_CASE("malformed or out-of-range input is rejected") {
  CHECK_THROWS_AS(parse_config("[bath]\nunknown = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[nosuch]\netas = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[bath]\netas = 1, x\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[bath]\netas =\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[bath]\netas = -3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[bath]\netas = 5000\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[bath]\nluminances = -0.1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[system]\ngrid_points = 16\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[system]\ngrid_points = 128.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[system]\nconstant_coupling = maybe\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[pulse]\nenvelope = square\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[pulse]\nfwhm_fs = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[coherent]\ninitial_state = excited\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[bath\netas = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[bath]\netas 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nthreads = 0\n"), ConfigError);
}

TEST_CASE("configuration files") {
  CHECK_THROWS_AS(load_config("/nonexistent/photoiso.cfg"), ConfigError);
  const std::string path = "photoiso_test_config.cfg";
  {
    std::ofstream f(path);
    f << "[incoherent]\npoints_per_octave = 8\n";
  }
  CHECK(load_config(path).incoherent_points_per_octave == 8);
  std::remove(path.c_str());
}

TEST_CASE("bath view of the configuration") {
  ScenarioConfig c;
  c.T_env = 310.0;
  const BathSpec b = c.bath(12.5, 0.06);
  CHECK(b.eta == 12.5);
  CHECK(b.luminance == 0.06);
  CHECK(b.T_env == 310.0);
  CHECK(b.C() == doctest::Approx(0.06 / c.scale_denominator));
}
