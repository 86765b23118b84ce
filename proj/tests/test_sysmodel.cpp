#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "netcbc/error.hpp"
#include "netcbc/io.hpp"
#include "netcbc/presets.hpp"
#include "netcbc/sysmodel.hpp"

using namespace netcbc;
using Eigen::VectorXd;

namespace {

Box interval(double lo, double hi) { return Box::cube(1, lo, hi); }

bool mentions(const ValidationReport& r, const std::string& needle) {
  for (const auto& v : r.violations)
    if (v.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("box_disjoint on intervals") {
  CHECK(box_disjoint(interval(0, 1), interval(2, 3)));
  CHECK_FALSE(box_disjoint(interval(0, 1), interval(1, 2)));  // shared endpoint counts as contact
  CHECK_FALSE(box_disjoint(interval(0, 2), interval(1, 3)));
  CHECK_THROWS_AS(box_disjoint(interval(0, 1), Box::cube(2, 0, 1)), DimensionError);
}

TEST_CASE("box_disjoint on the RLC regions") {
  const Box x0 = Box::cube(2, -0.4, 0.4);
  const Box upper(VectorXd{{4.0, 2.5}}, VectorXd{{6.0, 4.0}});
  CHECK(box_disjoint(x0, upper));
}

TEST_CASE("box_disjoint is symmetric") {
  std::srand(7);
  for (int trial = 0; trial < 500; ++trial) {
    const VectorXd a0 = VectorXd::Random(3), b0 = VectorXd::Random(3);
    const VectorXd da = VectorXd::Random(3).cwiseAbs(), db = VectorXd::Random(3).cwiseAbs();
    const Box a(a0, a0 + da), b(b0, b0 + db);
    CHECK(box_disjoint(a, b) == box_disjoint(b, a));
  }
}

TEST_CASE("RLC preset validates") {
  const ProblemConfig cfg = parse_config(rlc_preset_json());
  const ValidationReport r = validate(cfg.system, cfg.channel, cfg.safety);
  CHECK_MESSAGE(r.ok(), r.summary());
}

TEST_CASE("validate reports the individual violations") {
  ProblemConfig cfg = parse_config(rlc_preset_json());

  SUBCASE("initial set equals an unsafe region") {
    cfg.safety.X0 = cfg.safety.X1[0];
    CHECK(mentions(validate(cfg.system, cfg.channel, cfg.safety), "initial and unsafe sets intersect"));
  }
  SUBCASE("negative variance") {
    cfg.system.noise_var << -0.1, 0.1;
    CHECK(mentions(validate(cfg.system, cfg.channel, cfg.safety), "negative variance"));
  }
  SUBCASE("probabilities must be strict") {
    cfg.channel.p_theta = 1.0;
    cfg.channel.q_phi = 0.0;
    const auto r = validate(cfg.system, cfg.channel, cfg.safety);
    CHECK(mentions(r, "p_theta"));
    CHECK(mentions(r, "q_phi"));
    CHECK(validate_for_simulation(cfg.system, cfg.channel, cfg.safety).ok());
  }
  SUBCASE("shape errors") {
    cfg.system.B.resize(3, 2);
    cfg.system.B.setOnes();
    CHECK(mentions(validate(cfg.system, cfg.channel, cfg.safety), "B must be"));
  }
  SUBCASE("containment and horizon") {
    cfg.safety.X0 = Box::cube(2, -7, -6.5);
    cfg.safety.T = 0;
    const auto r = validate(cfg.system, cfg.channel, cfg.safety);
    CHECK(mentions(r, "X0 is not contained in X"));
    CHECK(mentions(r, "horizon"));
  }
  SUBCASE("inverted box") {
    cfg.safety.U = Box(VectorXd::Ones(2), -VectorXd::Ones(2));
    CHECK(mentions(validate(cfg.system, cfg.channel, cfg.safety), "U: lower exceeds upper"));
  }
  SUBCASE("no unsafe region") {
    cfg.safety.X1.clear();
    CHECK(mentions(validate(cfg.system, cfg.channel, cfg.safety), "at least one region"));
  }
}

TEST_CASE("validate is deterministic") {
  ProblemConfig cfg = parse_config(rlc_preset_json());
  cfg.system.noise_var << -1, -1;
  cfg.safety.X0 = cfg.safety.X1[1];
  const auto a = validate(cfg.system, cfg.channel, cfg.safety);
  const auto b = validate(cfg.system, cfg.channel, cfg.safety);
  CHECK(a.violations == b.violations);
  CHECK(a.violations.size() >= 2);
}

TEST_CASE("config parsing rejects malformed documents") {
  json doc = rlc_preset_json();
  SUBCASE("missing U") {
    doc["safety"].erase("U");
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
  }
  SUBCASE("ragged matrix") {
    doc["system"]["A"] = json::parse("[[1, 2], [3]]");
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
  }
  SUBCASE("non-integer delay") {
    doc["channel"]["tau"] = 1.5;
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
  }
  SUBCASE("delta grid entries must sum to one") {
    doc["solver"]["delta_grid"] = json::parse("[[0.5, 0.1, 0.1, 0.1, 0.1]]");
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
  }
}

TEST_CASE("overrides use dotted keys and JSON values") {
  json doc = rlc_preset_json();
  apply_override(doc, "channel.tau=1");
  apply_override(doc, "channel.q_phi=0.5");
  apply_override(doc, "solver.joint_fallback=false");
  const ProblemConfig cfg = parse_config(doc);
  CHECK(cfg.channel.tau == 1);
  CHECK(cfg.channel.q_phi == doctest::Approx(0.5));
  CHECK_FALSE(cfg.search.joint_fallback);
  CHECK_THROWS_AS(apply_override(doc, "novalue"), ConfigError);
}

TEST_CASE("config hash is stable and sensitive") {
  const ProblemConfig a = parse_config(rlc_preset_json());
  ProblemConfig b = a;
  CHECK(config_hash(a) == config_hash(b));
  b.channel.p_theta = 0.92;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_hash(a).size() == 16);
}

TEST_CASE("the shipped RLC config file describes the built-in preset") {
  const ProblemConfig file = parse_config(load_json_file(NETCBC_SOURCE_DIR "/configs/rlc.json"));
  const ProblemConfig preset = parse_config(rlc_preset_json());
  CHECK(config_hash(file) == config_hash(preset));
}
