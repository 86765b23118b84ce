#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "netcbc/certificate.hpp"
#include "netcbc/error.hpp"
#include "netcbc/io.hpp"
#include "oracle.hpp"

using namespace netcbc;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ProblemConfig toy() { return parse_config(load_json_file(NETCBC_SOURCE_DIR "/configs/scalar_fast.json")); }

VectorXd sample_box(std::mt19937_64& g, const Box& b) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  VectorXd x(b.dim());
  for (Index i = 0; i < b.dim(); ++i) x[i] = b.lower[i] + (b.upper[i] - b.lower[i]) * u(g);
  return x;
}

VectorXd sample_augmented(std::mt19937_64& g, const AugDims& d, const Box& states, const Box& inputs) {
  AugState s = AugState::zeros(d);
  for (auto& v : s.x_hist) v = sample_box(g, states);
  for (auto& v : s.xc_hist) v = sample_box(g, states);
  for (auto& v : s.u_hist) v = sample_box(g, inputs);
  for (auto& v : s.uc_hist) v = sample_box(g, inputs);
  return pack(s, d);
}

SafetySpec unit_spec(Index n, Index m, double x0, const Box& region) {
  SafetySpec s;
  s.X = Box::cube(n, -10, 10);
  s.X0 = Box::cube(n, -x0, x0);
  s.X1 = {region};
  s.U = Box::cube(m, 0, 0);
  s.T = 100;
  return s;
}

struct Synthesized {
  ProblemConfig cfg;
  AugmentedSystem aug;
  SynthesisResult syn;
};

const Synthesized& toy_synthesis() {
  static const Synthesized s = [] {
    Synthesized out{toy(), {}, {}};
    out.aug = build(out.cfg.system, out.cfg.channel);
    out.syn = algorithm1(out.aug, out.cfg.search);
    return out;
  }();
  return s;
}

}  // namespace

TEST_CASE("barrier value") {
  CHECK(barrier_value(MatrixXd::Identity(3, 3), VectorXd::Zero(3)) == 0.0);
  const VectorXd z = VectorXd::Random(4);
  CHECK(barrier_value(MatrixXd::Identity(4, 4), z) == doctest::Approx(z.squaredNorm()));
  CHECK(barrier_value(Eigen::Vector2d(2, 3).asDiagonal().toDenseMatrix(), Eigen::Vector2d(1, 1)) == 5.0);
  CHECK_THROWS(barrier_value(MatrixXd::Identity(3, 3), VectorXd::Zero(2)));
}

TEST_CASE("initial level set") {
  const AugDims d = dimensions(2, 2, 3);
  const MatrixXd I = MatrixXd::Identity(30, 30);
  CHECK(level_eta(I, unit_spec(2, 2, 1.0, Box::cube(2, 5, 6)), d) == doctest::Approx(6.0 * 2));
  CHECK(level_eta(I, unit_spec(2, 2, 0.4, Box::cube(2, 5, 6)), d) == doctest::Approx(1.92));
  const AugDims d1 = dimensions(1, 1, 0);
  CHECK(level_eta(MatrixXd::Identity(6, 6), unit_spec(1, 1, 1.0, Box::cube(1, 5, 6)), d1) == doctest::Approx(3.0));
  CHECK(level_eta(2.0 * I, unit_spec(2, 2, 1.0, Box::cube(2, 5, 6)), d) == doctest::Approx(24.0));
}

TEST_CASE("unsafe level set") {
  const AugDims d = dimensions(2, 2, 3);
  const MatrixXd I = MatrixXd::Identity(30, 30);
  SafetySpec s = unit_spec(2, 2, 1.0, Box::cube(2, 2, 3));
  s.U = Box::cube(2, -1, 1);
  BetaLevels b = level_beta(I, s, d);
  CHECK(b.beta == doctest::Approx(48.0));
  REQUIRE(b.per_region.size() == 1);

  Box straddle{Eigen::Vector2d(-1, 2), Eigen::Vector2d(1, 3)};
  s.X1 = {Box::cube(2, 2, 3), straddle};
  b = level_beta(I, s, d);
  REQUIRE(b.per_region.size() == 2);
  CHECK(b.per_region[1] == doctest::Approx(6.0 * 4));
  CHECK(b.beta == *std::min_element(b.per_region.begin(), b.per_region.end()));

  s.X1 = {Box::cube(2, -1, 1)};
  CHECK(level_beta(I, s, d).beta == 0.0);
}

TEST_CASE("noise constant") {
  for (int tau : {0, 1, 3}) {
    const Index n = 2;
    const AugmentedSystem aug =
        build({MatrixXd::Identity(n, n), MatrixXd::Identity(n, 1), VectorXd::Constant(n, 0.25)}, {tau, 0.9, 0.9});
    const MatrixXd I = MatrixXd::Identity(aug.dims.kappa, aug.dims.kappa);
    CHECK(constant_c(I, aug.D, aug.system.noise_var, tau) == doctest::Approx((tau + 1) * n * 0.25));
    CHECK(constant_c(I, aug.D, VectorXd::Zero(n), tau) == 0.0);
  }
}

TEST_CASE("safety bound arithmetic") {
  CHECK(safety_bound(0.0, 1.0, 0.0, 10) == 0.0);
  CHECK(safety_bound(0.5, 1.0, 0.01, 10) == doctest::Approx(0.6));
  CHECK(safety_bound(0.5, 1.0, 0.01, 100) == 1.0);
  CHECK_THROWS_AS(safety_bound(1.0, 1.0, 0.0, 10), BetaNotAboveEta);
  try {
    safety_bound(2.0, 1.0, 0.0, 10);
  } catch (const BetaNotAboveEta& e) {
    CHECK(e.eta() == 2.0);
    CHECK(e.beta() == 1.0);
  }
  // monotone in T and c
  double prev = 0.0;
  for (int T = 1; T <= 200; T += 7) {
    const double xi = safety_bound(0.1, 3.0, 0.005, T);
    CHECK(xi >= prev);
    prev = xi;
  }
  prev = 0.0;
  for (double c = 0; c <= 0.1; c += 0.01) {
    const double xi = safety_bound(0.1, 3.0, c, 20);
    CHECK(xi >= prev);
    prev = xi;
  }
}

TEST_CASE("expected next barrier closed form") {
  std::mt19937_64 g(2);
  const AugmentedSystem aug =
      build({MatrixXd::Random(2, 2) * 0.5, MatrixXd::Random(2, 1), VectorXd::Constant(2, 0.3)}, {2, 0.8, 0.7});
  const Index K = aug.dims.kappa;
  const MatrixXd P = MatrixXd::Identity(K, K);
  const MatrixXd F = MatrixXd::Random(1, 2);
  const double c = constant_c(P, aug.D, aug.system.noise_var, 2);
  CHECK(expected_next_barrier(aug, P, F, VectorXd::Zero(K), aug.system.noise_var) == doctest::Approx(c));

  AugmentedSystem only_a1 = aug;
  only_a1.A2.constant.setZero();
  only_a1.A2.terms.clear();
  only_a1.A3.constant.setZero();
  only_a1.A3.terms.clear();
  const VectorXd z = VectorXd::Random(K);
  const VectorXd a = aug.A1.constant * z;
  CHECK(expected_next_barrier(only_a1, P, F, z, VectorXd::Zero(2)) == doctest::Approx(a.squaredNorm()));

  // Monte-Carlo oracle over phi and w using the literal assembly.
  const double q = aug.channel.q_phi;
  const MatrixXd Z1 = oracle::direct_assembly(aug.system.A, aug.system.B, F, 2, aug.channel.p_theta, 1.0);
  const MatrixXd Z0 = oracle::direct_assembly(aug.system.A, aug.system.B, F, 2, aug.channel.p_theta, 0.0);
  std::bernoulli_distribution phi(q);
  std::normal_distribution<double> nrm(0.0, std::sqrt(0.3));
  const int N = 200000;
  double sum = 0, sum2 = 0;
  VectorXd w(aug.dims.psi);
  for (int i = 0; i < N; ++i) {
    for (Index j = 0; j < w.size(); ++j) w[j] = nrm(g);
    const VectorXd zn = (phi(g) ? Z1 : Z0) * z + aug.D * w;
    const double b = zn.squaredNorm();
    sum += b;
    sum2 += b * b;
  }
  const double mean = sum / N;
  const double se = std::sqrt((sum2 / N - mean * mean) / N);
  CHECK(std::abs(mean - expected_next_barrier(aug, P, F, z, aug.system.noise_var)) <= 3 * se);
}

TEST_CASE("synthesized pair is a supermartingale up to c") {
  const auto& s = toy_synthesis();
  const Index K = s.aug.dims.kappa;
  const double c = constant_c(s.syn.P, s.aug.D, s.cfg.system.noise_var, s.cfg.channel.tau);
  std::mt19937_64 g(31);
  std::normal_distribution<double> nrm(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    VectorXd z(K);
    for (Index j = 0; j < K; ++j) z[j] = nrm(g);
    const double e = expected_next_barrier(s.aug, s.syn.P, s.syn.F, z, s.cfg.system.noise_var);
    CHECK(e <= barrier_value(s.syn.P, z) + c + 1e-8 * (1 + z.squaredNorm()));
  }
}

TEST_CASE("xi is invariant under scaling P") {
  const auto& s = toy_synthesis();
  const Certificate a = evaluate_certificate(s.aug, s.cfg.safety, s.syn.P, s.syn.F);
  REQUIRE(a.beta > a.eta);
  for (double lam : {7.3, 0.01, 1e4}) {
    const Certificate b = evaluate_certificate(s.aug, s.cfg.safety, lam * s.syn.P, s.syn.F);
    CHECK(std::abs(b.xi - a.xi) <= 1e-12);
    CHECK(b.eta == doctest::Approx(lam * a.eta).epsilon(1e-12));
    CHECK(b.beta == doctest::Approx(lam * a.beta).epsilon(1e-12));
    CHECK(b.c == doctest::Approx(lam * a.c).epsilon(1e-12));
    CHECK((b.margin <= 1e-8) == (a.margin <= 1e-8));
  }
}

TEST_CASE("level sets bound the barrier on sampled points") {
  const auto& s = toy_synthesis();
  const AugDims& d = s.aug.dims;
  const SafetySpec& spec = s.cfg.safety;
  const MatrixXd& P = s.syn.P;
  const double eta = level_eta(P, spec, d);
  const BetaLevels beta = level_beta(P, spec, d);
  std::mt19937_64 g(77);
  for (int i = 0; i < 10000; ++i) {
    CHECK(barrier_value(P, sample_augmented(g, d, spec.X0, spec.U)) <= eta + 1e-9);
    for (std::size_t r = 0; r < spec.X1.size(); ++r) {
      CHECK(barrier_value(P, sample_augmented(g, d, spec.X1[r], spec.U)) >= beta.per_region[r] - 1e-9);
    }
  }
}

TEST_CASE("end-to-end certificate on the scalar configuration") {
  const ProblemConfig cfg = toy();
  const Certificate cert = algorithm2(cfg.system, cfg.channel, cfg.safety, cfg.search);
  CHECK(cert.margin <= 1e-8);
  CHECK(cert.beta > cert.eta);
  CHECK(cert.xi < 1.0);
  CHECK(cert.xi == doctest::Approx(std::min(1.0, (cert.eta + cert.c * cert.T) / cert.beta)));
  CHECK(cert.T == cfg.safety.T);
  CHECK_FALSE(cert.route.empty());
}

TEST_CASE("a distant unsafe set gives a near-zero bound") {
  ProblemConfig cfg = toy();
  cfg.safety.X = Box::cube(1, -100, 100);
  cfg.safety.X1 = {Box::cube(1, 50, 60)};
  const Certificate far = algorithm2(cfg.system, cfg.channel, cfg.safety, cfg.search);
  CHECK(far.xi < 1e-3);
  const Certificate near = algorithm2(toy().system, toy().channel, toy().safety, toy().search);
  CHECK(far.xi < near.xi);
}

TEST_CASE("overlapping initial and unsafe sets are rejected") {
  ProblemConfig cfg = toy();
  cfg.safety.X1 = {Box::cube(1, 0.0, 1.0)};
  CHECK_THROWS_AS(algorithm2(cfg.system, cfg.channel, cfg.safety, cfg.search), ConfigError);
}
