#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "netcbc/error.hpp"
#include "netcbc/sdp.hpp"

using namespace netcbc;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

AffineSymmetric sym_matrix(Index k, double scale = 1.0, const MatrixXd& offset = MatrixXd()) {
  const MatrixXd off = offset.size() ? offset : MatrixXd::Zero(k, k);
  return AffineSymmetric::from_function([=](const VectorXd& x) -> MatrixXd { return scale * sym_from_vec(x, k) + off; },
                                        sym_vars(k));
}

}  // namespace

TEST_CASE("symmetric packing round-trips") {
  MatrixXd P = MatrixXd::Random(4, 4);
  P = (P + P.transpose()).eval();
  CHECK(sym_from_vec(sym_to_vec(P), 4) == P);
  CHECK(sym_vars(30) == 465);
  CHECK_THROWS_AS(sym_from_vec(VectorXd::Zero(5), 3), DimensionError);
}

TEST_CASE("from_function recovers an affine symmetric map") {
  const MatrixXd X = MatrixXd::Random(3, 3);
  const auto fn = AffineSymmetric::from_function(
      [&](const VectorXd& x) -> MatrixXd { return X.transpose() * sym_from_vec(x, 3) * X + MatrixXd::Identity(3, 3); },
      sym_vars(3));
  const VectorXd x = VectorXd::Random(sym_vars(3));
  const MatrixXd direct = X.transpose() * sym_from_vec(x, 3) * X + MatrixXd::Identity(3, 3);
  CHECK((fn.eval(x) - direct).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("P >= I is feasible") {
  std::vector<LmiConstraint> cons{{"P >= I", sym_matrix(2), Sense::PositiveSemidefinite, 1.0}};
  const auto out = solve_feasibility(cons, sym_vars(2));
  REQUIRE(out.status == FeasibilityStatus::Feasible);
  CHECK(lambda_min_sym(sym_from_vec(out.point, 2)) >= 1.0);
  CHECK(out.residuals.size() == 1);
  CHECK(out.residuals[0] >= 0.0);
}

TEST_CASE("P >= I together with -P >= 0 is infeasible") {
  std::vector<LmiConstraint> cons{{"P >= I", sym_matrix(2), Sense::PositiveSemidefinite, 1.0},
                                  {"-P >= 0", sym_matrix(2, -1.0), Sense::PositiveSemidefinite, 0.0}};
  const auto out = solve_feasibility(cons, sym_vars(2));
  CHECK(out.status == FeasibilityStatus::Infeasible);
  CHECK(out.upper_bound < 0.0);
  CHECK(out.margin == doctest::Approx(-0.5).epsilon(1e-4));
}

TEST_CASE("negative-semidefinite sense and equalities") {
  // P - 2I <= 0, P >= 0.5 I, trace P = 3 on 2x2: feasible, e.g. diag(1.5, 1.5).
  LinearEqualities eq;
  eq.E = MatrixXd::Zero(1, 3);
  eq.E(0, 0) = 1;
  eq.E(0, 2) = 1;
  eq.e = VectorXd::Constant(1, 3.0);
  std::vector<LmiConstraint> cons{
      {"P <= 2I", sym_matrix(2, 1.0, -2.0 * MatrixXd::Identity(2, 2)), Sense::NegativeSemidefinite, 0.0},
      {"P >= 0.5I", sym_matrix(2), Sense::PositiveSemidefinite, 0.5}};
  const auto out = solve_feasibility(cons, 3, &eq);
  REQUIRE(out.status == FeasibilityStatus::Feasible);
  const MatrixXd P = sym_from_vec(out.point, 2);
  CHECK(P.trace() == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(lambda_max_sym(P) <= 2.0 + 1e-12);
  CHECK(lambda_min_sym(P) >= 0.5 - 1e-12);

  // trace 5 is incompatible with P <= 2I in two dimensions.
  eq.e[0] = 5.0;
  CHECK(solve_feasibility(cons, 3, &eq).status == FeasibilityStatus::Infeasible);
}

TEST_CASE("inconsistent equalities are reported infeasible") {
  LinearEqualities eq;
  eq.E = MatrixXd::Zero(2, 3);
  eq.E(0, 0) = 1;
  eq.E(1, 0) = 1;
  eq.e = VectorXd(2);
  eq.e << 1, 2;
  std::vector<LmiConstraint> cons{{"P >= 0", sym_matrix(2), Sense::PositiveSemidefinite, 0.0}};
  CHECK(solve_feasibility(cons, 3, &eq).status == FeasibilityStatus::Infeasible);
}

TEST_CASE("stop_at returns as soon as the margin is reached") {
  std::vector<LmiConstraint> cons{{"P >= I", sym_matrix(3), Sense::PositiveSemidefinite, 1.0}};
  FeasibilitySettings s;
  s.stop_at = 0.0;
  const auto quick = solve_feasibility(cons, sym_vars(3), nullptr, s);
  const auto full = solve_feasibility(cons, sym_vars(3));
  CHECK(quick.status == FeasibilityStatus::Feasible);
  CHECK(quick.iterations <= full.iterations);
}

TEST_CASE("the solver is deterministic") {
  const MatrixXd A = 0.5 * MatrixXd::Random(4, 4);
  const auto f = AffineSymmetric::from_function(
      [&](const VectorXd& x) -> MatrixXd {
        const MatrixXd P = sym_from_vec(x, 4);
        return P - A.transpose() * P * A;
      },
      sym_vars(4));
  std::vector<LmiConstraint> cons{{"lyap", f, Sense::PositiveSemidefinite, 0.0},
                                  {"P >= I", sym_matrix(4), Sense::PositiveSemidefinite, 1.0}};
  const auto a = solve_feasibility(cons, sym_vars(4));
  const auto b = solve_feasibility(cons, sym_vars(4));
  CHECK(a.point == b.point);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("malformed constraints are rejected") {
  std::vector<LmiConstraint> cons{{"bad", sym_matrix(2), Sense::PositiveSemidefinite, 0.0}};
  CHECK_THROWS_AS(solve_feasibility(cons, 4), DimensionError);
  CHECK_THROWS(solve_feasibility({}, 3));
}
