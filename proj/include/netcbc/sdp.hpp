#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace netcbc {

using Eigen::Index;

/// Symmetric-matrix-valued affine map x -> constant + sum_i x_i G_i.
/// `basis` stores vec(G_i) column-wise, so it is (b*b) x N.
struct AffineSymmetric {
  Eigen::MatrixXd constant;
  Eigen::MatrixXd basis;

  Index size() const { return constant.rows(); }
  Index vars() const { return basis.cols(); }

  Eigen::MatrixXd eval(const Eigen::VectorXd& x) const;

  /// Samples an affine function at 0 and at the unit vectors, then symmetrizes.
  static AffineSymmetric from_function(const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& f,
                                       Index nvars);
};

enum class Sense { PositiveSemidefinite, NegativeSemidefinite };

/// sense(fn(x)) - margin I must be PSD, where sense flips the sign for NSD.
struct LmiConstraint {
  std::string label;
  AffineSymmetric fn;
  Sense sense = Sense::PositiveSemidefinite;
  double margin = 0.0;
};

/// E x = e.
struct LinearEqualities {
  Eigen::MatrixXd E;
  Eigen::VectorXd e;
};

struct FeasibilitySettings {
  int max_iter = 400;          ///< total Newton steps
  double tol = 1e-8;           ///< relative duality-gap tolerance on the phase-I margin
  double radius = 1e4;         ///< decision vector confined to ||x|| <= radius
  double stop_at = std::numeric_limits<double>::infinity();  ///< return once margin >= stop_at
};

enum class FeasibilityStatus { Feasible, Infeasible, Unknown };

const char* to_string(FeasibilityStatus s);

struct FeasibilityOutcome {
  FeasibilityStatus status = FeasibilityStatus::Unknown;
  Eigen::VectorXd point;           ///< best point found (always populated)
  double margin = 0.0;             ///< min_j lambda_min of the shifted constraints at `point`
  double upper_bound = 0.0;        ///< certified upper bound on the best achievable margin
  int iterations = 0;
  std::vector<double> residuals;   ///< per-constraint lambda_min(sense(fn) - margin I)
};

/// Phase-I log-barrier interior-point method: maximizes t subject to
/// sense_j(fn_j(x)) - margin_j I >= t I, optional equalities and the ball
/// constraint. Feasible iff the optimum is >= 0; Infeasible once a
/// duality-gap bound proves it negative. Deterministic.
FeasibilityOutcome solve_feasibility(const std::vector<LmiConstraint>& constraints, Index nvars,
                                     const LinearEqualities* equalities = nullptr,
                                     const FeasibilitySettings& settings = {});

/// Smallest eigenvalue of the symmetric part of M.
double lambda_min_sym(const Eigen::MatrixXd& M);
/// Largest eigenvalue of the symmetric part of M.
double lambda_max_sym(const Eigen::MatrixXd& M);

/// Packing of a symmetric k x k matrix into k(k+1)/2 upper-triangular entries.
Index sym_vars(Index k);
Eigen::MatrixXd sym_from_vec(const Eigen::VectorXd& x, Index k);
Eigen::VectorXd sym_to_vec(const Eigen::MatrixXd& P);

}  // namespace netcbc
