#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "netcbc/augment.hpp"
#include "netcbc/sdp.hpp"

namespace netcbc {

/// Weights splitting the master inequality into five separately enforced pieces.
struct DeltaWeights {
  double d1 = 0, d2 = 0, d3 = 0, d4 = 0, d5 = 0;

  double sum() const { return d1 + d2 + d3 + d4 + d5; }
  bool valid(double tol = 1e-9) const;
  std::vector<double> as_vector() const { return {d1, d2, d3, d4, d5}; }
  static DeltaWeights from_vector(const std::vector<double>& v);
};

/// d1 in {0.3, 0.5, 0.7} crossed with three fixed splits of the remaining mass.
std::vector<DeltaWeights> default_delta_grid();

struct DeltaSearchConfig {
  std::vector<DeltaWeights> candidates;  ///< empty -> default_delta_grid()
  FeasibilitySettings sdp;
  double eps_pd = 1e-6;
  double tol = 1e-8;           ///< acceptance threshold on the master-inequality margin
  bool joint_fallback = true;  ///< alternate P/F steps on the full inequality when the grid fails
  int joint_rounds = 10;
};

/// A stage solve: the raw solver outcome plus the decoded matrix (P or F).
struct StageOutcome {
  FeasibilityOutcome raw;
  Eigen::MatrixXd value;

  bool feasible() const { return raw.status == FeasibilityStatus::Feasible; }
};

/// Linear constraint row(s) enforcing Tr P = kappa on the packed symmetric variables.
LinearEqualities trace_normalization(Index kappa);

/// P >= eps I, d1 P - A1' P A1 >= 0, Tr P = kappa.
StageOutcome stage1_find_P(const AugmentedSystem& aug, double d1, double eps, const FeasibilitySettings& settings = {});

/// Gain search with P fixed: the symmetrized cross term and the two Schur blocks.
StageOutcome stage2_find_F(const AugmentedSystem& aug, const Eigen::MatrixXd& P, const DeltaWeights& d,
                           const FeasibilitySettings& settings = {});

/// P with F fixed on the full inequality (linear in P), normalized by trace.
StageOutcome joint_find_P(const AugmentedSystem& aug, const Eigen::MatrixXd& F, double eps,
                          const FeasibilitySettings& settings = {});

/// F with P fixed on the Schur form of the full inequality (linear in F).
StageOutcome joint_find_F(const AugmentedSystem& aug, const Eigen::MatrixXd& P, const FeasibilitySettings& settings = {});

/// [[P, P X], [X' P, c P]]; PSD iff c P - X' P X >= 0 when P > 0.
Eigen::MatrixXd schur_block(const Eigen::MatrixXd& P, const Eigen::MatrixXd& X, double c);

/// Abar' P Abar + r A3' P A3 - P with Abar = A1 + A2 and r = (1-q)/q.
Eigen::MatrixXd master_matrix(const AugmentedSystem& aug, const Eigen::MatrixXd& P, const Eigen::MatrixXd& F);

/// lambda_max of the master matrix; the pair certifies iff this is <= tol.
double verify_master_inequality(const AugmentedSystem& aug, const Eigen::MatrixXd& P, const Eigen::MatrixXd& F);

/// m x n gain from its column-major packing and back.
Eigen::MatrixXd gain_from_vec(const Eigen::VectorXd& x, Index m, Index n);

struct SynthesisResult {
  Eigen::MatrixXd P;
  Eigen::MatrixXd F;
  DeltaWeights delta;  ///< accepting weights; all zero on the joint route
  double margin = 0;
  std::string route;   ///< "delta-grid" or "joint"
  int candidates_tried = 0;
};

/// Tries every delta candidate (stage 1 then stage 2), accepting the first
/// pair that passes verify_master_inequality, then the joint fallback if
/// enabled. Throws ExhaustedSearch when nothing verifies.
SynthesisResult algorithm1(const SystemSpec& sys, const ChannelSpec& ch, const DeltaSearchConfig& search = {});
SynthesisResult algorithm1(const AugmentedSystem& aug, const DeltaSearchConfig& search = {});

}  // namespace netcbc
