#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "netcbc/augment.hpp"
#include "netcbc/lmi.hpp"
#include "netcbc/sysmodel.hpp"

namespace netcbc {

/// Quadratic barrier B(Z) = Z' P Z together with the gain it certifies.
struct Certificate {
  Eigen::MatrixXd P;
  Eigen::MatrixXd F;
  double eta = 0;
  double beta = 0;
  std::vector<double> beta_per_region;
  double c = 0;
  int T = 0;
  double xi = 1;
  double margin = 0;
  DeltaWeights delta;
  std::string route;
  std::string config_hash;
};

template <typename DerivedP, typename DerivedZ>
double barrier_value(const Eigen::MatrixBase<DerivedP>& P, const Eigen::MatrixBase<DerivedZ>& z) {
  if (P.rows() != z.size() || P.cols() != z.size()) throw std::invalid_argument("barrier_value: dimension mismatch");
  return z.dot(P * z);
}

/// lambda_max(P) times the largest ||Z||^2 with every state block in X0 and every input block in U.
double level_eta(const Eigen::MatrixXd& P, const SafetySpec& spec, const AugDims& dims);

struct BetaLevels {
  double beta;
  std::vector<double> per_region;
};

/// Per unsafe region, lambda_min(P) times the smallest ||Z||^2 with state blocks in
/// the region and input blocks in U; beta is the minimum over regions.
BetaLevels level_beta(const Eigen::MatrixXd& P, const SafetySpec& spec, const AugDims& dims);

/// Tr(D' P D Sigma_w) with Sigma_w = blockdiag(diag(noise_var)) over tau+1 lags.
double constant_c(const Eigen::MatrixXd& P, const Eigen::MatrixXd& D, const Eigen::VectorXd& noise_var, int tau);

/// min(1, (eta + c T) / beta); throws BetaNotAboveEta unless beta > eta.
double safety_bound(double eta, double beta, double c, int T);

/// Exact E[B(Z_{k+1}) | Z_k = z] under the collapsed downlink variable and Gaussian noise.
double expected_next_barrier(const AugmentedSystem& aug, const Eigen::MatrixXd& P, const Eigen::MatrixXd& F,
                             const Eigen::VectorXd& z, const Eigen::VectorXd& noise_var);

/// Recomputes eta, beta, c, xi and the margin of a (P, F) pair.
Certificate evaluate_certificate(const AugmentedSystem& aug, const SafetySpec& spec, const Eigen::MatrixXd& P,
                                 const Eigen::MatrixXd& F);

/// Synthesis (algorithm1) followed by the level sets and the bound.
Certificate algorithm2(const SystemSpec& sys, const ChannelSpec& ch, const SafetySpec& spec,
                       const DeltaSearchConfig& search = {});

}  // namespace netcbc
