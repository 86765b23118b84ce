#pragma once

#include <vector>

#include <Eigen/Dense>

#include "netcbc/sysmodel.hpp"

namespace netcbc {

/// Widths of the augmented state Z = [x_hist; xc_hist; u_hist; uc_hist].
struct AugDims {
  Index n = 0, m = 0;
  int tau = 0;
  Index psi = 0;    ///< n(tau+1), plant-history width
  Index varpi = 0;  ///< m(tau+1), controller-input-history width
  Index kappa = 0;  ///< 2 varpi + psi + 2n + m

  // Offsets of the individual blocks inside Z.
  Index x(Index j) const { return j * n; }
  Index xc(Index j) const { return psi + j * n; }
  Index u(Index j) const { return psi + 2 * n + j * m; }
  Index uc(Index j) const { return psi + 2 * n + varpi + m + j * m; }

  Index state_blocks() const { return tau + 3; }  ///< plant history + both controller copies
  Index input_blocks() const { return 2 * tau + 3; }
};

/// Throws DimensionError unless n, m >= 1 and tau >= 0.
AugDims dimensions(Index n, Index m, int tau);

/// One gain-dependent term S * F * R of an AffineMatrix.
struct AffineTerm {
  Eigen::MatrixXd row_selector;  ///< kappa x m
  Eigen::MatrixXd right_factor;  ///< n x kappa
};

/// value(F) = constant + sum_i S_i F R_i; linear in the entries of F.
struct AffineMatrix {
  Eigen::MatrixXd constant;
  std::vector<AffineTerm> terms;

  Eigen::MatrixXd value(const Eigen::MatrixXd& F) const;

  /// d value / d F_{ij}: the constant-free matrix S e_i e_j^T R summed over terms.
  Eigen::MatrixXd partial(Index i, Index j) const;

  bool depends_on_gain() const { return !terms.empty(); }
};

/// Augmented closed loop Z_{k+1} = (A1 + A2 + zeta A3) Z_k + D w_k with the
/// downlink indicator written as phi = q (1 - zeta), E[zeta] = 0.
struct AugmentedSystem {
  AugDims dims;
  AffineMatrix A1;  ///< gain-free plant and controller-state rows
  AffineMatrix A2;  ///< q-weighted mean of the input rows
  AffineMatrix A3;  ///< zero-mean part multiplying zeta
  Eigen::MatrixXd D;
  SystemSpec system;
  ChannelSpec channel;

  /// (1 - q) / q, the second moment of zeta.
  double zeta_variance() const { return (1.0 - channel.q_phi) / channel.q_phi; }
};

AugmentedSystem build(const SystemSpec& sys, const ChannelSpec& ch);

/// zeta = 1 - phi / q for phi in {0, 1}.
double zeta_of(int phi, double q);

/// A1 + A2 + zeta A3 at the given downlink realization; phi must be 0 or 1.
Eigen::MatrixXd assemble_realized(const AugmentedSystem& aug, const Eigen::MatrixXd& F, int phi);

/// A1 + A2, the conditional mean of the realized matrix.
Eigen::MatrixXd assemble_mean(const AugmentedSystem& aug, const Eigen::MatrixXd& F);

struct AugState {
  std::vector<Eigen::VectorXd> x_hist;   ///< x_k ... x_{k-tau}
  std::vector<Eigen::VectorXd> xc_hist;  ///< xhat^c_k, xhat^c_{k-1}
  std::vector<Eigen::VectorXd> u_hist;   ///< u_k ... u_{k-tau-1}
  std::vector<Eigen::VectorXd> uc_hist;  ///< uhat^c_k ... uhat^c_{k-tau}

  static AugState zeros(const AugDims& d);
};

Eigen::VectorXd pack(const AugState& s, const AugDims& d);
AugState unpack(const Eigen::VectorXd& z, const AugDims& d);

/// A^k by repeated multiplication.
Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& A, int k);

}  // namespace netcbc
