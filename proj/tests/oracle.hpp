#pragma once
// Independent reference implementations used only by the tests.

#include <Eigen/Dense>

namespace oracle {

using Eigen::MatrixXd;

inline MatrixXd power(const MatrixXd& A, int k) {
  MatrixXd R = MatrixXd::Identity(A.rows(), A.cols());
  for (int i = 0; i < k; ++i) R = A * R;
  return R;
}

/// Full augmented matrix with the downlink indicator phi written in literally,
/// block by block, in the layout [x_0..x_tau | xc_0, xc_1 | u_0..u_{tau+1} | uc_0..uc_tau].
inline MatrixXd direct_assembly(const MatrixXd& A, const MatrixXd& B, const MatrixXd& F, int tau, double p,
                                double phi) {
  const long n = A.rows(), m = B.cols();
  const long psi = n * (tau + 1), vp = m * (tau + 1);
  const long kap = 2 * vp + psi + 2 * n + m;
  MatrixXd Z = MatrixXd::Zero(kap, kap);
  auto X = [&](long j) { return j * n; };
  auto C = [&](long j) { return psi + j * n; };
  auto U = [&](long j) { return psi + 2 * n + j * m; };
  auto UC = [&](long j) { return psi + 2 * n + vp + m + j * m; };
  const double nphi = 1.0 - phi;

  auto coupling = [&](int j) -> MatrixXd {
    if (j == 0) return B;
    if (j == 1) return p * A * B + (1 - p) * B;
    return p * power(A, j) * B;
  };

  // plant
  Z.block(X(0), X(tau), n, n) += power(A, tau + 1);
  Z.block(X(0), U(0), n, m) += B;
  for (int j = 2; j <= tau + 1; ++j) Z.block(X(0), U(j), n, m) += phi * power(A, j - 1) * B;
  Z.block(X(0), UC(0), n, m) += B;
  for (int j = 1; j <= tau; ++j) Z.block(X(0), UC(j), n, m) += nphi * power(A, j) * B;
  for (int j = 1; j <= tau; ++j) Z.block(X(j), X(j - 1), n, n) += MatrixXd::Identity(n, n);

  // controller state
  Z.block(C(0), X(tau), n, n) += p * power(A, tau + 1);
  Z.block(C(0), C(1), n, n) += (1 - p) * A * A;
  for (int j = 0; j <= tau; ++j) Z.block(C(0), UC(j), n, m) += coupling(j);
  Z.block(C(1), C(0), n, n) += MatrixXd::Identity(n, n);

  // actuator
  Z.block(U(0), X(tau), m, n) += phi * p * F * power(A, tau + 1);
  Z.block(U(0), C(1), m, n) += phi * (1 - p) * F * A;
  Z.block(U(0), U(0), m, m) += nphi * MatrixXd::Identity(m, m);
  for (int j = 0; j <= tau; ++j) Z.block(U(0), UC(j), m, m) += phi * F * coupling(j);

  // controller input
  Z.block(UC(0), X(tau), m, n) += p * F * power(A, tau + 1);
  Z.block(UC(0), C(1), m, n) += (1 - p) * F * A * A;
  for (int j = 0; j <= tau; ++j) Z.block(UC(0), UC(j), m, m) += F * coupling(j);
  return Z;
}

}  // namespace oracle
