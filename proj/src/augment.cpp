#include "netcbc/augment.hpp"

#include <algorithm>
#include <string>

#include "netcbc/error.hpp"

namespace netcbc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

AugDims dimensions(Index n, Index m, int tau) {
  if (n < 1 || m < 1 || tau < 0) {
    throw DimensionError("dimensions: need n, m >= 1 and tau >= 0 (got n=" + std::to_string(n) +
                         ", m=" + std::to_string(m) + ", tau=" + std::to_string(tau) + ")");
  }
  AugDims d;
  d.n = n;
  d.m = m;
  d.tau = tau;
  d.psi = n * (tau + 1);
  d.varpi = m * (tau + 1);
  d.kappa = 2 * d.varpi + d.psi + 2 * n + m;
  return d;
}

MatrixXd AffineMatrix::value(const MatrixXd& F) const {
  MatrixXd out = constant;
  for (const auto& t : terms) {
    if (F.rows() != t.row_selector.cols() || F.cols() != t.right_factor.rows()) {
      throw DimensionError("AffineMatrix::value: gain has wrong shape");
    }
    out.noalias() += t.row_selector * (F * t.right_factor);
  }
  return out;
}

MatrixXd AffineMatrix::partial(Index i, Index j) const {
  MatrixXd out = MatrixXd::Zero(constant.rows(), constant.cols());
  for (const auto& t : terms) out.noalias() += t.row_selector.col(i) * t.right_factor.row(j);
  return out;
}

MatrixXd matrix_power(const MatrixXd& A, int k) {
  MatrixXd out = MatrixXd::Identity(A.rows(), A.cols());
  for (int i = 0; i < k; ++i) out = out * A;
  return out;
}

double zeta_of(int phi, double q) {
  if (phi != 0 && phi != 1) throw Error("zeta_of: phi must be 0 or 1");
  return 1.0 - static_cast<double>(phi) / q;
}

AugmentedSystem build(const SystemSpec& sys, const ChannelSpec& ch) {
  const AugDims d = dimensions(sys.n(), sys.m(), ch.tau);
  const Index n = d.n, m = d.m, K = d.kappa;
  const int tau = ch.tau;
  const double p = ch.p_theta, q = ch.q_phi;
  const MatrixXd& A = sys.A;
  const MatrixXd& B = sys.B;

  // A^0 .. A^{max(tau+1, 2)}; the controller-state rows need A^2 even at tau = 0.
  std::vector<MatrixXd> Ap(std::max(tau + 2, 3));
  Ap[0] = MatrixXd::Identity(n, n);
  for (std::size_t t = 1; t < Ap.size(); ++t) Ap[t] = Ap[t - 1] * A;

  // Coupling of the controller-input history into the controller-state row.
  auto uc_coupling = [&](int t) -> MatrixXd {
    if (t == 0) return B;
    if (t == 1) return p * A * B + (1.0 - p) * B;
    return p * Ap[t] * B;
  };

  AugmentedSystem aug;
  aug.dims = d;
  aug.system = sys;
  aug.channel = ch;

  MatrixXd A1 = MatrixXd::Zero(K, K);
  MatrixXd A2 = MatrixXd::Zero(K, K);
  MatrixXd A3 = MatrixXd::Zero(K, K);

  // Plant row: x_{k+1} = A^{tau+1} x_{k-tau} + input contributions.
  A1.block(d.x(0), d.x(tau), n, n) = Ap[tau + 1];
  A1.block(d.x(0), d.u(0), n, m) = B;
  A1.block(d.x(0), d.uc(0), n, m) = B;
  for (int j = 2; j <= tau + 1; ++j) {
    const MatrixXd blk = Ap[j - 1] * B;  // phi-weighted
    A2.block(d.x(0), d.u(j), n, m) = q * blk;
    A3.block(d.x(0), d.u(j), n, m) = -q * blk;
  }
  for (int j = 1; j <= tau; ++j) {
    const MatrixXd blk = Ap[j] * B;  // (1 - phi)-weighted
    A2.block(d.x(0), d.uc(j), n, m) = (1.0 - q) * blk;
    A3.block(d.x(0), d.uc(j), n, m) = q * blk;
  }
  for (int j = 1; j <= tau; ++j) A1.block(d.x(j), d.x(j - 1), n, n).setIdentity();

  // Controller state rows.
  A1.block(d.xc(0), d.x(tau), n, n) = p * Ap[tau + 1];
  A1.block(d.xc(0), d.xc(1), n, n) = (1.0 - p) * Ap[2];
  for (int j = 0; j <= tau; ++j) A1.block(d.xc(0), d.uc(j), n, m) = uc_coupling(j);
  A1.block(d.xc(1), d.xc(0), n, n).setIdentity();

  // Actuator row: the (1 - phi) hold lives in the constants, F terms are affine.
  A2.block(d.u(0), d.u(0), m, m) = (1.0 - q) * MatrixXd::Identity(m, m);
  A3.block(d.u(0), d.u(0), m, m) = q * MatrixXd::Identity(m, m);

  MatrixXd Ru = MatrixXd::Zero(n, K);
  Ru.block(0, d.x(tau), n, n) = p * Ap[tau + 1];
  Ru.block(0, d.xc(1), n, n) = (1.0 - p) * A;
  for (int j = 0; j <= tau; ++j) Ru.block(0, d.uc(j), n, m) = uc_coupling(j);

  MatrixXd Ruc = Ru;
  Ruc.block(0, d.xc(1), n, n) = (1.0 - p) * Ap[2];

  MatrixXd Eu = MatrixXd::Zero(K, m);
  Eu.block(d.u(0), 0, m, m).setIdentity();
  MatrixXd Euc = MatrixXd::Zero(K, m);
  Euc.block(d.uc(0), 0, m, m).setIdentity();

  aug.A1.constant = std::move(A1);
  aug.A2.constant = std::move(A2);
  aug.A2.terms.push_back({q * Eu, Ru});
  aug.A2.terms.push_back({Euc, Ruc});
  aug.A3.constant = std::move(A3);
  aug.A3.terms.push_back({-q * Eu, Ru});

  aug.D = MatrixXd::Zero(K, d.psi);
  for (int j = 0; j <= tau; ++j) aug.D.block(0, j * n, n, n) = Ap[j];
  return aug;
}

MatrixXd assemble_realized(const AugmentedSystem& aug, const MatrixXd& F, int phi) {
  const double zeta = zeta_of(phi, aug.channel.q_phi);
  return aug.A1.value(F) + aug.A2.value(F) + zeta * aug.A3.value(F);
}

MatrixXd assemble_mean(const AugmentedSystem& aug, const MatrixXd& F) {
  return aug.A1.value(F) + aug.A2.value(F);
}

AugState AugState::zeros(const AugDims& d) {
  AugState s;
  s.x_hist.assign(d.tau + 1, VectorXd::Zero(d.n));
  s.xc_hist.assign(2, VectorXd::Zero(d.n));
  s.u_hist.assign(d.tau + 2, VectorXd::Zero(d.m));
  s.uc_hist.assign(d.tau + 1, VectorXd::Zero(d.m));
  return s;
}

VectorXd pack(const AugState& s, const AugDims& d) {
  auto check = [](const std::vector<VectorXd>& blocks, std::size_t count, Index width, const char* name) {
    if (blocks.size() != count) throw DimensionError(std::string("pack: wrong number of ") + name + " blocks");
    for (const auto& b : blocks) {
      if (b.size() != width) throw DimensionError(std::string("pack: wrong width in ") + name);
    }
  };
  check(s.x_hist, d.tau + 1, d.n, "x_hist");
  check(s.xc_hist, 2, d.n, "xc_hist");
  check(s.u_hist, d.tau + 2, d.m, "u_hist");
  check(s.uc_hist, d.tau + 1, d.m, "uc_hist");

  VectorXd z(d.kappa);
  for (int j = 0; j <= d.tau; ++j) z.segment(d.x(j), d.n) = s.x_hist[j];
  for (int j = 0; j < 2; ++j) z.segment(d.xc(j), d.n) = s.xc_hist[j];
  for (int j = 0; j <= d.tau + 1; ++j) z.segment(d.u(j), d.m) = s.u_hist[j];
  for (int j = 0; j <= d.tau; ++j) z.segment(d.uc(j), d.m) = s.uc_hist[j];
  return z;
}

AugState unpack(const VectorXd& z, const AugDims& d) {
  if (z.size() != d.kappa) {
    throw DimensionError("unpack: length " + std::to_string(z.size()) + ", expected " + std::to_string(d.kappa));
  }
  AugState s;
  for (int j = 0; j <= d.tau; ++j) s.x_hist.push_back(z.segment(d.x(j), d.n));
  for (int j = 0; j < 2; ++j) s.xc_hist.push_back(z.segment(d.xc(j), d.n));
  for (int j = 0; j <= d.tau + 1; ++j) s.u_hist.push_back(z.segment(d.u(j), d.m));
  for (int j = 0; j <= d.tau; ++j) s.uc_hist.push_back(z.segment(d.uc(j), d.m));
  return s;
}

}  // namespace netcbc
