#include "netcbc/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "netcbc/error.hpp"

namespace netcbc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd AffineSymmetric::eval(const VectorXd& x) const {
  const Index b = size();
  VectorXd v = basis * x;
  return constant + Eigen::Map<const MatrixXd>(v.data(), b, b);
}

AffineSymmetric AffineSymmetric::from_function(const std::function<MatrixXd(const VectorXd&)>& f, Index nvars) {
  AffineSymmetric out;
  VectorXd x = VectorXd::Zero(nvars);
  const MatrixXd c = f(x);
  if (c.rows() != c.cols()) throw DimensionError("from_function: matrix must be square");
  const Index b = c.rows();
  out.constant = 0.5 * (c + c.transpose());
  out.basis.resize(b * b, nvars);
  for (Index i = 0; i < nvars; ++i) {
    x[i] = 1.0;
    MatrixXd g = f(x) - c;
    x[i] = 0.0;
    g = 0.5 * (g + g.transpose()).eval();
    out.basis.col(i) = Eigen::Map<const VectorXd>(g.data(), b * b);
  }
  return out;
}

const char* to_string(FeasibilityStatus s) {
  switch (s) {
    case FeasibilityStatus::Feasible: return "feasible";
    case FeasibilityStatus::Infeasible: return "infeasible";
    case FeasibilityStatus::Unknown: return "unknown";
  }
  return "unknown";
}

double lambda_min_sym(const MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double lambda_max_sym(const MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(M.rows() - 1);
}

Index sym_vars(Index k) { return k * (k + 1) / 2; }

MatrixXd sym_from_vec(const VectorXd& x, Index k) {
  if (x.size() != sym_vars(k)) throw DimensionError("sym_from_vec: wrong length");
  MatrixXd P(k, k);
  Index idx = 0;
  for (Index j = 0; j < k; ++j) {
    for (Index i = 0; i <= j; ++i) {
      P(i, j) = x[idx];
      P(j, i) = x[idx];
      ++idx;
    }
  }
  return P;
}

VectorXd sym_to_vec(const MatrixXd& P) {
  const Index k = P.rows();
  VectorXd x(sym_vars(k));
  Index idx = 0;
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i <= j; ++i) x[idx++] = 0.5 * (P(i, j) + P(j, i));
  return x;
}

namespace {

// Constraint data after sign flip, margin shift and elimination of equalities:
// S_j(z, t) = C_j + unvec(H_j z) - t I.
struct Block {
  Index b;
  MatrixXd C;
  MatrixXd H;
};

struct Problem {
  std::vector<Block> blocks;
  VectorXd x0;
  MatrixXd N;  // x = x0 + N z
  double R2;
  double nu;
};

VectorXd to_x(const Problem& pr, const VectorXd& z) { return pr.x0 + pr.N * z; }

MatrixXd slack(const Block& blk, const VectorXd& z, double t) {
  VectorXd v = blk.H * z;
  MatrixXd S = blk.C + Eigen::Map<const MatrixXd>(v.data(), blk.b, blk.b);
  S.diagonal().array() -= t;
  return S;
}

// Barrier objective; +inf outside the domain.
double objective(const Problem& pr, const VectorXd& z, double t, double s) {
  const VectorXd x = to_x(pr, z);
  const double c = pr.R2 - x.squaredNorm();
  if (!(c > 0.0)) return std::numeric_limits<double>::infinity();
  double f = -s * t - std::log(c);
  for (const auto& blk : pr.blocks) {
    Eigen::LLT<MatrixXd> llt(slack(blk, z, t));
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    const VectorXd d = llt.matrixLLT().diagonal();
    if ((d.array() <= 0.0).any()) return std::numeric_limits<double>::infinity();
    f -= 2.0 * d.array().log().sum();
  }
  return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
}

// Largest t for which every slack is PSD at fixed z.
double best_t(const Problem& pr, const VectorXd& z) {
  double t = std::numeric_limits<double>::infinity();
  for (const auto& blk : pr.blocks) t = std::min(t, lambda_min_sym(slack(blk, z, 0.0)));
  return t;
}

}  // namespace

FeasibilityOutcome solve_feasibility(const std::vector<LmiConstraint>& constraints, Index nvars,
                                     const LinearEqualities* equalities, const FeasibilitySettings& settings) {
  if (constraints.empty()) throw Error("solve_feasibility: no constraints");
  for (const auto& c : constraints) {
    if (c.fn.vars() != nvars) throw DimensionError("solve_feasibility: constraint '" + c.label + "' has wrong arity");
    if (c.fn.constant.rows() != c.fn.constant.cols() || c.fn.basis.rows() != c.fn.size() * c.fn.size()) {
      throw DimensionError("solve_feasibility: constraint '" + c.label + "' is malformed");
    }
  }

  Problem pr;
  pr.x0 = VectorXd::Zero(nvars);
  pr.N = MatrixXd::Identity(nvars, nvars);
  if (equalities && equalities->E.rows() > 0) {
    const MatrixXd& E = equalities->E;
    if (E.cols() != nvars || equalities->e.size() != E.rows()) {
      throw DimensionError("solve_feasibility: equality shape mismatch");
    }
    Eigen::ColPivHouseholderQR<MatrixXd> qrEt(E.transpose());
    const Index rank = qrEt.rank();
    const MatrixXd Q = qrEt.householderQ();
    pr.N = Q.rightCols(nvars - rank);
    pr.x0 = E.completeOrthogonalDecomposition().solve(equalities->e);
    if ((E * pr.x0 - equalities->e).norm() > 1e-8 * (1.0 + equalities->e.norm())) {
      FeasibilityOutcome out;
      out.status = FeasibilityStatus::Infeasible;
      out.point = pr.x0;
      out.upper_bound = -std::numeric_limits<double>::infinity();
      return out;
    }
  }
  const Index nz = pr.N.cols();

  double nu = 1.0;  // ball barrier
  for (const auto& c : constraints) {
    const Index b = c.fn.size();
    const double sign = c.sense == Sense::PositiveSemidefinite ? 1.0 : -1.0;
    Block blk;
    blk.b = b;
    VectorXd v = c.fn.basis * pr.x0;
    blk.C = sign * (c.fn.constant + Eigen::Map<const MatrixXd>(v.data(), b, b));
    blk.C = 0.5 * (blk.C + blk.C.transpose()).eval();
    blk.C.diagonal().array() -= c.margin;
    blk.H = sign * (c.fn.basis * pr.N);
    pr.blocks.push_back(std::move(blk));
    nu += static_cast<double>(b);
  }
  pr.nu = nu;
  const double radius = std::max(settings.radius, 2.0 * pr.x0.norm() + 1.0);
  pr.R2 = radius * radius;

  VectorXd z = VectorXd::Zero(nz);
  double t = best_t(pr, z);
  t -= std::max(1.0, std::abs(t));  // strictly interior start

  FeasibilityOutcome out;
  VectorXd best_z = z;
  double best_margin = best_t(pr, z);
  double ub = std::numeric_limits<double>::infinity();
  double s = pr.nu / std::max(1.0, std::abs(best_margin));
  int iters = 0;
  bool done = false;

  const Index ny = nz + 1;
  while (!done && iters < settings.max_iter) {
    // Centering at the current s.
    bool centered = false;
    double lambda2 = std::numeric_limits<double>::infinity();
    for (int inner = 0; iters < settings.max_iter; ++inner) {
      if (inner == 60) {
        centered = lambda2 < 1e-3;  // roundoff-limited; close enough to the path
        break;
      }
      ++iters;
      const VectorXd x = to_x(pr, z);
      const double cb = pr.R2 - x.squaredNorm();
      VectorXd g = VectorXd::Zero(ny);
      MatrixXd Hs = MatrixXd::Zero(ny, ny);
      g.head(nz) = pr.N.transpose() * (2.0 * x / cb);
      g[nz] = -s;
      {
        const MatrixXd Nx = pr.N.transpose() * x;
        Hs.topLeftCorner(nz, nz) = (2.0 / cb) * (pr.N.transpose() * pr.N) + (4.0 / (cb * cb)) * Nx * Nx.transpose();
      }
      bool ok = true;
      for (const auto& blk : pr.blocks) {
        const Index b = blk.b;
        Eigen::LLT<MatrixXd> llt(slack(blk, z, t));
        if (llt.info() != Eigen::Success) {
          ok = false;
          break;
        }
        const MatrixXd Linv = llt.matrixL().solve(MatrixXd::Identity(b, b));
        const MatrixXd Sinv = Linv.transpose() * Linv;
        const VectorXd vSinv = Eigen::Map<const VectorXd>(Sinv.data(), b * b);
        g.head(nz).noalias() -= blk.H.transpose() * vSinv;
        g[nz] += Sinv.trace();
        // Hessian entries tr(S^-1 G_a S^-1 G_b) = <svec(T_a), svec(T_b)>, T = L^-1 G L^-T.
        const Index sb = b * (b + 1) / 2;
        MatrixXd W(sb, ny);
        auto svec_into = [&](const MatrixXd& T, Index col) {
          Index r = 0;
          for (Index j = 0; j < b; ++j) {
            W(r++, col) = T(j, j);
            for (Index i = j + 1; i < b; ++i) W(r++, col) = std::numbers::sqrt2 * T(i, j);
          }
        };
        MatrixXd T(b, b);
        for (Index a = 0; a < nz; ++a) {
          Eigen::Map<const MatrixXd> Ga(blk.H.col(a).data(), b, b);
          T.noalias() = Linv * Ga * Linv.transpose();
          svec_into(T, a);
        }
        svec_into(-(Linv * Linv.transpose()), nz);
        Hs.selfadjointView<Eigen::Lower>().rankUpdate(W.transpose());
      }
      if (!ok) break;  // numerically lost the interior; keep the best point found

      Hs.triangularView<Eigen::StrictlyUpper>() = Hs.transpose();
      Eigen::LDLT<MatrixXd> ldlt(Hs);
      VectorXd dy = ldlt.solve(-g);
      if (!dy.allFinite()) {
        MatrixXd Hr = Hs;
        Hr.diagonal().array() += 1e-12 * (1.0 + Hs.diagonal().cwiseAbs().maxCoeff());
        dy = Hr.ldlt().solve(-g);
        if (!dy.allFinite()) break;
      }
      lambda2 = -g.dot(dy);
      if (lambda2 < 1e-10) {
        centered = true;
        break;
      }

      const double f0 = objective(pr, z, t, s);
      double alpha = 1.0;
      bool stepped = false;
      for (int ls = 0; ls < 60; ++ls) {
        const VectorXd zn = z + alpha * dy.head(nz);
        const double tn = t + alpha * dy[nz];
        const double f1 = objective(pr, zn, tn, s);
        if (f1 <= f0 - 0.25 * alpha * lambda2) {
          z = zn;
          t = tn;
          stepped = true;
          if (f0 - f1 <= 1e-15 * std::abs(f0)) centered = true;  // no measurable progress left
          break;
        }
        alpha *= 0.5;
      }
      if (!stepped) {
        centered = lambda2 < 1e-6;
        break;
      }
      const double m = best_t(pr, z);
      if (m > best_margin) {
        best_margin = m;
        best_z = z;
      }
      if (best_margin >= settings.stop_at) {
        done = true;
        break;
      }
      if (centered || lambda2 < 1e-8) {
        centered = true;
        break;
      }
    }
    if (done) break;
    if (centered) {
      ub = std::min(ub, t + pr.nu / s);
      if (ub < 0.0) break;
      if (pr.nu / s < settings.tol * std::max(1.0, std::abs(t))) break;
      s *= 8.0;
    } else {
      break;
    }
  }

  out.point = to_x(pr, best_z);
  out.margin = best_margin;
  out.upper_bound = ub;
  out.iterations = iters;
  if (best_margin >= 0.0) {
    out.status = FeasibilityStatus::Feasible;
  } else if (ub < 0.0) {
    out.status = FeasibilityStatus::Infeasible;
  } else {
    out.status = FeasibilityStatus::Unknown;
  }
  for (const auto& c : constraints) {
    const double sign = c.sense == Sense::PositiveSemidefinite ? 1.0 : -1.0;
    out.residuals.push_back(lambda_min_sym(sign * c.fn.eval(out.point)) - c.margin);
  }
  return out;
}

}  // namespace netcbc
