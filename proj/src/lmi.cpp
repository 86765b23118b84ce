#include "netcbc/lmi.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "netcbc/error.hpp"

namespace netcbc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

bool DeltaWeights::valid(double tol) const {
  for (double d : as_vector())
    if (!(d >= 0.0 && d <= 1.0)) return false;
  return std::abs(sum() - 1.0) <= tol;
}

DeltaWeights DeltaWeights::from_vector(const std::vector<double>& v) {
  if (v.size() != 5) throw ConfigError("delta weights need exactly five entries");
  DeltaWeights d{v[0], v[1], v[2], v[3], v[4]};
  if (!d.valid()) throw ConfigError("delta weights must lie in [0,1] and sum to 1");
  return d;
}

std::vector<DeltaWeights> default_delta_grid() {
  // (cross, second-moment of A2, zeta term) shares of the mass left after d1.
  static const double splits[3][3] = {{0.2, 0.3, 0.5}, {0.1, 0.2, 0.7}, {0.3, 0.4, 0.3}};
  std::vector<DeltaWeights> grid;
  for (double d1 : {0.3, 0.5, 0.7}) {
    const double rest = 1.0 - d1;
    for (const auto& s : splits) {
      grid.push_back({d1, 0.5 * s[0] * rest, s[1] * rest, 0.5 * s[0] * rest, s[2] * rest});
    }
  }
  return grid;
}

LinearEqualities trace_normalization(Index kappa) {
  LinearEqualities eq;
  eq.E = MatrixXd::Zero(1, sym_vars(kappa));
  Index idx = 0;
  for (Index j = 0; j < kappa; ++j) {
    idx += j;  // skip the strictly upper entries of column j
    eq.E(0, idx) = 1.0;
    ++idx;
  }
  eq.e = VectorXd::Constant(1, static_cast<double>(kappa));
  return eq;
}

MatrixXd gain_from_vec(const VectorXd& x, Index m, Index n) {
  if (x.size() != m * n) throw DimensionError("gain_from_vec: wrong length");
  return Eigen::Map<const MatrixXd>(x.data(), m, n);
}

MatrixXd schur_block(const MatrixXd& P, const MatrixXd& X, double c) {
  const Index k = P.rows();
  MatrixXd S(2 * k, 2 * k);
  const MatrixXd PX = P * X;
  S.topLeftCorner(k, k) = P;
  S.topRightCorner(k, k) = PX;
  S.bottomLeftCorner(k, k) = PX.transpose();
  S.bottomRightCorner(k, k) = c * P;
  return S;
}

MatrixXd master_matrix(const AugmentedSystem& aug, const MatrixXd& P, const MatrixXd& F) {
  const Index K = aug.dims.kappa;
  if (P.rows() != K || P.cols() != K) throw DimensionError("master inequality: P must be kappa x kappa");
  if (F.rows() != aug.dims.m || F.cols() != aug.dims.n) throw DimensionError("master inequality: F must be m x n");
  const MatrixXd Abar = assemble_mean(aug, F);
  const MatrixXd A3 = aug.A3.value(F);
  MatrixXd M = Abar.transpose() * P * Abar + aug.zeta_variance() * (A3.transpose() * P * A3) - P;
  return 0.5 * (M + M.transpose());
}

double verify_master_inequality(const AugmentedSystem& aug, const MatrixXd& P, const MatrixXd& F) {
  return lambda_max_sym(master_matrix(aug, P, F));
}

namespace {

LmiConstraint psd(std::string label, AffineSymmetric fn, double margin = 0.0) {
  return {std::move(label), std::move(fn), Sense::PositiveSemidefinite, margin};
}

StageOutcome solve_for_P(const AugmentedSystem& aug, const std::function<MatrixXd(const MatrixXd&)>& lhs,
                         const std::string& label, double eps, const FeasibilitySettings& settings) {
  const Index K = aug.dims.kappa;
  const Index N = sym_vars(K);
  std::vector<LmiConstraint> cons;
  cons.push_back(psd("P >= eps I", AffineSymmetric::from_function(
                                       [K](const VectorXd& x) { return sym_from_vec(x, K); }, N),
                     eps));
  cons.push_back(psd(label, AffineSymmetric::from_function(
                                [&](const VectorXd& x) { return lhs(sym_from_vec(x, K)); }, N)));
  const LinearEqualities eq = trace_normalization(K);
  FeasibilitySettings s = settings;
  s.radius = std::max(s.radius, 2.0 * static_cast<double>(K));
  StageOutcome out;
  out.raw = solve_feasibility(cons, N, &eq, s);
  out.value = sym_from_vec(out.raw.point, K);
  return out;
}

StageOutcome solve_for_F(const AugmentedSystem& aug, std::vector<std::pair<std::string,
                         std::function<MatrixXd(const MatrixXd&)>>> pieces, const FeasibilitySettings& settings) {
  const Index m = aug.dims.m, n = aug.dims.n;
  std::vector<LmiConstraint> cons;
  for (auto& [label, f] : pieces) {
    cons.push_back(psd(label, AffineSymmetric::from_function(
                                  [&, f](const VectorXd& x) { return f(gain_from_vec(x, m, n)); }, m * n)));
  }
  StageOutcome out;
  out.raw = solve_feasibility(cons, m * n, nullptr, settings);
  out.value = gain_from_vec(out.raw.point, m, n);
  return out;
}

}  // namespace

StageOutcome stage1_find_P(const AugmentedSystem& aug, double d1, double eps, const FeasibilitySettings& settings) {
  if (!(d1 > 0.0 && d1 < 1.0)) throw Error("stage1_find_P: d1 must lie in (0, 1)");
  const MatrixXd A1 = aug.A1.constant;
  // Any eigenpair (lambda, v) of A1 gives v* (d1 P - A1'PA1) v = (d1 - |lambda|^2) v*Pv, so
  // rho(A1)^2 > d1 rules out every P > 0 without running the solver.
  const double rho = A1.eigenvalues().cwiseAbs().maxCoeff();
  if (rho * rho > d1 * (1.0 + 1e-12)) {
    StageOutcome out;
    out.raw.status = FeasibilityStatus::Infeasible;
    out.raw.margin = -std::numeric_limits<double>::infinity();
    out.raw.upper_bound = -std::numeric_limits<double>::infinity();
    out.raw.point = sym_to_vec(MatrixXd::Identity(A1.rows(), A1.rows()));
    out.value = MatrixXd::Identity(A1.rows(), A1.rows());
    out.raw.residuals.push_back(1.0 - eps);  // residuals reported at P = I
    out.raw.residuals.push_back(lambda_min_sym(d1 * out.value - A1.transpose() * A1));
    return out;
  }
  return solve_for_P(
      aug, [&](const MatrixXd& P) -> MatrixXd { return d1 * P - A1.transpose() * P * A1; }, "d1 P - A1'PA1 >= 0", eps,
      settings);
}

StageOutcome stage2_find_F(const AugmentedSystem& aug, const MatrixXd& P, const DeltaWeights& d,
                           const FeasibilitySettings& settings) {
  if (!d.valid()) throw Error("stage2_find_F: invalid delta weights");
  const double q = aug.channel.q_phi;
  const MatrixXd A1 = aug.A1.constant;
  const double cross = d.d2 + d.d4;
  const double c3 = d.d5 * q / (1.0 - q);
  return solve_for_F(
      aug,
      {{"cross term",
        [&, cross](const MatrixXd& F) -> MatrixXd {
          const MatrixXd X = A1.transpose() * P * aug.A2.value(F);
          return cross * P - X - X.transpose();
        }},
       {"A2 Schur block", [&](const MatrixXd& F) -> MatrixXd { return schur_block(P, aug.A2.value(F), d.d3); }},
       {"A3 Schur block", [&, c3](const MatrixXd& F) -> MatrixXd { return schur_block(P, aug.A3.value(F), c3); }}},
      settings);
}

StageOutcome joint_find_P(const AugmentedSystem& aug, const MatrixXd& F, double eps, const FeasibilitySettings& settings) {
  const MatrixXd Abar = assemble_mean(aug, F);
  const MatrixXd A3 = aug.A3.value(F);
  const double r = aug.zeta_variance();
  return solve_for_P(
      aug,
      [&](const MatrixXd& P) -> MatrixXd {
        return P - Abar.transpose() * P * Abar - r * (A3.transpose() * P * A3);
      },
      "P - Abar'PAbar - r A3'PA3 >= 0", eps, settings);
}

StageOutcome joint_find_F(const AugmentedSystem& aug, const MatrixXd& P, const FeasibilitySettings& settings) {
  const Index K = aug.dims.kappa;
  const double sr = std::sqrt(aug.zeta_variance());
  return solve_for_F(aug,
                     {{"master Schur form",
                       [&, K, sr](const MatrixXd& F) -> MatrixXd {
                         const MatrixXd PA = P * assemble_mean(aug, F);
                         const MatrixXd PA3 = sr * (P * aug.A3.value(F));
                         MatrixXd S = MatrixXd::Zero(3 * K, 3 * K);
                         S.block(0, 0, K, K) = P;
                         S.block(K, K, K, K) = P;
                         S.block(2 * K, 2 * K, K, K) = P;
                         S.block(K, 0, K, K) = PA;
                         S.block(0, K, K, K) = PA.transpose();
                         S.block(2 * K, 0, K, K) = PA3;
                         S.block(0, 2 * K, K, K) = PA3.transpose();
                         return S;
                       }}},
                     settings);
}

SynthesisResult algorithm1(const SystemSpec& sys, const ChannelSpec& ch, const DeltaSearchConfig& search) {
  return algorithm1(build(sys, ch), search);
}

SynthesisResult algorithm1(const AugmentedSystem& aug, const DeltaSearchConfig& search) {
  const std::vector<DeltaWeights> grid = search.candidates.empty() ? default_delta_grid() : search.candidates;
  SynthesisResult res;
  std::map<double, StageOutcome> stage1_cache;  // the grid repeats d1 values

  for (const auto& d : grid) {
    ++res.candidates_tried;
    auto it = stage1_cache.find(d.d1);
    if (it == stage1_cache.end()) {
      it = stage1_cache.emplace(d.d1, stage1_find_P(aug, d.d1, search.eps_pd, search.sdp)).first;
    }
    if (!it->second.feasible()) continue;
    const MatrixXd& P = it->second.value;
    const StageOutcome s2 = stage2_find_F(aug, P, d, search.sdp);
    if (!s2.feasible()) continue;
    const double margin = verify_master_inequality(aug, P, s2.value);
    if (margin <= search.tol) {
      res.P = P;
      res.F = s2.value;
      res.delta = d;
      res.margin = margin;
      res.route = "delta-grid";
      return res;
    }
  }

  if (search.joint_fallback) {
    MatrixXd F = MatrixXd::Zero(aug.dims.m, aug.dims.n);
    bool have = false;
    for (int round = 0; round < search.joint_rounds; ++round) {
      const StageOutcome sp = joint_find_P(aug, F, search.eps_pd, search.sdp);
      const MatrixXd P = sp.value;
      double margin = verify_master_inequality(aug, P, F);
      if (margin <= search.tol) {
        res.P = P;
        res.F = F;
        res.margin = margin;
        have = true;
      }
      const StageOutcome sf = joint_find_F(aug, P, search.sdp);
      margin = verify_master_inequality(aug, P, sf.value);
      if (margin <= search.tol) {
        res.P = P;
        res.F = sf.value;
        res.margin = margin;
        have = true;
        break;
      }
      if (have) break;
      F = sf.value;
    }
    if (have) {
      res.delta = {};
      res.route = "joint";
      return res;
    }
  }
  throw ExhaustedSearch("no candidate produced a verified (P, F) pair after " + std::to_string(res.candidates_tried) +
                        " delta candidates" + (search.joint_fallback ? " and the joint fallback" : ""));
}

}  // namespace netcbc
