#include "netcbc/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <thread>

#include <boost/math/distributions/beta.hpp>

#include "netcbc/error.hpp"

namespace netcbc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t run_index) : gen_(splitmix64(splitmix64(seed) ^ run_index)) {}

double Rng::uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

LoopState LoopState::initial(const SystemSpec& sys, int tau, const VectorXd& x0) {
  LoopState s;
  s.x = x0;
  s.xc_prev = x0;
  s.u_prev = VectorXd::Zero(sys.m());
  s.x_buf.assign(tau + 1, x0);
  s.uc_buf.assign(tau + 1, VectorXd::Zero(sys.m()));
  return s;
}

ControllerOutput controller_update(const LoopState& s, const SystemSpec& sys, const ChannelSpec& ch,
                                   const MatrixXd& F, ControllerMode mode) {
  const int tau = ch.tau;
  const MatrixXd& A = sys.A;
  const MatrixXd& B = sys.B;
  ControllerOutput out;

  if (s.k == 0) {
    out.xc = s.x_buf.front();
  } else {
    const VectorXd model = A * s.xc_prev + B * s.uc_buf.front();
    const bool arrived = s.k >= tau && static_cast<int>(s.theta_buf.size()) > tau && s.theta_buf[tau] == 1;
    if (!arrived) {
      out.xc = model;
    } else {
      // A^tau x_{k-tau} + sum_{t<tau} A^t B uc_{k-t-1}, by Horner.
      VectorXd packet = s.x_buf[tau];
      for (int t = tau - 1; t >= 0; --t) packet = A * packet + B * s.uc_buf[t];
      out.xc = mode == ControllerMode::Realization ? packet
                                                   : VectorXd(ch.p_theta * packet + (1.0 - ch.p_theta) * model);
    }
  }
  out.uc = F * out.xc;
  return out;
}

namespace {

int draw(Rng& rng, double p, const std::optional<double>& forced) {
  const int v = rng.bernoulli(p) ? 1 : 0;  // always consume the draw so streams stay aligned
  return forced ? (*forced != 0.0 ? 1 : 0) : v;
}

}  // namespace

StepRecord step(LoopState& s, const SystemSpec& sys, const ChannelSpec& ch, const MatrixXd& F, Rng& rng,
                const SimConfig& cfg) {
  const int tau = ch.tau;
  const int theta = draw(rng, ch.p_theta, cfg.force_theta);
  const int phi = draw(rng, ch.q_phi, cfg.force_phi);
  VectorXd w(sys.n());
  for (Index i = 0; i < sys.n(); ++i) w[i] = rng.normal() * std::sqrt(sys.noise_var[i]);
  if (!cfg.noise) w.setZero();

  s.theta_buf.push_front(theta);
  while (static_cast<int>(s.theta_buf.size()) > tau + 1) s.theta_buf.pop_back();

  const ControllerOutput c = controller_update(s, sys, ch, F, cfg.controller_mode);
  const VectorXd u = phi ? c.uc : s.u_prev;

  StepRecord rec{s.k, s.x, c.xc, u, c.uc, theta, phi};

  const VectorXd xn = sys.A * s.x + sys.B * u + w;
  s.xc_prev = c.xc;
  s.u_prev = u;
  s.uc_buf.push_front(c.uc);
  s.uc_buf.pop_back();
  s.x_buf.push_front(xn);
  s.x_buf.pop_back();
  s.x = xn;
  ++s.k;
  return rec;
}

RunResult run(const SystemSpec& sys, const ChannelSpec& ch, const SafetySpec& spec, const MatrixXd& F,
              const SimConfig& cfg, std::uint64_t run_index) {
  if (F.rows() != sys.m() || F.cols() != sys.n()) throw DimensionError("run: F must be m x n");
  Rng rng(cfg.seed, run_index);
  VectorXd x0;
  if (cfg.x0_mode.fixed) {
    x0 = *cfg.x0_mode.fixed;
    if (x0.size() != sys.n()) throw DimensionError("run: initial state has wrong length");
  } else {
    x0.resize(sys.n());
    for (Index i = 0; i < sys.n(); ++i) {
      x0[i] = spec.X0.lower[i] + (spec.X0.upper[i] - spec.X0.lower[i]) * rng.uniform();
    }
  }

  auto in_unsafe = [&](const VectorXd& x) {
    return std::any_of(spec.X1.begin(), spec.X1.end(), [&](const Box& b) { return b.contains(x); });
  };

  RunResult res;
  LoopState s = LoopState::initial(sys, ch.tau, x0);
  for (int k = 0; k < cfg.T; ++k) {
    const std::deque<VectorXd> hist = s.x_buf;  // x_k ... x_{k-tau}
    const VectorXd xc_prev = s.xc_prev;
    const StepRecord r = step(s, sys, ch, F, rng, cfg);
    res.theta_losses += 1 - r.theta;
    res.phi_losses += 1 - r.phi;
    res.max_estimation_error = std::max(res.max_estimation_error, (r.xhat - r.x).norm());

    const bool unsafe_plant = in_unsafe(r.x);
    bool unsafe_aug = false;
    for (const Box& region : spec.X1) {
      bool all = region.contains(r.xhat) && region.contains(xc_prev);
      for (const auto& xj : hist) all = all && region.contains(xj);
      if (all) {
        unsafe_aug = true;
        break;
      }
    }
    if (unsafe_plant && !res.violated_plant) {
      res.violated_plant = true;
      res.first_violation_plant = k;
    }
    if (unsafe_aug && !res.violated_augmented) {
      res.violated_augmented = true;
      res.first_violation_augmented = k;
    }
    if (cfg.record_trajectories) {
      res.trajectory.push_back({r.k, r.x, r.xhat, r.u, r.uc, r.theta, r.phi, unsafe_plant, unsafe_aug});
    }
  }
  const bool unsafe_end = in_unsafe(s.x);
  if (unsafe_end && !res.violated_plant) {
    res.violated_plant = true;
    res.first_violation_plant = cfg.T;
  }
  if (cfg.record_trajectories) {
    TrajectoryRow last;
    last.k = cfg.T;
    last.x = s.x;
    last.unsafe_plant = unsafe_end;
    res.trajectory.push_back(std::move(last));
  }
  return res;
}

std::pair<double, double> clopper_pearson(int k, int n, double confidence) {
  if (n <= 0 || k < 0 || k > n) throw Error("clopper_pearson: need 0 <= k <= n, n >= 1");
  const double alpha = 1.0 - confidence;
  const double lo = k == 0 ? 0.0 : boost::math::ibeta_inv(k, n - k + 1, alpha / 2.0);
  const double hi = k == n ? 1.0 : boost::math::ibeta_inv(k + 1, n - k, 1.0 - alpha / 2.0);
  return {lo, hi};
}

namespace {

unsigned worker_count(int runs) {
  unsigned w = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("NETCBC_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) w = static_cast<unsigned>(v);
  }
  return std::min<unsigned>(w, static_cast<unsigned>(std::max(1, runs)));
}

}  // namespace

Aggregate monte_carlo(const SystemSpec& sys, const ChannelSpec& ch, const SafetySpec& spec, const MatrixXd& F,
                      const SimConfig& cfg) {
  if (cfg.runs < 1) throw Error("monte_carlo: runs must be at least 1");
  Aggregate agg;
  agg.runs = cfg.runs;
  agg.per_run.resize(cfg.runs);
  const unsigned workers = worker_count(cfg.runs);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = static_cast<int>(w); i < cfg.runs; i += static_cast<int>(workers)) {
          agg.per_run[i] = run(sys, ch, spec, F, cfg, static_cast<std::uint64_t>(i));
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  double th = 0, ph = 0;
  for (const auto& r : agg.per_run) {
    agg.violations_plant += r.violated_plant;
    agg.violations_augmented += r.violated_augmented;
    th += r.theta_losses;
    ph += r.phi_losses;
  }
  agg.freq_plant = static_cast<double>(agg.violations_plant) / cfg.runs;
  agg.freq_augmented = static_cast<double>(agg.violations_augmented) / cfg.runs;
  agg.mean_theta_losses = th / cfg.runs;
  agg.mean_phi_losses = ph / cfg.runs;
  std::tie(agg.ci95_lo, agg.ci95_hi) = clopper_pearson(agg.violations_plant, cfg.runs);
  return agg;
}

}  // namespace netcbc
