#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "netcbc/sysmodel.hpp"

namespace netcbc {

enum class ControllerMode { Realization, Expectation };

/// Initial plant state: a fixed point or uniform over X0.
struct X0Mode {
  std::optional<Eigen::VectorXd> fixed;  ///< empty -> uniform over X0

  static X0Mode uniform() { return {}; }
  static X0Mode at(Eigen::VectorXd x) { return {std::move(x)}; }
};

struct SimConfig {
  std::uint64_t seed = 1;
  int runs = 20;
  int T = 100;
  ControllerMode controller_mode = ControllerMode::Realization;
  X0Mode x0_mode;
  bool record_trajectories = false;
  bool noise = true;  ///< false forces w = 0
  std::optional<double> force_theta;  ///< pin the uplink indicator (0 or 1)
  std::optional<double> force_phi;    ///< pin the downlink indicator (0 or 1)
};

/// Per-run generator: mt19937_64 seeded by splitmix64 of (seed, run_index).
/// Uniforms and normals are derived by hand so streams are portable across
/// standard libraries.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t run_index);
  double uniform();           ///< [0, 1) with 53 random bits
  double normal();            ///< standard normal, Box-Muller
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Everything the loop carries between steps.
struct LoopState {
  int k = 0;
  Eigen::VectorXd x;        ///< plant state x_k
  Eigen::VectorXd xc_prev;  ///< xhat^c_{k-1} (x_0 before the first step)
  Eigen::VectorXd u_prev;   ///< u_{k-1}, held by the actuator on downlink loss
  std::deque<Eigen::VectorXd> x_buf;   ///< x_k ... x_{k-tau}; pre-history is x_0
  std::deque<Eigen::VectorXd> uc_buf;  ///< uhat^c_{k-1} ... uhat^c_{k-tau-1}; zero before k = 0
  std::deque<int> theta_buf;           ///< theta_k ... theta_{k-tau} as far as drawn

  static LoopState initial(const SystemSpec& sys, int tau, const Eigen::VectorXd& x0);
};

struct ControllerOutput {
  Eigen::VectorXd xc;
  Eigen::VectorXd uc;
};

/// Controller state and command at step k, given theta_k already at the front
/// of theta_buf. Uses the packet x_{k-tau} when theta_{k-tau} = 1 (blended with
/// the model branch in Expectation mode), otherwise rolls the model forward.
/// xhat^c_0 = x_0, and for 0 < k < tau no packet can have arrived yet.
ControllerOutput controller_update(const LoopState& s, const SystemSpec& sys, const ChannelSpec& ch,
                                   const Eigen::MatrixXd& F, ControllerMode mode);

struct StepRecord {
  int k;
  Eigen::VectorXd x, xhat, u, uc;
  int theta, phi;
};

/// Draws theta_k, phi_k, w_k, runs controller and actuator, advances the plant.
StepRecord step(LoopState& s, const SystemSpec& sys, const ChannelSpec& ch, const Eigen::MatrixXd& F, Rng& rng,
                const SimConfig& cfg);

struct TrajectoryRow {
  int k;
  Eigen::VectorXd x, xhat, u, uc;
  int theta = -1, phi = -1;  ///< -1 on the terminal row
  bool unsafe_plant = false;
  bool unsafe_augmented = false;
};

struct RunResult {
  bool violated_plant = false;
  int first_violation_plant = -1;
  bool violated_augmented = false;
  int first_violation_augmented = -1;
  int theta_losses = 0;
  int phi_losses = 0;
  double max_estimation_error = 0;  ///< max_k ||xhat^c_k - x_k||
  std::vector<TrajectoryRow> trajectory;
};

struct Aggregate {
  int runs = 0;
  int violations_plant = 0;
  int violations_augmented = 0;
  double freq_plant = 0;
  double freq_augmented = 0;
  double ci95_lo = 0, ci95_hi = 0;  ///< Clopper-Pearson on the plant-level frequency
  double mean_theta_losses = 0;
  double mean_phi_losses = 0;
  std::vector<RunResult> per_run;
};

RunResult run(const SystemSpec& sys, const ChannelSpec& ch, const SafetySpec& spec, const Eigen::MatrixXd& F,
              const SimConfig& cfg, std::uint64_t run_index);

/// Independent runs in parallel (NETCBC_THREADS caps the worker count), merged by index.
Aggregate monte_carlo(const SystemSpec& sys, const ChannelSpec& ch, const SafetySpec& spec, const Eigen::MatrixXd& F,
                      const SimConfig& cfg);

/// Exact two-sided Clopper-Pearson interval for k successes in n trials.
std::pair<double, double> clopper_pearson(int k, int n, double confidence = 0.95);

}  // namespace netcbc
