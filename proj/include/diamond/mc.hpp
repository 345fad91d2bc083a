#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "diamond/curve.hpp"
#include "diamond/rough_bergomi.hpp"
#include "diamond/rough_heston.hpp"

namespace diamonds {

/// Path-computable processes. XdmM is the closed-form (X⋄M)_t(T) process
/// evaluated on each path's forward variance curve (rough Bergomi only).
enum class Process { X, S, M, Zeta, XdmM };

/// How E[<A, B>_T] is estimated on a path.
///   bracket:  trapezoid rule on the simulated diffusion coefficients a_t b_t.
///   realized: sum of products of increments on the simulation grid.
enum class Covariation { bracket, realized };

/// Rough Heston discretization.
///   ivi:   integrated-variance implicit scheme with inverse Gaussian increments.
///   euler: full-truncation Euler on the Volterra equation.
enum class RHScheme { ivi, euler };

struct SimConfig {
  long n_paths = 100000;
  int n_steps = 256;
  std::uint64_t seed = 20240601;
  bool antithetic = true;
  /// Processes whose levels and loadings are stored in the bundle.
  std::vector<Process> processes{Process::X, Process::S, Process::M};
  /// Steps at which the whole forward variance curve is stored (rough Bergomi).
  std::vector<int> snapshot_steps;
  /// Forward-start window of the zeta leaf.
  double delta = 30.0 / 365.0;
  RHScheme rh_scheme = RHScheme::ivi;
};

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long n_paths = 0;
  double z_score(double reference) const;
};

enum class Model { rough_heston, rough_bergomi };

/// Simulated paths on the grid t_j = j T / n. Matrices are n_paths x (n + 1).
/// For each stored process P, level[P] holds P_t and load_w[P], load_perp[P]
/// its coefficients on the driving martingales. With an empty clock these are
/// dW and dW_perp; otherwise they are martingales with quadratic variation
/// clock(p, j) over step j (the integrated variance for the rough Heston ivi
/// scheme).
struct PathBundle {
  Model model = Model::rough_heston;
  double T = 0.0;
  int n_steps = 0;
  long n_paths = 0;
  bool antithetic = true;
  Eigen::MatrixXd V;
  std::map<Process, Eigen::MatrixXd> level, load_w, load_perp;
  /// xi_snapshots[k](p, j) = xi_{t_s}(t_j) for s = snapshot_steps[k], NaN for j < s.
  std::vector<int> snapshot_steps;
  std::vector<Eigen::MatrixXd> xi_snapshots;
  /// Diagnostics: number of (path, step) pairs where V was truncated at zero.
  long truncations = 0;
  Eigen::MatrixXd clock;

  double dt() const { return T / n_steps; }
  bool has(Process p) const { return level.count(p) > 0; }
};

/// Rough Heston paths for V_t = xi_0(t) + int_0^t kappa(t - s) sqrt(V_s) dW_s with
/// kernel-averaged weights, by the scheme chosen in cfg.rh_scheme.
PathBundle simulate_rough_heston(const SimConfig& cfg, const RHParams& params,
                                 const ForwardCurve& curve, double T);

/// Exact joint Gaussian simulation of the Volterra field int (u - s)^-gamma dW on the
/// grid through a Cholesky factor of its analytic covariance, forward variances by
/// the stochastic exponential, and X by Euler. Requires n_steps <= 512.
PathBundle simulate_rough_bergomi(const SimConfig& cfg, const RBParams& params,
                                  const ForwardCurve& curve, double T);

/// Per-path estimates of <A, B>_T.
Eigen::VectorXd covariation_samples(const PathBundle& bundle, Process a, Process b,
                                    Covariation method = Covariation::bracket);

/// Mean and standard error of per-path samples; antithetic partners (2i, 2i+1)
/// are averaged first.
McEstimate mean_estimate(const Eigen::VectorXd& samples, bool antithetic);

/// (A⋄B)_0(T) = E[<A, B>_T].
McEstimate estimate_diamond(const PathBundle& bundle, Process a, Process b,
                            Covariation method = Covariation::bracket);

/// E[<S, M>_T] / S_0, the leverage swap.
McEstimate estimate_leverage(const PathBundle& bundle, Covariation method = Covariation::bracket);

/// Streams the simulation chunk by chunk and returns one estimate per requested
/// pair, so large path counts never hold the whole bundle in memory.
using ProcessPair = std::pair<Process, Process>;
std::vector<McEstimate> stream_rough_heston(const SimConfig& cfg, const RHParams& params,
                                            const ForwardCurve& curve, double T,
                                            const std::vector<ProcessPair>& pairs,
                                            Covariation method = Covariation::bracket);
std::vector<McEstimate> stream_rough_bergomi(const SimConfig& cfg, const RBParams& params,
                                             const ForwardCurve& curve, double T,
                                             const std::vector<ProcessPair>& pairs,
                                             Covariation method = Covariation::bracket);

const char* process_name(Process p);

}  // namespace diamonds
