#pragma once

#include <complex>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "diamond/curve.hpp"
#include "diamond/forest.hpp"
#include "diamond/kernel.hpp"

namespace diamonds {

/// One term tau^power * phi(tau) of a profile, phi piecewise linear on the grid.
struct ProfileComponent {
  double power = 0.0;
  Eigen::VectorXd phi;
};

/// Convolution profile h(tau) on the uniform grid tau_i = i * horizon / n,
/// stored as a sum of components tau^p phi_p(tau). Power-law kernels map a
/// component of power p to one of power p + alpha, which keeps the
/// tau^alpha-type singular behaviour exact instead of interpolating it.
class HProfile {
 public:
  HProfile(double horizon, int n);

  static HProfile constant(double horizon, int n, double value);
  template <class F>
  static HProfile sampled(double horizon, int n, F&& fn, double power = 0.0) {
    HProfile h(horizon, n);
    Eigen::VectorXd phi(n + 1);
    for (int i = 0; i <= n; ++i) phi[i] = fn(h.tau(i));
    h.add_component(power, std::move(phi));
    return h;
  }

  double horizon() const { return horizon_; }
  int n() const { return n_; }
  double step() const { return horizon_ / n_; }
  double tau(int i) const { return horizon_ * i / n_; }

  const std::vector<ProfileComponent>& components() const { return comps_; }
  /// Adds tau^power * phi, merging with an existing component of equal power.
  void add_component(double power, Eigen::VectorXd phi);

  double operator()(double tau) const;
  /// h(tau_i) at every grid node.
  Eigen::VectorXd values() const;
  bool is_zero() const { return comps_.empty(); }

  HProfile& operator*=(double s);
  HProfile& operator+=(const HProfile& other);
  friend HProfile operator*(const HProfile& x, const HProfile& y);
  friend HProfile operator*(double s, HProfile h) { return h *= s; }

 private:
  void check_grid(const HProfile& other) const;
  double horizon_;
  int n_;
  std::vector<ProfileComponent> comps_;
};

/// Product-integration weights for a piecewise-linear integrand: on the grid
/// with step delta, (kappa * g)(tau_n) = sum_{m<n} hi[m] g_{n-m} + lo[m] g_{n-m-1}.
struct ConvolutionWeights {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};
ConvolutionWeights convolution_weights(const KernelSpec& kernel, double step, int n);

/// (kappa * h)(tau) = int_0^tau kappa(tau - s) h(s) ds by product integration
/// with exact kernel moments.
HProfile kernel_convolve(const KernelSpec& kernel, const HProfile& h);

/// kbar(tau) = K0(tau + delta) - K0(tau) as a profile.
HProfile kbar_profile(const KernelSpec& kernel, double horizon, int n);

/// Convolution profile of a tree with at least two leaves. M leaves are
/// expanded to X⋄X first.
HProfile compile_tree(const DiamondTree& tree, const KernelSpec& kernel, double rho,
                      double horizon, int n);

/// Memoizing compiler for many trees sharing one model and grid.
class TreeCompiler {
 public:
  TreeCompiler(KernelSpec kernel, double rho, double horizon, int n);
  const HProfile& compile(const DiamondTree& tree);

 private:
  enum class Driver { z, w };
  struct Loading {
    Driver driver;
    HProfile h;
  };
  Loading loading(const DiamondTree& t);
  KernelSpec kernel_;
  double rho_;
  double horizon_;
  int n_;
  std::map<DiamondTree, HProfile> cache_;
};

/// int_t^T xi(u) h(T - u) du, with h.horizon() == T - t. Piecewise-linear
/// components are integrated exactly against the curve on every grid cell.
double evaluate_profile(const HProfile& h, const ForwardCurve& curve, double t, double T);

/// Same for a complex piecewise-linear function given by its node values on
/// the uniform grid of [0, T - t].
std::complex<double> evaluate_profile(const Eigen::VectorXcd& values, const ForwardCurve& curve,
                                      double t, double T);

/// Sum over trees of bound coefficient times tree value.
std::complex<double> forest_value(const Forest& forest, std::complex<double> a,
                                  std::complex<double> b, std::complex<double> c,
                                  const KernelSpec& kernel, double rho, const ForwardCurve& curve,
                                  double t, double T, int n = 512);

/// Real value of a single tree.
double tree_value(const DiamondTree& tree, const KernelSpec& kernel, double rho,
                  const ForwardCurve& curve, double t, double T, int n = 512);

}  // namespace diamonds
