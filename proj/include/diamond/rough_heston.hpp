#pragma once

#include <complex>

#include <Eigen/Dense>

#include "diamond/curve.hpp"
#include "diamond/kernel.hpp"

namespace diamonds {

/// Rough Heston parameters; alpha = H + 1/2.
struct RHParams {
  double nu = 0.0;
  double alpha = 1.0;
  double lambda = 0.0;
  double rho = 0.0;

  void validate() const;
  /// Throws unless lambda == 0 (closed-form tree values).
  void require_zero_lambda() const;
  KernelSpec kernel(double delta = 30.0 / 365.0) const;
};

/// I^(j) = int_t^T xi(s) (T - s)^(j alpha) ds, exact for both curve interpolations.
double i_j_integral(const ForwardCurve& curve, double t, double T, int j, double alpha);

/// (X⋄)^k M = (rho nu)^k / Gamma(1 + k alpha) I^(k).
double x_pow_diamond_m(int k, const RHParams& params, const ForwardCurve& curve, double t, double T);

/// Leverage swap int_t^T xi(u) (E_alpha(rho nu (T - u)^alpha) - 1) du for lambda = 0.
double leverage_swap(const RHParams& params, const ForwardCurve& curve, double t, double T);

/// Solution g of the convolution Riccati equation
///   g = b - a/2 + (1 - rho^2) a^2 / 2 + (rho a + c kbar + kappa * g)^2 / 2
/// on the uniform grid of [0, horizon].
struct RiccatiSolution {
  double horizon = 0.0;
  int n = 0;
  Eigen::VectorXcd g;
  std::complex<double> a, b, c;
  double delta = 0.0;
};

/// Stepwise product integration, implicit in the current node. Each step's
/// quadratic is solved exactly; throws std::runtime_error naming the step when
/// the implicit equation loses its regular root (moment explosion).
RiccatiSolution riccati_solve(const KernelSpec& kernel, double rho, std::complex<double> a,
                              std::complex<double> b, std::complex<double> c, double horizon,
                              int n);

/// a X_t + c zeta_t + int_t^T xi(u) g(T - u) du.
std::complex<double> mgf_exponent(const RiccatiSolution& sol, const ForwardCurve& curve, double t,
                                  double T, double x_t = 0.0, double zeta_t = 0.0);
/// exp(mgf_exponent).
std::complex<double> mgf_triple(const RiccatiSolution& sol, const ForwardCurve& curve, double t,
                                double T, double x_t = 0.0, double zeta_t = 0.0);

/// phi(u) = E[exp(i u X_T)] for X_0 = 0, from the Riccati solution with a = i u.
std::complex<double> cf_log_price(std::complex<double> u, const KernelSpec& kernel, double rho,
                                  const ForwardCurve& curve, double T, int n = 512);

/// rho nu T^(H - 1/2) / Gamma(H + 5/2).
double atm_skew_asymptotic(double H, double rho, double nu, double T);

}  // namespace diamonds
