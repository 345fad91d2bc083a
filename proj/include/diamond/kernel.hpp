#pragma once

#include <string>

namespace diamonds {

enum class KernelFamily { power_law, exp_decay, rough_heston };

/// Forward variance kernel kappa(tau).
///   power_law:    nu tau^(alpha-1) / Gamma(alpha)
///   exp_decay:    nu exp(-lambda tau)
///   rough_heston: nu tau^(alpha-1) E_{alpha,alpha}(-lambda tau^alpha)
struct KernelSpec {
  KernelFamily family = KernelFamily::power_law;
  double nu = 0.0;
  double alpha = 1.0;
  double lambda = 0.0;
  /// Window length of the zeta leaf, in years.
  double delta = 30.0 / 365.0;

  static KernelSpec power_law(double nu, double alpha, double delta = 30.0 / 365.0);
  static KernelSpec exp_decay(double nu, double lambda, double delta = 30.0 / 365.0);
  static KernelSpec rough_heston(double nu, double alpha, double lambda, double delta = 30.0 / 365.0);

  /// Throws std::invalid_argument if the parameters violate the family's domain.
  void validate() const;

  double kappa(double tau) const;
  /// K0(tau) = int_0^tau kappa.
  double k0(double tau) const;
  /// K1(tau) = int_0^tau u kappa(u) du.
  double k1(double tau) const;
  /// kbar(tau) = int_tau^{tau+delta} kappa.
  double kbar(double tau) const { return k0(tau + delta) - k0(tau); }

  /// Exponent of the leading tau^p singular behaviour of K0 (alpha for the
  /// fractional families, 1 for exp_decay).
  double k0_power() const { return family == KernelFamily::exp_decay ? 1.0 : alpha; }

  std::string describe() const;
};

}  // namespace diamonds
