#include "diamond/kernel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "diamond/specfun.hpp"

namespace diamonds {

KernelSpec KernelSpec::power_law(double nu, double alpha, double delta) {
  KernelSpec k{KernelFamily::power_law, nu, alpha, 0.0, delta};
  k.validate();
  return k;
}

KernelSpec KernelSpec::exp_decay(double nu, double lambda, double delta) {
  KernelSpec k{KernelFamily::exp_decay, nu, 1.0, lambda, delta};
  k.validate();
  return k;
}

KernelSpec KernelSpec::rough_heston(double nu, double alpha, double lambda, double delta) {
  KernelSpec k{KernelFamily::rough_heston, nu, alpha, lambda, delta};
  k.validate();
  return k;
}

void KernelSpec::validate() const {
  if (!(nu >= 0.0)) throw std::invalid_argument("kernel: nu must be non-negative");
  if (!(delta >= 0.0)) throw std::invalid_argument("kernel: delta must be non-negative");
  if (!(lambda >= 0.0)) throw std::invalid_argument("kernel: lambda must be non-negative");
  if (family != KernelFamily::exp_decay && !(alpha > 0.5 && alpha <= 1.0))
    throw std::invalid_argument("kernel: alpha must lie in (1/2, 1]");
}

double KernelSpec::kappa(double tau) const {
  switch (family) {
    case KernelFamily::power_law:
      return nu * std::pow(tau, alpha - 1.0) / std::tgamma(alpha);
    case KernelFamily::exp_decay:
      return nu * std::exp(-lambda * tau);
    case KernelFamily::rough_heston:
      if (lambda == 0.0) return nu * std::pow(tau, alpha - 1.0) / std::tgamma(alpha);
      return nu * std::pow(tau, alpha - 1.0) * mittag_leffler(alpha, alpha, -lambda * std::pow(tau, alpha));
  }
  return 0.0;
}

double KernelSpec::k0(double tau) const {
  if (tau <= 0.0) return 0.0;
  switch (family) {
    case KernelFamily::power_law:
      return nu * std::pow(tau, alpha) / std::tgamma(1.0 + alpha);
    case KernelFamily::exp_decay:
      if (lambda == 0.0) return nu * tau;
      return nu * -std::expm1(-lambda * tau) / lambda;
    case KernelFamily::rough_heston: {
      const double ta = std::pow(tau, alpha);
      return nu * ta * mittag_leffler(alpha, alpha + 1.0, -lambda * ta);
    }
  }
  return 0.0;
}

double KernelSpec::k1(double tau) const {
  if (tau <= 0.0) return 0.0;
  switch (family) {
    case KernelFamily::power_law:
      return nu * std::pow(tau, alpha + 1.0) / (std::tgamma(alpha) * (alpha + 1.0));
    case KernelFamily::exp_decay: {
      if (lambda == 0.0) return 0.5 * nu * tau * tau;
      const double x = lambda * tau;
      // 1 - e^-x (1 + x), written to avoid cancellation for small x.
      const double core = x < 1e-3 ? x * x * (0.5 - x / 3.0 + x * x / 8.0)
                                   : -std::expm1(-x) - x * std::exp(-x);
      return nu * core / (lambda * lambda);
    }
    case KernelFamily::rough_heston: {
      const double ta = std::pow(tau, alpha);
      const double z = -lambda * ta;
      return nu * ta * tau *
             (mittag_leffler(alpha, alpha + 1.0, z) - mittag_leffler(alpha, alpha + 2.0, z));
    }
  }
  return 0.0;
}

std::string KernelSpec::describe() const {
  std::ostringstream os;
  switch (family) {
    case KernelFamily::power_law: os << "power_law(nu=" << nu << ", alpha=" << alpha; break;
    case KernelFamily::exp_decay: os << "exp_decay(nu=" << nu << ", lambda=" << lambda; break;
    case KernelFamily::rough_heston:
      os << "rough_heston(nu=" << nu << ", alpha=" << alpha << ", lambda=" << lambda;
      break;
  }
  os << ", delta=" << delta << ")";
  return os.str();
}

}  // namespace diamonds
