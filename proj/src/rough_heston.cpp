#include "diamond/rough_heston.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "diamond/afv.hpp"
#include "diamond/specfun.hpp"

namespace diamonds {

void RHParams::validate() const {
  if (!(nu >= 0.0)) throw std::invalid_argument("rough_heston: nu must be non-negative");
  if (!(alpha > 0.5 && alpha <= 1.0)) throw std::invalid_argument("rough_heston: alpha must lie in (1/2, 1]");
  if (!(lambda >= 0.0)) throw std::invalid_argument("rough_heston: lambda must be non-negative");
  if (!(std::abs(rho) <= 1.0)) throw std::invalid_argument("rough_heston: |rho| must not exceed 1");
}

void RHParams::require_zero_lambda() const {
  validate();
  if (lambda != 0.0) throw std::invalid_argument("rough_heston: closed-form trees need lambda = 0");
}

KernelSpec RHParams::kernel(double delta) const {
  validate();
  return KernelSpec::rough_heston(nu, alpha, lambda, delta);
}

double i_j_integral(const ForwardCurve& curve, double t, double T, int j, double alpha) {
  if (j < 0) throw std::invalid_argument("i_j_integral: j must be non-negative");
  HProfile h(T - t, 16);
  h.add_component(j * alpha, Eigen::VectorXd::Ones(17));
  return evaluate_profile(h, curve, t, T);
}

double x_pow_diamond_m(int k, const RHParams& params, const ForwardCurve& curve, double t, double T) {
  if (k < 1) throw std::invalid_argument("x_pow_diamond_m: k must be at least 1");
  params.require_zero_lambda();
  const double rn = params.rho * params.nu;
  if (rn == 0.0) return 0.0;
  return std::pow(rn, k) / std::tgamma(1.0 + k * params.alpha) *
         i_j_integral(curve, t, T, k, params.alpha);
}

double leverage_swap(const RHParams& params, const ForwardCurve& curve, double t, double T) {
  params.require_zero_lambda();
  if (!(T > t)) throw std::invalid_argument("leverage_swap: requires T > t");
  curve(t);
  curve(T);
  const double c = params.rho * params.nu;
  const double a = params.alpha;
  if (c == 0.0) return 0.0;
  // With tau = T - u: E_a(c tau^a) - 1 = c tau^a E_{a,a+1}(c tau^a), whose
  // antiderivative is F(tau) = c tau^(a+1) E_{a,a+2}(c tau^a).
  auto F = [&](double tau) {
    if (tau <= 0.0) return 0.0;
    const double ta = std::pow(tau, a);
    return c * ta * tau * mittag_leffler(a, a + 2.0, c * ta);
  };
  std::vector<double> cuts{0.0};
  for (double u : curve.breakpoints(t, T)) cuts.push_back(T - u);
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(T - t);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    if (curve.interpolation() == Interpolation::flat_forward) {
      sum += curve(T - 0.5 * (lo + hi)) * (F(hi) - F(lo));
    } else {
      auto f = [&](double tau) {
        if (tau <= 0.0) return 0.0;
        const double ta = std::pow(tau, a);
        return curve(T - tau) * c * ta * mittag_leffler(a, a + 1.0, c * ta);
      };
      sum += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 15, 1e-11);
    }
  }
  return sum;
}

RiccatiSolution riccati_solve(const KernelSpec& kernel, double rho, std::complex<double> a,
                              std::complex<double> b, std::complex<double> c, double horizon,
                              int n) {
  kernel.validate();
  if (n < 64) throw std::invalid_argument("riccati_solve: N must be at least 64");
  if (!(horizon > 0.0)) throw std::invalid_argument("riccati_solve: horizon must be positive");
  using cd = std::complex<double>;
  const double step = horizon / n;
  const cd a0 = b - 0.5 * a + 0.5 * (1.0 - rho * rho) * a * a;
  const bool has_c = c != 0.0;
  Eigen::VectorXd kbar = Eigen::VectorXd::Zero(n + 1);
  if (has_c)
    for (int i = 0; i <= n; ++i) kbar[i] = kernel.kbar(i * step);

  RiccatiSolution sol;
  sol.horizon = horizon;
  sol.n = n;
  sol.a = a;
  sol.b = b;
  sol.c = c;
  sol.delta = kernel.delta;
  sol.g = Eigen::VectorXcd::Zero(n + 1);
  Eigen::VectorXcd& g = sol.g;
  {
    const cd s = rho * a + c * kbar[0];
    g[0] = a0 + 0.5 * s * s;
  }
  const ConvolutionWeights w = convolution_weights(kernel, step, n);
  const double w0 = w.hi[0];
  for (int i = 1; i <= n; ++i) {
    cd hist = w.lo[0] * g[i - 1];
    for (int m = 1; m < i; ++m) hist += w.hi[m] * g[i - m] + w.lo[m] * g[i - m - 1];
    const cd s = rho * a + c * kbar[i] + hist;
    // g = a0 + (s + w0 g)^2 / 2  <=>  (w0^2/2) g^2 + (w0 s - 1) g + (a0 + s^2/2) = 0.
    const cd qa = 0.5 * w0 * w0;
    const cd qb = w0 * s - 1.0;
    const cd qc = a0 + 0.5 * s * s;
    const cd disc = std::sqrt(qb * qb - 4.0 * qa * qc);
    // The regular root tends to qc / (1 - w0 s) as w0 -> 0.
    const cd den = std::abs(-qb + disc) >= std::abs(-qb - disc) ? -qb + disc : -qb - disc;
    const cd root = 2.0 * qc / den;
    const double contraction = std::abs(w0 * (s + w0 * root));
    if (!std::isfinite(root.real()) || !std::isfinite(root.imag()) || contraction >= 1.0)
      throw std::runtime_error("riccati_solve: implicit step " + std::to_string(i) +
                               " has no contracting solution");
    g[i] = root;
  }
  return sol;
}

std::complex<double> mgf_exponent(const RiccatiSolution& sol, const ForwardCurve& curve, double t,
                                  double T, double x_t, double zeta_t) {
  if (std::abs((T - t) - sol.horizon) > 1e-12 * sol.horizon)
    throw std::invalid_argument("mgf: solution grid does not span [0, T - t]");
  return sol.a * x_t + sol.c * zeta_t + evaluate_profile(sol.g, curve, t, T);
}

std::complex<double> mgf_triple(const RiccatiSolution& sol, const ForwardCurve& curve, double t,
                                double T, double x_t, double zeta_t) {
  return std::exp(mgf_exponent(sol, curve, t, T, x_t, zeta_t));
}

std::complex<double> cf_log_price(std::complex<double> u, const KernelSpec& kernel, double rho,
                                  const ForwardCurve& curve, double T, int n) {
  using cd = std::complex<double>;
  if (u == cd{0.0, 0.0}) return 1.0;
  const RiccatiSolution sol = riccati_solve(kernel, rho, cd{0.0, 1.0} * u, 0.0, 0.0, T, n);
  return mgf_triple(sol, curve, 0.0, T);
}

double atm_skew_asymptotic(double H, double rho, double nu, double T) {
  if (!(T > 0.0)) throw std::invalid_argument("atm_skew_asymptotic: T must be positive");
  return rho * nu * std::pow(T, H - 0.5) / std::tgamma(H + 2.5);
}

}  // namespace diamonds
