#include "diamond/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

namespace diamonds {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();

struct SeriesResult {
  double value;
  double max_term;
  bool converged;
};

// Neumaier-compensated Taylor series sum_n z^n / Gamma(alpha n + beta).
SeriesResult ml_series(double alpha, double beta, double z) {
  const double log_abs_z = std::log(std::abs(z));
  double sum = 0.0, comp = 0.0, max_term = 0.0;
  int small_run = 0;
  for (int n = 0; n < 20000; ++n) {
    const double arg = alpha * n + beta;
    double term;
    if (arg < 170.0) {
      term = std::pow(z, n) * rgamma(arg);
    } else {
      const double mag = std::exp(n * log_abs_z - std::lgamma(arg));
      term = (z < 0 && (n & 1)) ? -mag : mag;
    }
    const double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
    max_term = std::max(max_term, std::abs(term));
    // The terms are unimodal in n; stop once past the peak and negligible.
    const bool past_peak = n * alpha > std::pow(std::abs(z), 1.0 / alpha) + 2.0;
    if (past_peak && std::abs(term) <= 1e-17 * std::abs(sum + comp)) {
      if (++small_run >= 3) return {sum + comp, max_term, true};
    } else {
      small_run = 0;
    }
    if (!std::isfinite(sum)) return {sum, max_term, false};
  }
  return {sum + comp, max_term, false};
}

double ml_series_extended(double alpha, double beta, double z) {
  using Big = boost::multiprecision::cpp_bin_float_100;
  const Big zb = z;
  Big sum = 0, power = 1;
  int small_run = 0;
  for (int n = 0; n < 100000; ++n) {
    const Big arg = Big(alpha) * n + Big(beta);
    const Big term = power / boost::multiprecision::tgamma(arg);
    sum += term;
    const bool past_peak = n * alpha > std::pow(std::abs(z), 1.0 / alpha) + 2.0;
    if (past_peak && abs(term) <= Big(1e-40) * abs(sum)) {
      if (++small_run >= 3) return sum.convert_to<double>();
    } else {
      small_run = 0;
    }
    power *= zb;
  }
  throw std::runtime_error("mittag_leffler: extended series did not converge");
}

// Integral representation for 0 < alpha < 1, beta < 1 + alpha and z < 0.
double ml_integral(double alpha, double beta, double z) {
  const double x = -z;
  const double s1 = std::sin(kPi * (1.0 - beta));
  const double s2 = std::sin(kPi * (1.0 - beta + alpha));
  const double c = std::cos(alpha * kPi);
  const double pre = 1.0 / (alpha * kPi);
  auto kernel = [&](double chi) {
    if (chi <= 0.0) return 0.0;
    const double num = chi * s1 + x * s2;
    const double den = chi * chi + 2.0 * chi * x * c + x * x;
    return pre * std::pow(chi, (1.0 - beta) / alpha) * std::exp(-std::pow(chi, 1.0 / alpha)) * num / den;
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  double total = ts.integrate(kernel, 0.0, x, 1e-14);
  total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(kernel, x, 2.0 * x, 18, 1e-13);
  total += es.integrate(kernel, 2.0 * x, std::numeric_limits<double>::infinity(), 1e-14);
  return total;
}

double ml_negative(double alpha, double beta, double z) {
  if (alpha == 1.0 && beta == 1.0) return std::exp(z);
  if (alpha < 1.0 && beta >= 1.0 + alpha) {
    // E_{a,b}(z) = (E_{a,b-a}(z) - 1/Gamma(b-a)) / z lowers beta into the
    // range covered by the integral representation.
    return (mittag_leffler(alpha, beta - alpha, z) - rgamma(beta - alpha)) / z;
  }
  if (alpha < 1.0) return ml_integral(alpha, beta, z);
  return ml_series_extended(alpha, beta, z);
}

}  // namespace

double rgamma(double x) {
  if (x <= 0.0 && x == std::floor(x)) return 0.0;
  if (x > 171.0) return 0.0;
  return 1.0 / std::tgamma(x);
}

double mittag_leffler(double alpha, double beta, double z) {
  if (!(alpha > 0.0)) throw std::domain_error("mittag_leffler: alpha must be positive");
  if (!(beta > 0.0)) throw std::domain_error("mittag_leffler: beta must be positive");
  if (z == 0.0) return rgamma(beta);
  if (z > 0.0) {
    const SeriesResult s = ml_series(alpha, beta, z);
    if (s.converged) return s.value;
    return std::numeric_limits<double>::infinity();
  }
  const SeriesResult s = ml_series(alpha, beta, z);
  // Accept the double series when cancellation leaves >= 13 correct digits.
  if (s.converged && s.max_term * 64.0 * kEps <= 1e-13 * std::abs(s.value)) return s.value;
  return ml_negative(alpha, beta, z);
}

// ---------------------------------------------------------------------------

namespace {

// Phi(L): tanh-sinh on [0, min(d, L)] absorbs the w^-gamma endpoint; beyond d
// the substitution w = e^z leaves an integrand analytic in a strip of width pi.
double g_phi(double L, double d, double gamma) {
  if (L <= 0.0) return 0.0;
  static boost::math::quadrature::tanh_sinh<double> ts;
  auto f = [&](double w) { return std::pow(w * (w + d), -gamma); };
  const double m = std::min(d, L);
  double out = ts.integrate(f, 0.0, m, 1e-10);
  if (L > d) {
    auto g = [&](double z) {
      const double w = std::exp(z);
      return w * std::pow(w * (w + d), -gamma);
    };
    // Unit-width panels keep the strip singularities well away from each rule.
    const double z0 = std::log(d), z1 = std::log(L);
    const int panels = std::max(1, static_cast<int>(std::ceil(z1 - z0)));
    const double h = (z1 - z0) / panels;
    for (int i = 0; i < panels; ++i)
      out += boost::math::quadrature::gauss<double, 20>::integrate(g, z0 + i * h, z0 + (i + 1) * h);
  }
  return out;
}

}  // namespace

double g_gamma(double y, double x, double gamma) {
  if (!(x >= 1.0) || !(y >= x)) throw std::domain_error("g_gamma: requires y >= x >= 1");
  if (!(gamma >= 0.0 && gamma < 0.5)) throw std::domain_error("g_gamma: gamma must lie in [0, 1/2)");
  if (gamma == 0.0) return 1.0;
  const double two_h = 1.0 - 2.0 * gamma;
  const double d = y - x;
  if (d == 0.0) return std::pow(x, two_h) - std::pow(x - 1.0, two_h);
  if (x >= 2.0) {
    // Both factors are analytic on a neighbourhood of [0, 1]; plain Gauss suffices.
    auto g = [&](double r) { return std::pow((1.0 - r / y) * (1.0 - r / x), -gamma); };
    return two_h * std::pow(x * y, -gamma) *
           boost::math::quadrature::gauss<double, 30>::integrate(g, 0.0, 1.0);
  }
  // With w = x - r the integral is Phi(x) - Phi(x - 1) for
  // Phi(L) = int_0^L w^-gamma (w + d)^-gamma dw.
  return two_h * (g_phi(x, d, gamma) - g_phi(x - 1.0, d, gamma));
}

double g_gamma_hypergeometric(double y, double x, double gamma) {
  if (!(x >= 1.0) || !(y >= x)) throw std::domain_error("g_gamma: requires y >= x >= 1");
  if (!(gamma >= 0.0 && gamma < 0.5)) throw std::domain_error("g_gamma: gamma must lie in [0, 1/2)");
  const double d = y - x;
  // Antiderivative of w^-gamma (w + d)^-gamma, zero at w = 0.
  auto antiderivative = [&](double w) {
    if (w == 0.0) return 0.0;
    const double arg = w / (w + d);
    return std::pow(w, 1.0 - gamma) * std::pow(w + d, -gamma) / (1.0 - gamma) *
           gauss_2f1(gamma, 1.0, 2.0 - gamma, arg);
  };
  return (1.0 - 2.0 * gamma) * (antiderivative(x) - antiderivative(x - 1.0));
}

// ---------------------------------------------------------------------------

namespace {

double series_2f1(double a, double b, double c, double z) {
  double term = 1.0, sum = 1.0;
  int small_run = 0;
  for (int n = 0; n < 2000000; ++n) {
    term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) {
      if (++small_run >= 2) return sum;
    } else {
      small_run = 0;
    }
    if (term == 0.0) return sum;
  }
  throw std::runtime_error("gauss_2f1: series did not converge");
}

bool near_integer(double v, double tol) { return std::abs(v - std::round(v)) < tol; }

// 0 <= z < 1.
double unit_interval_2f1(double a, double b, double c, double z) {
  if (z <= 0.5 || near_integer(c - a - b, 0.05)) return series_2f1(a, b, c, z);
  const double s = c - a - b;
  const double w = 1.0 - z;
  const double lg = std::tgamma(c);
  const double A = lg * std::tgamma(s) * rgamma(c - a) * rgamma(c - b);
  const double B = lg * std::tgamma(-s) * rgamma(a) * rgamma(b);
  double out = 0.0;
  if (A != 0.0) out += A * series_2f1(a, b, 1.0 - s, w);
  if (B != 0.0) out += B * std::pow(w, s) * series_2f1(c - a, c - b, 1.0 + s, w);
  return out;
}

}  // namespace

double gauss_2f1(double a, double b, double c, double z) {
  if (c <= 0.0 && c == std::floor(c)) throw std::domain_error("gauss_2f1: c is a non-positive integer");
  if (z == 0.0) return 1.0;
  if (std::abs(z) <= 0.5) return series_2f1(a, b, c, z);
  if (z == 1.0) {
    if (c - a - b <= 0.0) throw std::runtime_error("gauss_2f1: divergent at z = 1");
    return std::tgamma(c) * std::tgamma(c - a - b) * rgamma(c - a) * rgamma(c - b);
  }
  if (z < 0.0) {
    // Pfaff: 2F1(a,b;c;z) = (1-z)^-a 2F1(a, c-b; c; z/(z-1)).
    return std::pow(1.0 - z, -a) * unit_interval_2f1(a, c - b, c, z / (z - 1.0));
  }
  if (z < 1.0) return unit_interval_2f1(a, b, c, z);

  // z > 1: real part of the continuation through the 1/z connection formula.
  if (near_integer(b - a, 1e-12)) throw std::runtime_error("gauss_2f1: b - a integer unsupported for z > 1");
  const double w = 1.0 / z;
  const double t1 = std::tgamma(c) * std::tgamma(b - a) * rgamma(b) * rgamma(c - a);
  const double t2 = std::tgamma(c) * std::tgamma(a - b) * rgamma(a) * rgamma(c - b);
  double out = 0.0;
  if (t1 != 0.0)
    out += t1 * std::cos(kPi * a) * std::pow(z, -a) * unit_interval_2f1(a, a - c + 1.0, a - b + 1.0, w);
  if (t2 != 0.0)
    out += t2 * std::cos(kPi * b) * std::pow(z, -b) * unit_interval_2f1(b, b - c + 1.0, b - a + 1.0, w);
  if (!std::isfinite(out)) throw std::runtime_error("gauss_2f1: transformation produced a non-finite value");
  return out;
}

}  // namespace diamonds
