#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include "diamond/specfun.hpp"

using namespace diamonds;

namespace {

// E_{alpha,beta}(z) by its power series in 120-digit arithmetic, enough to
// absorb the cancellation of the alternating series for |z| <= 20.
double ml_oracle(double alpha, double beta, double z) {
  using big = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<120>>;
  big sum = 0, zn = 1;
  const double peak = std::pow(std::abs(z), 1.0 / alpha);
  for (int n = 0; n < 4000; ++n) {
    const big term = zn / boost::multiprecision::tgamma(big(alpha) * n + big(beta));
    sum += term;
    if (n > peak + 10 && abs(term) < 1e-30 * abs(sum)) break;
    zn *= big(z);
  }
  return sum.convert_to<double>();
}

// 2H int_0^1 (y - r)^-gamma (x - r)^-gamma dr by adaptive QAGS.
double g_oracle(double y, double x, double gamma) {
  struct P {
    double y, x, g;
  } p{y, x, gamma};
  gsl_function f;
  f.function = [](double r, void* v) {
    const auto* q = static_cast<P*>(v);
    return std::pow(q->y - r, -q->g) * std::pow(q->x - r, -q->g);
  };
  f.params = &p;
  gsl_set_error_handler_off();
  gsl_integration_workspace* w = gsl_integration_workspace_alloc(2000);
  double result = 0.0, err = 0.0;
  gsl_integration_qags(&f, 0.0, 1.0, 0.0, 1e-12, 2000, w, &result, &err);
  gsl_integration_workspace_free(w);
  return (1.0 - 2.0 * gamma) * result;
}

}  // namespace

TEST_CASE("Mittag-Leffler identities") {
  CHECK(mittag_leffler(1.0, 1.0, 1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
  CHECK(mittag_leffler(2.0, 1.0, 4.0) == doctest::Approx(std::cosh(2.0)).epsilon(1e-14));
  CHECK(mittag_leffler(1.0, 1.0, -7.5) == doctest::Approx(std::exp(-7.5)).epsilon(1e-12));
  CHECK(mittag_leffler(0.5, 1.0, -1.0) == doctest::Approx(std::exp(1.0) * std::erfc(1.0)).epsilon(1e-12));
  CHECK_THROWS_AS(mittag_leffler(0.0, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(mittag_leffler(0.5, 0.0, 1.0), std::domain_error);
}

TEST_CASE("Mittag-Leffler against the extended precision series") {
  CHECK(mittag_leffler(0.6, 1.0, -1.3) == doctest::Approx(ml_oracle(0.6, 1.0, -1.3)).epsilon(1e-12));
  for (double alpha : {0.55, 0.6, 0.8, 1.0})
    for (double beta : {1.0, 0.6, 1.6})
      for (double z : {-20.0, -5.0, -0.7, 0.3, 2.0, 10.0}) {
        CAPTURE(alpha);
        CAPTURE(beta);
        CAPTURE(z);
        const double ref = ml_oracle(alpha, beta, z);
        CHECK(mittag_leffler(alpha, beta, z) == doctest::Approx(ref).epsilon(1e-11));
      }
}

TEST_CASE("Mittag-Leffler is positive on the real line") {
  for (double alpha : {0.55, 0.75, 1.0})
    for (double z = -50.0; z <= 20.0; z += 0.5) CHECK(mittag_leffler(alpha, 1.0, z) > 0.0);
}

TEST_CASE("G_gamma special values") {
  for (double gamma : {0.0, 0.1, 0.25, 0.4, 0.49}) CHECK(g_gamma(1.0, 1.0, gamma) == 1.0);
  for (double y : {1.0, 1.5, 7.0}) CHECK(g_gamma(y, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS(g_gamma(1.0, 0.5, 0.4));
  CHECK_THROWS(g_gamma(1.0, 2.0, 0.4));
}

TEST_CASE("G_gamma against adaptive quadrature") {
  CHECK(g_gamma(2.0, 1.0, 0.4) == doctest::Approx(g_oracle(2.0, 1.0, 0.4)).epsilon(1e-10));
  for (double x : {1.0, 1.01, 2.0, 30.0})
    for (double r : {1.0, 1.2, 4.0, 100.0})
      for (double gamma : {0.1, 0.3, 0.45}) {
        CAPTURE(x);
        CAPTURE(r);
        CAPTURE(gamma);
        CHECK(g_gamma(r * x, x, gamma) == doctest::Approx(g_oracle(r * x, x, gamma)).epsilon(1e-10));
      }
}

TEST_CASE("G_gamma is nonincreasing in y") {
  for (double gamma : {0.1, 0.4})
    for (double x : {1.0, 3.0}) {
      double prev = g_gamma(x, x, gamma);
      for (double y = x * 1.05; y < 200.0; y *= 1.3) {
        const double v = g_gamma(y, x, gamma);
        CHECK(v <= prev);
        prev = v;
      }
    }
}

TEST_CASE("quadrature and hypergeometric G_gamma agree on random arguments") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lx(0.0, 6.0), ly(0.0, 6.0), g(0.02, 0.48);
  for (int i = 0; i < 1000; ++i) {
    const double x = std::exp(lx(rng));
    const double y = x * std::exp(ly(rng));
    const double gamma = g(rng);
    const double q = g_gamma(y, x, gamma);
    const double h = g_gamma_hypergeometric(y, x, gamma);
    CAPTURE(x);
    CAPTURE(y);
    CAPTURE(gamma);
    CHECK(std::abs(q / h - 1.0) < 1e-8);
  }
}

TEST_CASE("Gauss hypergeometric function") {
  CHECK(gauss_2f1(0.3, 1.7, 2.2, 0.0) == 1.0);
  CHECK(gauss_2f1(1.0, 1.0, 2.0, 0.5) == doctest::Approx(-std::log(0.5) / 0.5).epsilon(1e-14));
  CHECK(gauss_2f1(0.5, 1.0, 1.5, -3.0) == doctest::Approx(std::atan(std::sqrt(3.0)) / std::sqrt(3.0)).epsilon(1e-13));
  CHECK(gauss_2f1(1.0, 1.0, 2.0, -0.99) == doctest::Approx(std::log(1.99) / 0.99).epsilon(1e-13));
  // 2F1(1/2, 1; 3/2; z) = atanh(sqrt z) / sqrt z, whose real part for z > 1 is
  // log((sqrt z + 1) / (sqrt z - 1)) / (2 sqrt z).
  const double r = std::sqrt(3.0);
  CHECK(gauss_2f1(0.5, 1.0, 1.5, 3.0) == doctest::Approx(std::log((r + 1.0) / (r - 1.0)) / (2.0 * r)).epsilon(1e-12));
}

TEST_CASE("hypergeometric family of the G_gamma closed form against quadrature") {
  // 2F1(1, 2 - 2 gamma; 2 - gamma; z) = (1 - gamma) int_0^1 (1 - t)^-gamma (1 - z t)^-1 ... is
  // checked through the Euler integral 2F1(a, b; c; z) = Gamma(c) / (Gamma(b) Gamma(c - b))
  // int_0^1 t^{b-1} (1 - t)^{c-b-1} (1 - z t)^{-a} dt, valid for z < 1.
  const double gamma = 0.4;
  const double a = 1.0, b = 2.0 - 2.0 * gamma, c = 2.0 - gamma;
  for (double z : {-3.0, -0.5, 0.3, 0.9}) {
    struct P {
      double a, b, c, z;
    } p{a, b, c, z};
    gsl_function f;
    f.function = [](double t, void* v) {
      const auto* q = static_cast<P*>(v);
      return std::pow(t, q->b - 1.0) * std::pow(1.0 - t, q->c - q->b - 1.0) * std::pow(1.0 - q->z * t, -q->a);
    };
    f.params = &p;
    gsl_set_error_handler_off();
    gsl_integration_workspace* w = gsl_integration_workspace_alloc(1000);
    double res = 0.0, err = 0.0;
    gsl_integration_qags(&f, 0.0, 1.0, 0.0, 1e-13, 1000, w, &res, &err);
    gsl_integration_workspace_free(w);
    const double ref = std::tgamma(c) / (std::tgamma(b) * std::tgamma(c - b)) * res;
    CHECK(gauss_2f1(a, b, c, z) == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("reciprocal gamma") {
  CHECK(rgamma(0.0) == 0.0);
  CHECK(rgamma(-2.0) == 0.0);
  CHECK(rgamma(5.0) == doctest::Approx(1.0 / 24.0).epsilon(1e-15));
}
