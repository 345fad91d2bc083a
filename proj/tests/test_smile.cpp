#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "diamond/smile.hpp"

using namespace diamonds;
using cd = std::complex<double>;

namespace {

double rel(double x, double ref) { return std::abs(x / ref - 1.0); }

const RHParams desk{0.4, 0.55, 0.0, -0.65};
const ForwardCurve& desk_curve() {
  static const ForwardCurve c = ForwardCurve::flat(0.0256);
  return c;
}

// Undiscounted call on a unit forward by the Lewis formula:
// C(k) = 1 - e^{k/2} / pi int_0^inf Re[e^{-iuk} phi(u - i/2)] / (u^2 + 1/4) du.
double lewis_call(const CharFn& phi, double k) {
  auto f = [&](double u) { return std::real(std::exp(cd{0.0, -u * k}) * phi(cd{u, -0.5})) / (u * u + 0.25); };
  double err = 0.0;
  // The integrand decays like exp(-u^2 Sigma / 2); 200 is far beyond its support.
  const double I = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 200.0, 15, 1e-13, &err);
  return 1.0 - std::exp(0.5 * k) / M_PI * I;
}

double bs_call(double k, double sigma, double T) {
  const boost::math::normal n;
  const double sd = sigma * std::sqrt(T);
  const double d1 = -k / sd + 0.5 * sd;
  return cdf(n, d1) - std::exp(k) * cdf(n, d1 - sd);
}

double implied_vol_from_call(double price, double k, double T) {
  std::uintmax_t it = 200;
  const auto r = boost::math::tools::toms748_solve([&](double s) { return bs_call(k, s, T) - price; }, 1e-4, 5.0,
                                                   boost::math::tools::eps_tolerance<double>(50), it);
  return 0.5 * (r.first + r.second);
}

std::vector<double> grid(double lo, double hi, double h) {
  std::vector<double> ks;
  for (int i = 0; lo + i * h <= hi + 1e-12; ++i) ks.push_back(lo + i * h);
  return ks;
}

SmileSlice flat_slice(double sigma, double T) {
  SmileSlice s;
  s.T = T;
  for (double k : grid(-3.0, 2.0, 0.05)) s.points.push_back({k, sigma});
  return s;
}

}  // namespace

TEST_CASE("Black-Scholes inversion is exact") {
  // Strikes within four standard deviations; further out the OTM price nears
  // the truncation floor of the u-integral.
  for (double T : {0.1, 1.0}) {
    FourierSmile s(black_scholes_cf(0.25, T), T);
    const double sd = 0.25 * std::sqrt(T);
    for (double z : {-4.0, -1.0, 0.0, 0.5, 2.0, 4.0}) CHECK(s.implied_vol(z * sd) == doctest::Approx(0.25).epsilon(1e-9));
  }
  CHECK(implied_total_variance(black_scholes_cf(0.3, 2.0), 0.1, 2.0) == doctest::Approx(0.18).epsilon(1e-9));
}

TEST_CASE("vanishing vol-of-vol gives the variance swap everywhere") {
  const ForwardCurve curve({0.2, 1.0}, {0.03, 0.05});
  const double T = 0.5;
  FourierSmile s(rough_heston_cf({1e-8, 0.6, 0.0, -0.7}, curve, T), T);
  for (double k : {-0.3, 0.0, 0.3}) CHECK(rel(s.total_variance(k), curve.integral(0.0, T)) < 1e-7);
}

TEST_CASE("Fourier inversion against a Lewis price oracle") {
  const double T = 0.5;
  const CharFn phi = rough_heston_cf(desk, desk_curve(), T);
  FourierSmile s(phi, T);
  for (double k : {-0.1, 0.0, 0.1}) {
    CAPTURE(k);
    const double oracle = implied_vol_from_call(lewis_call(phi, k), k, T);
    CHECK(s.implied_vol(k) == doctest::Approx(oracle).epsilon(1e-7));
  }
  // Frozen desk value at the money.
  CHECK(s.implied_vol(0.0) == doctest::Approx(0.116729336641).epsilon(1e-9));
}

TEST_CASE("moving the characteristic function toward Black-Scholes moves the smile continuously") {
  const double T = 0.5;
  const CharFn rh = rough_heston_cf(desk, desk_curve(), T);
  const CharFn bs = black_scholes_cf(std::sqrt(0.0256), T);
  double prev = 0.0;
  for (double w : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    FourierSmile s([&](cd u) { return (1.0 - w) * rh(u) + w * bs(u); }, T);
    const double v = s.total_variance(-0.15);
    if (w > 0.0) {
      CHECK(v < prev);
      CHECK(prev - v < 2e-3);
    }
    prev = v;
  }
  CHECK(prev == doctest::Approx(0.0128).epsilon(1e-9));
}

TEST_CASE("expansion coefficients") {
  const TreeInputs zero{0.02, 0.0, 0.0, 0.0};
  for (double k : {-0.3, 0.0, 0.2}) CHECK(bg_expansion(zero, k) == 0.02);

  const TreeInputs in{0.0128, -4.1e-4, 2.3e-5, 3.1e-5};
  CHECK(bg_a1(in, 0.0) == doctest::Approx(0.5 * in.XdM).epsilon(1e-15));
  const double h = 1e-5;
  CHECK((bg_a1(in, h) - bg_a1(in, -h)) / (2.0 * h) == doctest::Approx(in.XdM / in.M).epsilon(1e-9));
  CHECK(bg_expansion(in, 0.1) == doctest::Approx(in.M + bg_a1(in, 0.1) + bg_a2(in, 0.1)).epsilon(1e-15));
  CHECK_THROWS_AS(bg_expansion({0.0, 0.0, 0.0, 0.0}, 0.0), std::invalid_argument);
}

TEST_CASE("expansion error against Fourier is third order in vol-of-vol") {
  const ForwardCurve curve = ForwardCurve::flat(0.04);
  const double T = 0.5;
  auto gap = [&](double nu) {
    const RHParams p{nu, 0.6, 0.0, -0.7};
    FourierSmile s(rough_heston_cf(p, curve, T), T);
    const TreeInputs in = rough_heston_tree_inputs(p, curve, T);
    double worst = 0.0;
    for (double k : grid(-0.2, 0.2, 0.05)) worst = std::max(worst, std::abs(s.total_variance(k) - bg_expansion(in, k)));
    return worst;
  };
  const double g1 = gap(0.2), g2 = gap(0.1);
  CHECK(g1 / g2 >= 6.0);
}

TEST_CASE("flat smile replication") {
  const double sigma = 0.2, T = 0.75;
  const SmileSlice s = flat_slice(sigma, T);
  // The trapezoid error is h^2 / 12 times the payoff kink at the money, h the refined step.
  const double h = 0.05 / 8.0;
  CHECK(varswap_from_smile(s) - sigma * sigma * T == doctest::Approx(h * h / 6.0).epsilon(1e-3));
  CHECK(rel(gammaswap_from_smile(s), sigma * sigma * T) < 3e-4);
  CHECK(std::abs(leverage_from_smile(s)) < 1e-7);

  CHECK(varswap_from_smile(flat_slice(0.15, T)) < varswap_from_smile(flat_slice(0.25, T)));
  CHECK(gammaswap_from_smile(flat_slice(0.15, T)) < gammaswap_from_smile(flat_slice(0.25, T)));

  SmileSlice narrow;
  narrow.T = T;
  narrow.points = {{-0.1, 0.2}, {0.0, 0.2}, {0.1, 0.2}};
  CHECK_THROWS_AS(varswap_from_smile(narrow), std::runtime_error);
}

TEST_CASE("rough Heston smile round trip") {
  const double T = 0.5;
  const std::vector<double> ks = grid(-2.5, 0.8, 0.025);
  FourierSmile s(rough_heston_cf(desk, desk_curve(), T), T);
  const SmileSlice slice = fourier_slice(s, T, ks);
  const double M = desk_curve().integral(0.0, T);
  CHECK(rel(varswap_from_smile(slice), M) < 5e-3);
  const double L = leverage_from_smile(slice);
  CHECK(L < 0.0);
  CHECK(gammaswap_from_smile(slice) < varswap_from_smile(slice));
  CHECK(rel(L, leverage_swap(desk, desk_curve(), 0.0, T)) < 0.01);

  const RHParams uncorrelated{0.4, 0.55, 0.0, 0.0};
  FourierSmile s0(rough_heston_cf(uncorrelated, desk_curve(), T), T);
  // Without correlation the smile is symmetric in k, so both wings need the same reach.
  const double L0 = leverage_from_smile(fourier_slice(s0, T, grid(-2.5, 2.5, 0.025)));
  CHECK(std::abs(L0) < 0.01 * std::abs(L));
}

TEST_CASE("smile slices") {
  const auto path = std::filesystem::temp_directory_path() / "diamond_test_slice.csv";
  {
    std::ofstream out(path);
    out << "# expiry slice\nk,sigma_bs\n-0.1,0.25\n0,0.2\n0.1,0.18\n";
  }
  const SmileSlice s = SmileSlice::from_csv(path.string(), 0.5);
  REQUIRE(s.points.size() == 3);
  CHECK(s.points[2].k == 0.1);
  CHECK(s.points[0].sigma_bs == 0.25);
  std::filesystem::remove(path);

  SmileSlice bad{0.5, {{0.1, 0.2}, {0.0, 0.2}}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  SmileSlice neg{0.5, {{0.0, 0.2}, {0.1, -0.2}}};
  CHECK_THROWS_AS(neg.validate(), std::invalid_argument);

  CHECK(bs_otm_price(0.0, 0.04) == doctest::Approx(bs_call(0.0, 0.2, 1.0)).epsilon(1e-14));
  CHECK(bs_otm_price(-0.2, 0.04) == doctest::Approx(bs_call(-0.2, 0.2, 1.0) - (1.0 - std::exp(-0.2))).epsilon(1e-12));
}
