#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "diamond/calibration.hpp"

using namespace diamonds;

namespace {

const std::vector<double> kMaturities{1.0 / 12.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0};

const ForwardCurve& curve() {
  static const ForwardCurve c({0.5, 1.0, 2.0, 5.0}, {0.03, 0.035, 0.04, 0.042});
  return c;
}

LeverageTermStructure synthetic(double rn, double H, const std::vector<double>& noise = {}) {
  const std::vector<double> L = model_leverage_curve(rn, H, curve(), kMaturities);
  LeverageTermStructure ts;
  for (std::size_t i = 0; i < L.size(); ++i)
    ts.points.push_back({kMaturities[i], L[i] * (noise.empty() ? 1.0 : 1.0 + noise[i]), 1.0 / kMaturities[i]});
  return ts;
}

}  // namespace

TEST_CASE("model leverage curve") {
  for (double v : model_leverage_curve(0.0, 0.1, curve(), kMaturities)) CHECK(v == 0.0);

  const ForwardCurve flat = ForwardCurve::flat(0.04);
  const double rn = -0.35;
  const std::vector<double> ts{0.25, 1.0, 4.0};
  const auto L = model_leverage_curve(rn, 0.5, flat, ts);
  for (std::size_t i = 0; i < ts.size(); ++i)
    CHECK(L[i] == doctest::Approx(0.04 * ((std::exp(rn * ts[i]) - 1.0) / rn - ts[i])).epsilon(1e-10));

  double prev = 0.0;
  for (double r : {-0.05, -0.1, -0.2, -0.4, -0.8}) {
    const double v = model_leverage_curve(r, 0.1, curve(), {1.0})[0];
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("objective depends on rho and nu only through their product") {
  const LeverageTermStructure ts = synthetic(-0.3, 0.1);
  const double base = leverage_objective(ts, curve(), -0.6, 0.7, 0.12);
  CHECK(base > 0.0);
  for (double s : {0.5, 2.0}) CHECK(leverage_objective(ts, curve(), -0.6 * s, 0.7 / s, 0.12) == base);
  CHECK(leverage_objective(ts, curve(), -0.6, 0.5, 0.1) == doctest::Approx(0.0).epsilon(1e-20));
}

TEST_CASE("noiseless round trip") {
  const FitResult r = fit_leverage(synthetic(-0.3, 0.1), curve());
  CHECK(r.converged);
  CHECK(r.h_identified);
  CHECK(std::abs(r.rho_nu + 0.3) <= 1e-4);
  CHECK(std::abs(r.H - 0.1) <= 1e-3);
  CHECK(r.objective >= 0.0);
  CHECK(r.objective < 1e-12);
}

TEST_CASE("zero leverage term structure") {
  const FitResult r = fit_leverage(synthetic(0.0, 0.1), curve());
  CHECK(std::abs(r.rho_nu) < 1e-4);
  CHECK_FALSE(r.h_identified);
}

TEST_CASE("fits are deterministic") {
  const LeverageTermStructure ts = synthetic(-0.45, 0.2);
  const FitResult a = fit_leverage(ts, curve(), std::make_pair(-0.4, 0.15));
  const FitResult b = fit_leverage(ts, curve(), std::make_pair(-0.4, 0.15));
  CHECK(a.rho_nu == b.rho_nu);
  CHECK(a.H == b.H);
  CHECK(a.objective == b.objective);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("one percent noise stays inside a parametric bootstrap interval") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n01(0.0, 0.01);
  auto draw = [&] {
    std::vector<double> e(kMaturities.size());
    for (double& x : e) x = n01(rng);
    return e;
  };
  const FitResult fit = fit_leverage(synthetic(-0.3, 0.1, draw()), curve());
  REQUIRE(fit.converged);

  std::vector<double> rn, h;
  for (int b = 0; b < 40; ++b) {
    const FitResult r = fit_leverage(synthetic(fit.rho_nu, fit.H, draw()), curve(), std::make_pair(fit.rho_nu, fit.H));
    rn.push_back(r.rho_nu - fit.rho_nu);
    h.push_back(r.H - fit.H);
  }
  auto half_width = [](std::vector<double> d) {
    for (double& x : d) x = std::abs(x);
    std::sort(d.begin(), d.end());
    return d[static_cast<std::size_t>(0.95 * (d.size() - 1))];
  };
  CHECK(std::abs(fit.rho_nu + 0.3) <= half_width(rn));
  CHECK(std::abs(fit.H - 0.1) <= half_width(h));
}

TEST_CASE("term structure input") {
  const auto path = std::filesystem::temp_directory_path() / "diamond_test_lev.csv";
  {
    std::ofstream out(path);
    out << "T_years,leverage\n0.5,-0.001\n1,-0.003\n2,-0.008\n";
  }
  const LeverageTermStructure ts = LeverageTermStructure::from_csv(path.string());
  REQUIRE(ts.points.size() == 3);
  CHECK(ts.points[0].weight == doctest::Approx(2.0));
  CHECK(ts.points[2].weight == doctest::Approx(0.5));
  std::filesystem::remove(path);

  LeverageTermStructure two;
  two.points = {{0.5, -0.001, 1.0}, {1.0, -0.003, 1.0}};
  CHECK_THROWS_AS(two.validate(), std::invalid_argument);
  LeverageTermStructure unordered;
  unordered.points = {{1.0, -0.001, 1.0}, {0.5, -0.003, 1.0}, {2.0, -0.004, 1.0}};
  CHECK_THROWS_AS(unordered.validate(), std::invalid_argument);
  LeverageTermStructure bad_weight;
  bad_weight.points = {{0.5, -0.001, 1.0}, {1.0, -0.003, 0.0}, {2.0, -0.004, 1.0}};
  CHECK_THROWS_AS(bad_weight.validate(), std::invalid_argument);
}
