#include <doctest.h>

#include <cmath>

#include "diamond/mc.hpp"

using namespace diamonds;

namespace {

SimConfig small(long paths, int steps, std::uint64_t seed = 7) {
  SimConfig c;
  c.n_paths = paths;
  c.n_steps = steps;
  c.seed = seed;
  return c;
}

Eigen::VectorXd last_column(const PathBundle& b, Process p) { return b.level.at(p).col(b.n_steps); }

Eigen::VectorXd integrated_variance(const PathBundle& b) {
  const Eigen::MatrixXd& V = b.V;
  return b.dt() * (V.rowwise().sum() - 0.5 * (V.col(0) + V.col(b.n_steps)));
}

bool within(const McEstimate& e, double ref, double k = 3.0) { return std::abs(e.z_score(ref)) < k; }

const RHParams desk{0.4, 0.55, 0.0, -0.65};
const ForwardCurve& desk_curve() {
  static const ForwardCurve c = ForwardCurve::flat(0.0256);
  return c;
}

}  // namespace

TEST_CASE("identical configurations give bit-identical estimates") {
  const SimConfig cfg = small(2000, 32, 99);
  const std::vector<ProcessPair> pairs{{Process::X, Process::M}, {Process::S, Process::M}};
  const auto a = stream_rough_heston(cfg, desk, desk_curve(), 0.5, pairs);
  const auto b = stream_rough_heston(cfg, desk, desk_curve(), 0.5, pairs);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].value == b[i].value);
    CHECK(a[i].std_error == b[i].std_error);
  }
  const PathBundle p1 = simulate_rough_bergomi(small(200, 16), {1.5, 0.1, -0.9}, desk_curve(), 0.25);
  const PathBundle p2 = simulate_rough_bergomi(small(200, 16), {1.5, 0.1, -0.9}, desk_curve(), 0.25);
  CHECK(p1.V == p2.V);
  CHECK(p1.level.at(Process::X) == p2.level.at(Process::X));

  const auto c = stream_rough_heston(small(2000, 32, 100), desk, desk_curve(), 0.5, pairs);
  CHECK(c[0].value != a[0].value);
}

TEST_CASE("standard errors halve when paths quadruple") {
  const std::vector<ProcessPair> pairs{{Process::X, Process::M}};
  const double se1 = stream_rough_heston(small(4000, 32), desk, desk_curve(), 0.5, pairs)[0].std_error;
  const double se4 = stream_rough_heston(small(16000, 32), desk, desk_curve(), 0.5, pairs)[0].std_error;
  CHECK(se1 / se4 == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("deterministic variance when nu = 0") {
  const ForwardCurve curve({0.2, 1.0}, {0.04, 0.09});
  const PathBundle b = simulate_rough_heston(small(4000, 50), {0.0, 0.6, 0.0, -0.5}, curve, 0.5);
  for (int j = 0; j <= 50; j += 10) CHECK(b.V(17, j) == doctest::Approx(curve(std::max(j * 0.01, 1e-12))).epsilon(1e-12));
  CHECK(within(mean_estimate(last_column(b, Process::S), true), 1.0));
  const double M = curve.integral(0.0, 0.5);
  // Antithetic partners cancel the Gaussian part exactly.
  CHECK(mean_estimate(last_column(b, Process::X), true).value == doctest::Approx(-0.5 * M).epsilon(1e-12));
}

TEST_CASE("rough Heston variance swap and log strip") {
  const PathBundle b = simulate_rough_heston(small(20000, 64), desk, desk_curve(), 0.5);
  const double M = desk_curve().integral(0.0, 0.5);
  CHECK(within(mean_estimate(integrated_variance(b), true), M));
  CHECK(within(mean_estimate(last_column(b, Process::M), true), M));
  CHECK(within(mean_estimate(last_column(b, Process::X), true), -0.5 * M));
  CHECK(within(mean_estimate(last_column(b, Process::S), true), 1.0));
  CHECK(b.V.minCoeff() >= 0.0);
}

TEST_CASE("rough Heston diamonds against closed forms") {
  const double T = 0.5;
  const auto est = stream_rough_heston(small(20000, 128), desk, desk_curve(), T,
                                       {{Process::X, Process::X}, {Process::X, Process::M}, {Process::S, Process::M}});
  CHECK(within(est[0], desk_curve().integral(0.0, T)));
  CHECK(within(est[1], x_pow_diamond_m(1, desk, desk_curve(), 0.0, T)));
  CHECK(within(est[2], leverage_swap(desk, desk_curve(), 0.0, T)));
}

TEST_CASE("zero correlation gives a zero leverage swap") {
  const PathBundle b = simulate_rough_heston(small(10000, 64), {0.4, 0.55, 0.0, 0.0}, desk_curve(), 0.5);
  CHECK(within(estimate_leverage(b), 0.0));
}

TEST_CASE("realized and bracket covariations agree") {
  const PathBundle b = simulate_rough_heston(small(20000, 128), desk, desk_curve(), 0.5);
  const McEstimate br = estimate_diamond(b, Process::X, Process::M, Covariation::bracket);
  const McEstimate re = estimate_diamond(b, Process::X, Process::M, Covariation::realized);
  CHECK(std::abs(br.value - re.value) < 3.0 * std::hypot(br.std_error, re.std_error));
}

TEST_CASE("rough Bergomi forward variances are martingales") {
  SimConfig cfg = small(20000, 32);
  cfg.snapshot_steps = {8, 16, 24};
  const RBParams p{1.5, 0.1, -0.9};
  const ForwardCurve curve({0.1, 0.3}, {0.04, 0.05}, Interpolation::linear);
  const double T = 0.25;
  const PathBundle b = simulate_rough_bergomi(cfg, p, curve, T);
  REQUIRE(b.xi_snapshots.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    const int s = b.snapshot_steps[k];
    for (int j : {s, (s + 32) / 2, 32}) {
      CAPTURE(s);
      CAPTURE(j);
      const McEstimate e = mean_estimate(b.xi_snapshots[k].col(j), true);
      CHECK(within(e, curve(j * b.dt())));
    }
    CHECK(std::isnan(b.xi_snapshots[k](0, s - 1)));
  }
  CHECK(b.V.minCoeff() > 0.0);

  // Two-point product expectation at snapshot s = 16.
  const int s = 16, j1 = 20, j2 = 30;
  const Eigen::VectorXd prod = b.xi_snapshots[1].col(j1).cwiseProduct(b.xi_snapshots[1].col(j2));
  const double ref = xi_product_expectation(curve, p, 0.0, s * b.dt(), {{j1 * b.dt(), 1.0}, {j2 * b.dt(), 1.0}});
  CHECK(within(mean_estimate(prod, true), ref));
}

TEST_CASE("rough Bergomi with vanishing vol-of-vol") {
  const PathBundle b = simulate_rough_bergomi(small(200, 16), {1e-8, 0.1, -0.9}, desk_curve(), 0.25);
  CHECK((b.V.array() - 0.0256).abs().maxCoeff() < 1e-9);
}

TEST_CASE("rough Bergomi diamonds against the quadratures") {
  const RBParams p{1.5, 0.1, -0.9};
  const double T = 0.25;
  SimConfig cfg = small(20000, 128);
  const auto est = stream_rough_bergomi(cfg, p, desk_curve(), T,
                                        {{Process::X, Process::X}, {Process::X, Process::M},
                                         {Process::M, Process::M}, {Process::X, Process::XdmM}});
  CHECK(within(est[0], desk_curve().integral(0.0, T)));
  CHECK(within(est[1], x_diamond_m(desk_curve(), p, 0.0, T)));
  CHECK(within(est[2], m_diamond_m(desk_curve(), p, 0.0, T)));
  CHECK(within(est[3], x_x_m(desk_curve(), p, 0.0, T)));
}

TEST_CASE("configuration errors") {
  SimConfig odd = small(101, 8);
  CHECK_THROWS_AS(simulate_rough_heston(odd, desk, desk_curve(), 0.5), std::invalid_argument);
  SimConfig xdm = small(100, 8);
  xdm.processes = {Process::X, Process::XdmM};
  CHECK_THROWS_AS(simulate_rough_heston(xdm, desk, desk_curve(), 0.5), std::invalid_argument);
  SimConfig zeta = small(100, 8);
  zeta.processes = {Process::X, Process::Zeta};
  CHECK_THROWS_AS(simulate_rough_bergomi(zeta, {1.5, 0.1, -0.9}, desk_curve(), 0.5), std::invalid_argument);
  CHECK_THROWS_AS(simulate_rough_bergomi(small(100, 2048), {1.5, 0.1, -0.9}, desk_curve(), 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(simulate_rough_heston(small(100, 8), desk, ForwardCurve({0.1}, {0.04}), 0.5), std::out_of_range);
  const PathBundle b = simulate_rough_heston(small(100, 8), desk, desk_curve(), 0.5);
  CHECK_THROWS_AS(estimate_diamond(b, Process::X, Process::Zeta), std::invalid_argument);
}
