#include "diamond/afv.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include <boost/math/special_functions/beta.hpp>

#include "diamond/quadrature.hpp"

namespace diamonds {

namespace {

constexpr double kPowerTol = 1e-12;

bool is_power_law(const KernelSpec& k) {
  return k.family == KernelFamily::power_law ||
         (k.family == KernelFamily::rough_heston && k.lambda == 0.0);
}

double interp(const Eigen::VectorXd& phi, double step, double tau) {
  const int n = static_cast<int>(phi.size()) - 1;
  double pos = tau / step;
  if (pos <= 0.0) return phi[0];
  if (pos >= n) return phi[n];
  const int j = static_cast<int>(pos);
  const double w = pos - j;
  return (1.0 - w) * phi[j] + w * phi[j + 1];
}

}  // namespace

// ---------------------------------------------------------------------------
// HProfile

HProfile::HProfile(double horizon, int n) : horizon_(horizon), n_(n) {
  if (!(horizon > 0.0)) throw std::invalid_argument("HProfile: horizon must be positive");
  if (n < 16) throw std::invalid_argument("HProfile: grid needs at least 16 steps");
}

HProfile HProfile::constant(double horizon, int n, double value) {
  HProfile h(horizon, n);
  h.add_component(0.0, Eigen::VectorXd::Constant(n + 1, value));
  return h;
}

void HProfile::add_component(double power, Eigen::VectorXd phi) {
  if (phi.size() != n_ + 1) throw std::invalid_argument("HProfile: component size mismatch");
  for (auto& c : comps_) {
    if (std::abs(c.power - power) < kPowerTol) {
      c.phi += phi;
      if (c.phi.cwiseAbs().maxCoeff() == 0.0) {
        comps_.erase(comps_.begin() + (&c - comps_.data()));
      }
      return;
    }
  }
  if (phi.cwiseAbs().maxCoeff() == 0.0) return;
  comps_.push_back({power, std::move(phi)});
}

double HProfile::operator()(double tau) const {
  double sum = 0.0;
  for (const auto& c : comps_) {
    const double base = c.power == 0.0 ? 1.0 : std::pow(tau, c.power);
    sum += base * interp(c.phi, step(), tau);
  }
  return sum;
}

Eigen::VectorXd HProfile::values() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_ + 1);
  for (const auto& c : comps_) {
    for (int i = 0; i <= n_; ++i) {
      const double base = c.power == 0.0 ? 1.0 : std::pow(tau(i), c.power);
      out[i] += base * c.phi[i];
    }
  }
  return out;
}

void HProfile::check_grid(const HProfile& other) const {
  if (other.n_ != n_ || std::abs(other.horizon_ - horizon_) > 1e-14 * horizon_)
    throw std::invalid_argument("HProfile: grids differ");
}

HProfile& HProfile::operator*=(double s) {
  if (s == 0.0) {
    comps_.clear();
    return *this;
  }
  for (auto& c : comps_) c.phi *= s;
  return *this;
}

HProfile& HProfile::operator+=(const HProfile& other) {
  check_grid(other);
  for (const auto& c : other.comps_) add_component(c.power, c.phi);
  return *this;
}

HProfile operator*(const HProfile& x, const HProfile& y) {
  x.check_grid(y);
  HProfile out(x.horizon_, x.n_);
  for (const auto& cx : x.comps_)
    for (const auto& cy : y.comps_) out.add_component(cx.power + cy.power, cx.phi.cwiseProduct(cy.phi));
  return out;
}

// ---------------------------------------------------------------------------
// Convolution

ConvolutionWeights convolution_weights(const KernelSpec& kernel, double step, int n) {
  ConvolutionWeights w;
  w.lo.resize(n);
  w.hi.resize(n);
  if (n == 0) return w;
  const double k1 = kernel.k1(step);
  w.lo[0] = k1 / step;
  w.hi[0] = kernel.k0(step) - k1 / step;
  const GaussRule& rule = gauss_legendre(16);
  for (int m = 1; m < n; ++m) {
    double lo = 0.0, hi = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double s = 0.5 * (rule.nodes[q] + 1.0);  // position inside the cell
      const double k = kernel.kappa((m + s) * step) * 0.5 * rule.weights[q];
      lo += k * s;
      hi += k * (1.0 - s);
    }
    w.lo[m] = lo * step;
    w.hi[m] = hi * step;
  }
  return w;
}

namespace {

// Lower-triangular W with psi = W phi, where
// psi_i = int_0^1 (1-s)^(alpha-1) s^p phi(tau_i s) ds and phi is piecewise linear.
Eigen::MatrixXd build_power_law_weights(double alpha, double p, int n) {
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n + 1, n + 1);
  const double full_beta = boost::math::beta(p + 1.0, alpha);
  W(0, 0) = full_beta;
  const GaussRule& rule = gauss_legendre(8);
  for (int i = 1; i <= n; ++i) {
    const double inv_i = 1.0 / i;
    if (i == 1) {
      const double one_minus = boost::math::beta(p + 1.0, alpha + 1.0);  // int s^p (1-s)^alpha
      W(1, 0) = one_minus;
      W(1, 1) = full_beta - one_minus;
      continue;
    }
    // First cell [0, 1/i]: exact moments of s^p (1-s)^(alpha-1).
    const double m0 = boost::math::beta(p + 1.0, alpha, inv_i);
    const double m1 = boost::math::beta(p + 2.0, alpha, inv_i);
    W(i, 0) += m0 - i * m1;
    W(i, 1) += i * m1;
    // Last cell [(i-1)/i, 1] holds the kernel singularity.
    const double x = (i - 1.0) * inv_i;
    const double c0 = boost::math::betac(p + 1.0, alpha, x);
    const double c1 = i * boost::math::betac(p + 1.0, alpha + 1.0, x);
    W(i, i - 1) += c1;
    W(i, i) += c0 - c1;
    for (int j = 1; j < i - 1; ++j) {
      double lo = 0.0, hi = 0.0;
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double s = 0.5 * (rule.nodes[q] + 1.0);
        const double sigma = (j + s) * inv_i;
        const double w = 0.5 * rule.weights[q] * std::pow(1.0 - sigma, alpha - 1.0) *
                         (p == 0.0 ? 1.0 : std::pow(sigma, p));
        lo += w * (1.0 - s);
        hi += w * s;
      }
      W(i, j) += lo * inv_i;
      W(i, j + 1) += hi * inv_i;
    }
  }
  return W;
}

// Weight matrices depend only on (alpha, p, n) and are reused across trees.
std::shared_ptr<const Eigen::MatrixXd> power_law_weights(double alpha, double p, int n) {
  using Key = std::tuple<double, double, int>;
  static std::mutex mu;
  static std::map<Key, std::shared_ptr<const Eigen::MatrixXd>> cache;
  const Key key{alpha, std::round(p * 1e10) / 1e10, n};
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto W = std::make_shared<const Eigen::MatrixXd>(build_power_law_weights(alpha, p, n));
  std::lock_guard<std::mutex> lock(mu);
  if (cache.size() >= 64) cache.clear();
  cache.emplace(key, W);
  return W;
}

}  // namespace

HProfile kernel_convolve(const KernelSpec& kernel, const HProfile& h) {
  HProfile out(h.horizon(), h.n());
  if (h.is_zero() || kernel.nu == 0.0) return out;
  if (is_power_law(kernel)) {
    const double scale = kernel.nu / std::tgamma(kernel.alpha);
    for (const auto& c : h.components()) {
      const auto W = power_law_weights(kernel.alpha, c.power, h.n());
      Eigen::VectorXd psi = W->triangularView<Eigen::Lower>() * c.phi;
      out.add_component(c.power + kernel.alpha, scale * psi);
    }
    return out;
  }
  const int n = h.n();
  const Eigen::VectorXd g = h.values();
  const ConvolutionWeights w = convolution_weights(kernel, h.step(), n);
  Eigen::VectorXd conv = Eigen::VectorXd::Zero(n + 1);
  for (int i = 1; i <= n; ++i) {
    double sum = 0.0;
    for (int m = 0; m < i; ++m) sum += w.hi[m] * g[i - m] + w.lo[m] * g[i - m - 1];
    conv[i] = sum;
  }
  out.add_component(0.0, std::move(conv));
  return out;
}

HProfile kbar_profile(const KernelSpec& kernel, double horizon, int n) {
  HProfile out(horizon, n);
  if (kernel.delta == 0.0 || kernel.nu == 0.0) return out;
  if (is_power_law(kernel)) {
    out += HProfile::sampled(horizon, n, [&](double tau) { return kernel.k0(tau + kernel.delta); });
    out.add_component(kernel.alpha,
                      Eigen::VectorXd::Constant(n + 1, -kernel.nu / std::tgamma(1.0 + kernel.alpha)));
    return out;
  }
  return HProfile::sampled(horizon, n, [&](double tau) { return kernel.kbar(tau); });
}

// ---------------------------------------------------------------------------
// Tree compilation

TreeCompiler::TreeCompiler(KernelSpec kernel, double rho, double horizon, int n)
    : kernel_(kernel), rho_(rho), horizon_(horizon), n_(n) {
  kernel_.validate();
  if (!(std::abs(rho) <= 1.0)) throw std::invalid_argument("compile: |rho| must not exceed 1");
  if (n < 16) throw std::invalid_argument("compile: grid needs at least 16 steps");
}

TreeCompiler::Loading TreeCompiler::loading(const DiamondTree& t) {
  if (t.is_leaf()) {
    if (t.tag() == Leaf::X) return {Driver::z, HProfile::constant(horizon_, n_, 1.0)};
    if (t.tag() == Leaf::Zeta) return {Driver::w, kbar_profile(kernel_, horizon_, n_)};
  }
  return {Driver::w, kernel_convolve(kernel_, compile(t))};
}

const HProfile& TreeCompiler::compile(const DiamondTree& tree) {
  if (tree.is_leaf() && tree.tag() != Leaf::M)
    throw std::invalid_argument("compile_tree: a single leaf has no tree value");
  const DiamondTree t = expand_m(tree);
  auto it = cache_.find(t);
  if (it != cache_.end()) return it->second;
  const Loading l1 = loading(t.left());
  const Loading l2 = loading(t.right());
  HProfile h = l1.h * l2.h;
  if (l1.driver != l2.driver) h *= rho_;
  return cache_.emplace(t, std::move(h)).first->second;
}

HProfile compile_tree(const DiamondTree& tree, const KernelSpec& kernel, double rho, double horizon,
                      int n) {
  TreeCompiler c(kernel, rho, horizon, n);
  return c.compile(tree);
}

// ---------------------------------------------------------------------------
// Evaluation against the forward curve

namespace {

// int_a^b tau^p (c0 + c1 tau + c2 tau^2) dtau.
template <class Scalar>
Scalar power_poly_integral(double p, double a, double b, Scalar c0, Scalar c1, Scalar c2) {
  auto moment = [&](double q) {
    return (std::pow(b, q) - (a == 0.0 ? 0.0 : std::pow(a, q))) / q;
  };
  if (p == 0.0) {
    const double d = b - a;
    return c0 * d + c1 * (0.5 * (b * b - a * a)) + c2 * ((b * b * b - a * a * a) / 3.0);
  }
  return c0 * moment(p + 1.0) + c1 * moment(p + 2.0) + c2 * moment(p + 3.0);
}

template <class Scalar, class Vec>
Scalar integrate_component(double power, const Vec& phi, const ForwardCurve& curve, double t,
                           double T) {
  const double horizon = T - t;
  const int n = static_cast<int>(phi.size()) - 1;
  const double step = horizon / n;
  // Curve knots map to tau = T - u.
  std::vector<double> cuts;
  for (double u : curve.breakpoints(t, T)) cuts.push_back(T - u);
  std::sort(cuts.begin(), cuts.end());
  const bool linear = curve.interpolation() == Interpolation::linear;

  Scalar total{};
  std::size_t next_cut = 0;
  for (int j = 0; j < n; ++j) {
    const double lo_cell = j * step;
    const double hi_cell = (j + 1) * step;
    // phi on this cell as alpha0 + alpha1 tau.
    const Scalar a1 = (phi[j + 1] - phi[j]) / step;
    const Scalar a0 = phi[j] - a1 * lo_cell;
    double lo = lo_cell;
    while (true) {
      double hi = hi_cell;
      bool at_cut = false;
      while (next_cut < cuts.size() && cuts[next_cut] <= lo) ++next_cut;
      if (next_cut < cuts.size() && cuts[next_cut] < hi_cell) {
        hi = cuts[next_cut];
        at_cut = true;
      }
      double b0, b1;
      if (linear) {
        const double xa = curve(T - lo), xb = curve(T - hi);
        b1 = (xb - xa) / (hi - lo);
        b0 = xa - b1 * lo;
      } else {
        b0 = curve(T - 0.5 * (lo + hi));
        b1 = 0.0;
      }
      total += power_poly_integral<Scalar>(power, lo, hi, a0 * b0, a0 * b1 + a1 * b0, a1 * b1);
      if (!at_cut) break;
      lo = hi;
    }
  }
  return total;
}

void check_span(const ForwardCurve& curve, double t, double T) {
  if (!(T > t)) throw std::invalid_argument("evaluate_profile: requires T > t");
  curve(t);
  curve(T);
}

}  // namespace

double evaluate_profile(const HProfile& h, const ForwardCurve& curve, double t, double T) {
  check_span(curve, t, T);
  if (std::abs(h.horizon() - (T - t)) > 1e-12 * (T - t))
    throw std::invalid_argument("evaluate_profile: profile horizon differs from T - t");
  double sum = 0.0;
  for (const auto& c : h.components()) sum += integrate_component<double>(c.power, c.phi, curve, t, T);
  return sum;
}

std::complex<double> evaluate_profile(const Eigen::VectorXcd& values, const ForwardCurve& curve,
                                      double t, double T) {
  check_span(curve, t, T);
  return integrate_component<std::complex<double>>(0.0, values, curve, t, T);
}

std::complex<double> forest_value(const Forest& forest, std::complex<double> a,
                                  std::complex<double> b, std::complex<double> c,
                                  const KernelSpec& kernel, double rho, const ForwardCurve& curve,
                                  double t, double T, int n) {
  TreeCompiler compiler(kernel, rho, T - t, n);
  std::complex<double> sum{0.0, 0.0};
  for (const auto& term : bind_coefficients(forest, a, b, c)) {
    sum += term.coeff * evaluate_profile(compiler.compile(term.tree), curve, t, T);
  }
  return sum;
}

double tree_value(const DiamondTree& tree, const KernelSpec& kernel, double rho,
                  const ForwardCurve& curve, double t, double T, int n) {
  return evaluate_profile(compile_tree(tree, kernel, rho, T - t, n), curve, t, T);
}

}  // namespace diamonds
