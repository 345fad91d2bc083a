#include "diamond/smile.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/math/tools/roots.hpp>

#include "diamond/afv.hpp"
#include "diamond/csv.hpp"
#include "diamond/forest.hpp"
#include "diamond/quadrature.hpp"

namespace diamonds {

namespace {

using cd = std::complex<double>;

constexpr int kMaxNodes = 40000;
constexpr int kRefine = 8;
constexpr double kTailLimit = 1e-4;

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

void SmileSlice::validate() const {
  if (!(T > 0.0)) throw std::invalid_argument("SmileSlice: T must be positive");
  if (points.size() < 2) throw std::invalid_argument("SmileSlice: need at least two strikes");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].sigma_bs > 0.0) || !std::isfinite(points[i].sigma_bs))
      throw std::invalid_argument("SmileSlice: implied vols must be positive");
    if (i > 0 && !(points[i].k > points[i - 1].k))
      throw std::invalid_argument("SmileSlice: log-strikes must be strictly increasing");
  }
}

SmileSlice SmileSlice::from_csv(const std::string& path, double T) {
  const CsvTable table = read_csv(path);
  const auto& k = table.column("k");
  const auto& s = table.column("sigma_bs");
  SmileSlice slice;
  slice.T = T;
  for (std::size_t i = 0; i < k.size(); ++i) slice.points.push_back({k[i], s[i]});
  slice.validate();
  return slice;
}

// ------------------------------------------------------------------ Fourier

FourierSmile::FourierSmile(CharFn phi, double T, double sigma_proxy, FourierOptions opt)
    : phi_(std::move(phi)), T_(T), proxy_(sigma_proxy), opt_(opt) {
  if (!(T > 0.0)) throw std::invalid_argument("FourierSmile: T must be positive");
  if (opt_.min_nodes < 1 || opt_.panel_nodes < 2 || !(opt_.cutoff > 0.0))
    throw std::invalid_argument("FourierSmile: invalid options");
  if (!(proxy_ > 0.0)) {
    // -2 E[X_T] from the first cumulant of phi.
    const double h = 1e-3;
    const cd lp = std::log(phi_(h)), lm = std::log(phi_(-h));
    proxy_ = -2.0 * (lp - lm).imag() / (2.0 * h);
    if (!(proxy_ > 0.0) || !std::isfinite(proxy_))
      throw std::runtime_error("FourierSmile: could not estimate the variance proxy from the cf");
  }
  const double u0 = std::sqrt(2.0 * std::log(1.0 / opt_.cutoff) / proxy_);
  const int panels = (opt_.min_nodes + opt_.panel_nodes - 1) / opt_.panel_nodes;
  width_ = u0 / panels;
  while (end_ < u0 || static_cast<int>(u_.size()) < opt_.min_nodes) add_panel();
  // The model term may decay more slowly than the Black-Scholes envelope.
  while (true) {
    const double u = u_.back();
    if (std::abs(phi_u_.back()) / (u * u + 0.25) <= opt_.cutoff) break;
    if (static_cast<int>(u_.size()) >= kMaxNodes)
      throw std::runtime_error("FourierSmile: characteristic function decays too slowly");
    add_panel();
  }
}

// Panels start at width 1/2 and are never wider than their distance from the
// origin, which keeps the poles of 1 / (u^2 + 1/4) at +-i/2 far outside each
// panel's convergence ellipse; the width is capped by the base width.
void FourierSmile::add_panel() {
  const double a = end_;
  const double w = std::min(width_, std::max(0.5, a));
  const GaussRule& r = gauss_legendre(opt_.panel_nodes);
  for (int i = 0; i < opt_.panel_nodes; ++i) {
    const double u = a + 0.5 * w * (r.nodes[i] + 1.0);
    const cd v = phi_(cd{u, -0.5});
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw std::runtime_error("FourierSmile: characteristic function evaluation failed at u = " +
                               std::to_string(u));
    u_.push_back(u);
    w_.push_back(0.5 * w * r.weights[i] / (u * u + 0.25));
    phi_u_.push_back(v);
  }
  end_ = a + w;
}

double FourierSmile::model_integral(double k) const {
  double s = 0.0;
  for (std::size_t i = 0; i < u_.size(); ++i) s += w_[i] * (std::exp(cd{0.0, -u_[i] * k}) * phi_u_[i]).real();
  return s;
}

// Black-Scholes part of the integral in closed form:
// int_0^inf cos(uk) e^{-(u^2 + 1/4) Sigma / 2} / (u^2 + 1/4) du = pi e^{-k/2} (1 - C_BS(k, Sigma)).
double FourierSmile::bs_integral(double k, double sigma) {
  const double otm = bs_otm_price(k, sigma);
  const double one_minus_call = k >= 0.0 ? 1.0 - otm : std::exp(k) - otm;
  return std::numbers::pi * std::exp(-0.5 * k) * one_minus_call;
}

double FourierSmile::total_variance(double k) {
  if (!std::isfinite(k)) throw std::invalid_argument("FourierSmile: k must be finite");
  const double m = model_integral(k);
  auto f = [&](double s) { return m - bs_integral(k, s); };
  const double lo = 1e-8;
  double hi = 4.0 * proxy_;
  const double flo = f(lo);
  double fhi = f(hi);
  for (int grow = 0; grow < 4 && fhi * flo > 0.0; ++grow) {
    hi *= 4.0;
    fhi = f(hi);
  }
  if (fhi * flo > 0.0) {
    std::ostringstream msg;
    msg << "FourierSmile: no sign change for k = " << k << " on [" << lo << ", " << hi << "], residuals "
        << flo << ", " << fhi << " (" << u_.size() << " nodes, u_max " << u_.back() << ")";
    throw std::runtime_error(msg.str());
  }
  if (flo == 0.0) return lo;
  boost::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(
      f, lo, hi, flo, fhi,
      [](double a, double b) { return std::abs(b - a) <= 1e-12 * std::max(a, b) || std::abs(b - a) <= 1e-16; },
      iters);
  return 0.5 * (r.first + r.second);
}

double implied_total_variance(const CharFn& phi, double k, double T, double sigma_proxy) {
  FourierSmile smile(phi, T, sigma_proxy);
  return smile.total_variance(k);
}

CharFn rough_heston_cf(const RHParams& params, const ForwardCurve& curve, double T, int n) {
  const KernelSpec kernel = params.kernel();
  const double rho = params.rho;
  // Large |a| needs a finer grid for the implicit steps to contract; refine
  // up to 8x before giving up.
  return [kernel, rho, curve, T, n](cd a) {
    for (int m = n;; m *= 2) {
      try {
        return cf_log_price(a, kernel, rho, curve, T, m);
      } catch (const std::runtime_error&) {
        if (m >= 8 * n) throw;
      }
    }
  };
}

CharFn black_scholes_cf(double sigma, double T) {
  const double s2t = sigma * sigma * T;
  return [s2t](cd a) { return std::exp(-0.5 * a * (a + cd{0.0, 1.0}) * s2t); };
}

// ---------------------------------------------------------------- expansion

double bg_a1(const TreeInputs& in, double k) { return (k / in.M + 0.5) * in.XdM; }

double bg_a2(const TreeInputs& in, double k) {
  const double M = in.M, M2 = M * M, k2 = k * k;
  return 0.25 * in.XdM * in.XdM * (-5.0 * k2 / (M2 * M) - 2.0 * k / M2 + 3.0 / M2 + 0.25 / M) +
         0.25 * in.MdM * (k2 / M2 - 1.0 / M - 0.25) +
         in.XXdM * (k2 / M2 + k / M - 1.0 / M + 0.25);
}

double bg_expansion(const TreeInputs& in, double k) {
  if (!(in.M > 0.0)) throw std::invalid_argument("bg_expansion: M must be positive");
  return in.M + bg_a1(in, k) + bg_a2(in, k);
}

TreeInputs rough_heston_tree_inputs(const RHParams& params, const ForwardCurve& curve, double T, int n) {
  const KernelSpec kernel = params.kernel();
  TreeInputs in;
  in.M = curve.integral(0.0, T);
  const DiamondTree xm = diamond(leaf_x(), leaf_m());
  in.XdM = tree_value(xm, kernel, params.rho, curve, 0.0, T, n);
  in.MdM = tree_value(diamond(leaf_m(), leaf_m()), kernel, params.rho, curve, 0.0, T, n);
  in.XXdM = tree_value(diamond(leaf_x(), xm), kernel, params.rho, curve, 0.0, T, n);
  return in;
}

TreeInputs rough_bergomi_tree_inputs(const RBParams& params, const ForwardCurve& curve, double T,
                                     const RBQuadrature& q) {
  TreeInputs in;
  in.M = curve.integral(0.0, T);
  in.XdM = x_diamond_m(curve, params, 0.0, T, q);
  in.MdM = m_diamond_m(curve, params, 0.0, T, q);
  in.XXdM = x_x_m(curve, params, 0.0, T, q);
  return in;
}

// -------------------------------------------------------------- replication

double bs_otm_price(double k, double total_variance) {
  if (!(total_variance > 0.0)) return 0.0;
  const double sd = std::sqrt(total_variance);
  const double d1 = -k / sd + 0.5 * sd, d2 = d1 - sd;
  if (k >= 0.0) return std::max(0.0, norm_cdf(d1) - std::exp(k) * norm_cdf(d2));
  return std::max(0.0, std::exp(k) * norm_cdf(-d2) - norm_cdf(-d1));
}

namespace {

// Trapezoid of OTM(k) * weight(k) over the quotes (each interval refined with
// linearly interpolated vols) and over flat-vol wings until the integrand
// vanishes. Throws when the wings carry more than kTailLimit of the total.
template <class Weight>
double strip(const SmileSlice& slice, Weight weight) {
  slice.validate();
  const double T = slice.T;
  auto f = [&](double k, double sigma) { return bs_otm_price(k, sigma * sigma * T) * weight(k); };
  const auto& pts = slice.points;
  double body = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double h = (pts[i + 1].k - pts[i].k) / kRefine;
    for (int r = 0; r < kRefine; ++r) {
      const double a = pts[i].k + r * h, b = a + h;
      const double sa = pts[i].sigma_bs + (pts[i + 1].sigma_bs - pts[i].sigma_bs) * r / kRefine;
      const double sb = pts[i].sigma_bs + (pts[i + 1].sigma_bs - pts[i].sigma_bs) * (r + 1) / kRefine;
      body += 0.5 * h * (f(a, sa) + f(b, sb));
    }
  }
  auto wing = [&](double k0, double sigma, double dir) {
    const double h = std::max(1e-3, 0.25 * sigma * std::sqrt(T)) / kRefine;
    double s = 0.0, prev = f(k0, sigma);
    for (int i = 1; i < 1000000; ++i) {
      const double cur = f(k0 + dir * i * h, sigma);
      s += 0.5 * h * (prev + cur);
      if (cur < 1e-18 * std::max(1.0, std::abs(body)) && i > 4) break;
      prev = cur;
    }
    return s;
  };
  const double tails = wing(pts.front().k, pts.front().sigma_bs, -1.0) + wing(pts.back().k, pts.back().sigma_bs, 1.0);
  const double total = body + tails;
  if (std::abs(tails) > kTailLimit * std::abs(total)) {
    std::ostringstream msg;
    msg << "smile replication: insufficient strike coverage (wing share " << std::abs(tails / total)
        << " exceeds " << kTailLimit << ")";
    throw std::runtime_error(msg.str());
  }
  return total;
}

}  // namespace

double varswap_from_smile(const SmileSlice& slice) {
  return 2.0 * strip(slice, [](double k) { return std::exp(-k); });
}

double gammaswap_from_smile(const SmileSlice& slice) {
  return 2.0 * strip(slice, [](double) { return 1.0; });
}

double leverage_from_smile(const SmileSlice& slice) {
  return gammaswap_from_smile(slice) - varswap_from_smile(slice);
}

SmileSlice fourier_slice(FourierSmile& smile, double T, const std::vector<double>& ks) {
  SmileSlice slice;
  slice.T = T;
  for (double k : ks) slice.points.push_back({k, std::sqrt(smile.total_variance(k) / T)});
  slice.validate();
  return slice;
}

}  // namespace diamonds
