#include "diamond/rough_bergomi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "diamond/parallel.hpp"
#include "diamond/quadrature.hpp"
#include "diamond/specfun.hpp"

namespace diamonds {

double RBParams::eta_tilde() const { return eta * std::sqrt(2.0 * H); }

void RBParams::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("rough Bergomi: eta must be positive");
  if (!(H > 0.0 && H < 0.5)) throw std::invalid_argument("rough Bergomi: H must lie in (0, 1/2)");
  if (!(rho >= -1.0 && rho <= 1.0)) throw std::invalid_argument("rough Bergomi: rho must lie in [-1, 1]");
}

double rb_grading_power(double H) {
  const double gamma = 0.5 - H;
  return std::clamp(1.0 / (2.0 * H), 1.0 / (1.0 - gamma), 12.0);
}

namespace {

// Quadrature nodes on [a, a + len] split at curve knots. `gap` = x - a and
// `rem` = a + len - x are kept exact near the graded endpoints, so singular
// weights and nested axes never see a cancelled difference.
struct Axis {
  std::vector<double> x, w, gap, rem;
};

void add_piece(Axis& ax, double a, double len, double o_lo, double o_hi, int n, double q,
               int grade) {
  const GaussRule& rule = gauss_legendre(n);
  const double width = o_hi - o_lo;
  for (int i = 0; i < n; ++i) {
    const double s = 0.5 * (rule.nodes[i] + 1.0);
    const double off = width * std::pow(s, grade == 0 ? 1.0 : q);
    const double w = 0.5 * rule.weights[i] * width * (grade == 0 ? 1.0 : q * std::pow(s, q - 1.0));
    const double o = grade > 0 ? o_hi - off : o_lo + off;
    ax.x.push_back(a + o);
    ax.w.push_back(w);
    ax.gap.push_back(grade < 0 && o_lo == 0.0 ? off : o);
    ax.rem.push_back(grade > 0 && o_hi == len ? off : len - o);
  }
}

Axis make_axis(const ForwardCurve& curve, double a, double len, int n, double q_lo, double q_hi) {
  std::vector<double> pts{0.0};
  for (double k : curve.breakpoints(a, a + len)) pts.push_back(k - a);
  pts.push_back(len);
  if (pts.size() == 2 && q_lo > 1.0 && q_hi > 1.0) pts.insert(pts.begin() + 1, 0.5 * len);
  Axis ax;
  const std::size_t pieces = pts.size() - 1;
  for (std::size_t p = 0; p < pieces; ++p) {
    const bool first = p == 0, last = p + 1 == pieces;
    const int grade = first && q_lo > 1.0 ? -1 : (last && q_hi > 1.0 ? 1 : 0);
    add_piece(ax, a, len, pts[p], pts[p + 1], n, grade < 0 ? q_lo : q_hi, grade);
  }
  return ax;
}

double ordered_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

void check_horizon(const ForwardCurve& curve, double t, double T) {
  if (!(T > t) || t < 0.0) throw std::invalid_argument("rough Bergomi: need 0 <= t < T");
  if (T > curve.end() * (1.0 + 1e-12))
    throw std::out_of_range("rough Bergomi: horizon beyond the forward curve");
}

// Ratios built from rounded gaps can undershoot the domain by an ulp.
double g_ratio(double y, double x, double gamma) {
  x = std::max(x, 1.0);
  return g_gamma(std::max(y, x), x, gamma);
}

struct Consts {
  double eta2, H2, gamma, q;
};

Consts consts(const RBParams& p) {
  return {p.eta * p.eta, 2.0 * p.H, p.gamma(), rb_grading_power(p.H)};
}

// eta^2 F with the gaps s - t, r - s, u - r supplied directly.
double f_exp_gaps(const Consts& c, double st, double rs, double ur, double g_rs) {
  const double rt = st + rs, ut = rt + ur, us = rs + ur;
  const double sp = std::pow(st, c.H2);
  const double g_us = g_ratio(ut / st, 1.0, c.gamma);
  const double g_pair = g_ratio(ut / st, rt / st, c.gamma);
  const double g_inner = g_ratio(us / rs, 1.0, c.gamma);
  return c.eta2 * sp * (0.25 * g_rs + 0.5 * g_us + 0.5 * g_pair) +
         0.5 * c.eta2 * std::pow(rs, c.H2) * g_inner -
         0.125 * c.eta2 * (sp + std::pow(rt, c.H2));
}

}  // namespace

double xi_product_expectation(const ForwardCurve& curve, const RBParams& params, double t, double s,
                              const std::vector<XiPoint>& points) {
  params.validate();
  if (!(s >= t)) throw std::invalid_argument("xi_product_expectation: need s >= t");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i == 0 ? !(points[i].u >= s) : !(points[i].u > points[i - 1].u))
      throw std::invalid_argument("xi_product_expectation: points must satisfy s <= u_1 < u_2 < ...");
  }
  const Consts c = consts(params);
  double log_value = 0.0;
  for (const auto& p : points) log_value += p.alpha * std::log(curve(p.u));
  if (s == t) return std::exp(log_value);
  const double st = s - t;
  const double sp = std::pow(st, c.H2);
  double pair = 0.0, single = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& pi = points[i];
    single += pi.alpha * (pi.alpha - 1.0) *
              (std::pow(pi.u - t, c.H2) - std::pow(pi.u - s, c.H2));
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const auto& pj = points[j];
      pair += pi.alpha * pj.alpha * g_ratio((pj.u - t) / st, (pi.u - t) / st, c.gamma);
    }
  }
  return std::exp(log_value + c.eta2 * sp * pair + 0.5 * c.eta2 * single);
}

double f_exponent(const RBParams& params, double s_t, double r_t, double u_t) {
  params.validate();
  if (!(s_t > 0.0 && r_t > s_t && u_t > r_t))
    throw std::invalid_argument("f_exponent: need 0 < s - t < r - t < u - t");
  const Consts c = consts(params);
  return f_exp_gaps(c, s_t, r_t - s_t, u_t - r_t, g_ratio(r_t / s_t, 1.0, c.gamma));
}

double x_diamond_m(const ForwardCurve& curve, const RBParams& params, double t, double T,
                   const RBQuadrature& q) {
  params.validate();
  check_horizon(curve, t, T);
  if (params.rho == 0.0) return 0.0;
  const Consts c = consts(params);
  const Axis S = make_axis(curve, t, T - t, q.outer, c.q, c.q);
  std::vector<double> part(S.x.size());
  parallel_for(S.x.size(), [&](std::size_t i) {
    const double s = S.x[i], st = S.gap[i];
    const double sp = std::pow(st, c.H2);
    const Axis U = make_axis(curve, s, S.rem[i], q.middle, c.q, 1.0);
    double inner = 0.0;
    for (std::size_t k = 0; k < U.x.size(); ++k) {
      const double us = U.gap[k];
      const double e = 0.5 * c.eta2 * sp * (g_ratio((st + us) / st, 1.0, c.gamma) - 0.25);
      inner += U.w[k] * std::pow(us, -c.gamma) * curve(U.x[k]) * std::exp(e);
    }
    part[i] = S.w[i] * std::sqrt(curve(s)) * inner;
  });
  return params.rho * params.eta_tilde() * ordered_sum(part);
}

double m_diamond_m(const ForwardCurve& curve, const RBParams& params, double t, double T,
                   const RBQuadrature& q) {
  params.validate();
  check_horizon(curve, t, T);
  const Consts c = consts(params);
  const Axis U = make_axis(curve, t, T - t, q.outer, c.q, 1.0);
  std::vector<double> part(U.x.size());
  parallel_for(U.x.size(), [&](std::size_t k) {
    const double u = U.x[k], ut = U.gap[k];
    const Axis R = make_axis(curve, t, ut, q.middle, c.q, c.q);
    double inner = 0.0;
    for (std::size_t j = 0; j < R.x.size(); ++j) {
      const double rt = R.gap[j];
      const double e = c.eta2 * std::pow(rt, c.H2) * g_ratio(ut / rt, 1.0, c.gamma);
      inner += R.w[j] * curve(R.x[j]) * std::expm1(e);
    }
    part[k] = U.w[k] * curve(u) * inner;
  });
  return 2.0 * ordered_sum(part);
}

double m_diamond_m_raw(const ForwardCurve& curve, const RBParams& params, double t, double T,
                       const RBQuadrature& q) {
  params.validate();
  check_horizon(curve, t, T);
  const Consts c = consts(params);
  const Axis S = make_axis(curve, t, T - t, q.outer, c.q, c.q);
  std::vector<double> part(S.x.size());
  parallel_for(S.x.size(), [&](std::size_t i) {
    const double s = S.x[i], st = S.gap[i];
    const double sp = std::pow(st, c.H2);
    const Axis R = make_axis(curve, s, S.rem[i], q.middle, c.q, 1.0);
    double mid = 0.0;
    for (std::size_t j = 0; j < R.x.size(); ++j) {
      const double r = R.x[j], rs = R.gap[j];
      const Axis U = make_axis(curve, r, R.rem[j], q.inner, c.q, 1.0);
      double inner = 0.0;
      for (std::size_t k = 0; k < U.x.size(); ++k) {
        const double us = rs + U.gap[k];
        const double e = c.eta2 * sp * g_ratio((st + us) / st, (st + rs) / st, c.gamma);
        inner += U.w[k] * curve(U.x[k]) * std::pow(us, -c.gamma) * std::exp(e);
      }
      mid += R.w[j] * curve(r) * std::pow(rs, -c.gamma) * inner;
    }
    part[i] = S.w[i] * mid;
  });
  const double et = params.eta_tilde();
  return 2.0 * et * et * ordered_sum(part);
}

XXMParts x_x_m_parts(const ForwardCurve& curve, const RBParams& params, double t, double T,
                     const RBQuadrature& q) {
  params.validate();
  check_horizon(curve, t, T);
  const Consts c = consts(params);
  const Axis S = make_axis(curve, t, T - t, q.outer, c.q, c.q);
  std::vector<double> part_i(S.x.size()), part_j(S.x.size());
  parallel_for(S.x.size(), [&](std::size_t i) {
    const double s = S.x[i], st = S.gap[i];
    const Axis R = make_axis(curve, s, S.rem[i], q.middle, c.q, c.q);
    double mid_i = 0.0, mid_j = 0.0;
    for (std::size_t j = 0; j < R.x.size(); ++j) {
      const double r = R.x[j], rs = R.gap[j];
      const double g_rs = g_ratio((st + rs) / st, 1.0, c.gamma);
      const Axis U = make_axis(curve, r, R.rem[j], q.inner, c.q, 1.0);
      double in_i = 0.0, in_j = 0.0;
      for (std::size_t k = 0; k < U.x.size(); ++k) {
        const double ur = U.gap[k];
        const double base = U.w[k] * std::pow(ur, -c.gamma) * curve(U.x[k]) *
                            std::exp(f_exp_gaps(c, st, rs, ur, g_rs));
        in_i += base;
        in_j += base * std::pow(rs + ur, -c.gamma);
      }
      const double wr = R.w[j] * std::sqrt(curve(r));
      mid_i += wr * std::pow(rs, -c.gamma) * in_i;
      mid_j += wr * in_j;
    }
    const double ws = S.w[i] * std::sqrt(curve(s));
    part_i[i] = ws * mid_i;
    part_j[i] = ws * mid_j;
  });
  XXMParts out;
  out.I = ordered_sum(part_i);
  out.J = ordered_sum(part_j);
  const double k = params.rho * params.eta_tilde();
  out.value = k * k * (0.5 * out.I + out.J);
  return out;
}

double x_x_m(const ForwardCurve& curve, const RBParams& params, double t, double T,
             const RBQuadrature& q) {
  return x_x_m_parts(curve, params, t, T, q).value;
}

}  // namespace diamonds
