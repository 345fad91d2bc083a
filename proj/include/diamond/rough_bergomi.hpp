#pragma once

#include <vector>

#include "diamond/curve.hpp"

namespace diamonds {

/// Rough Bergomi parameters. The forward variance follows
/// d xi_t(u) / xi_t(u) = eta_tilde dW_t / (u - t)^gamma with gamma = 1/2 - H.
struct RBParams {
  double eta = 0.0;
  double H = 0.1;
  double rho = 0.0;

  double gamma() const { return 0.5 - H; }
  double eta_tilde() const;
  void validate() const;
};

/// Node counts per axis for the nested quadratures. The outer axis is the
/// first integration variable s; the inner axes follow the formula order.
struct RBQuadrature {
  int outer = 32;
  int middle = 32;
  int inner = 24;
};

struct XiPoint {
  double u;
  double alpha;
};

/// E_t[prod_i xi_s(u_i)^alpha_i] for s >= t and points ordered by strictly
/// increasing u with u_1 >= s. Throws std::invalid_argument on ordering errors.
double xi_product_expectation(const ForwardCurve& curve, const RBParams& params, double t, double s,
                              const std::vector<XiPoint>& points);

/// eta^2 F(s - t, r - t, u - t): the exponent weighting the X⋄(X⋄M)
/// integrands, for 0 < s - t <= r - t <= u - t.
double f_exponent(const RBParams& params, double s_t, double r_t, double u_t);

/// (X⋄M)_t(T).
double x_diamond_m(const ForwardCurve& curve, const RBParams& params, double t, double T,
                   const RBQuadrature& q = {});

/// (M⋄M)_t(T) = Var_t[M_T] from the double-integral form.
double m_diamond_m(const ForwardCurve& curve, const RBParams& params, double t, double T,
                   const RBQuadrature& q = {});

/// (M⋄M)_t(T) from the raw triple integral over the quadratic variation of M.
double m_diamond_m_raw(const ForwardCurve& curve, const RBParams& params, double t, double T,
                       const RBQuadrature& q = {});

/// The two triple integrals entering X⋄(X⋄M) = (rho eta_tilde)^2 (I/2 + J).
struct XXMParts {
  double I = 0.0;
  double J = 0.0;
  double value = 0.0;
};
XXMParts x_x_m_parts(const ForwardCurve& curve, const RBParams& params, double t, double T,
                     const RBQuadrature& q = {});

/// (X⋄(X⋄M))_t(T).
double x_x_m(const ForwardCurve& curve, const RBParams& params, double t, double T,
             const RBQuadrature& q = {});

/// Grading exponent used for the endpoint substitutions: makes both the
/// (u - s)^-gamma weight and the (u - s)^(2H) roughness polynomial when H = 0.1.
double rb_grading_power(double H);

}  // namespace diamonds
