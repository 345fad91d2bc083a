#pragma once

namespace diamonds {

/// Two-parameter Mittag-Leffler function E_{alpha,beta}(z) for real z.
/// Throws std::domain_error unless alpha > 0 and beta > 0.
double mittag_leffler(double alpha, double beta, double z);

/// G_gamma(y, x) = (1 - 2 gamma) * int_0^1 (y - r)^-gamma (x - r)^-gamma dr,
/// evaluated by singularity-free quadrature. Requires y >= x >= 1 and
/// gamma in [0, 1/2).
double g_gamma(double y, double x, double gamma);

/// Same quantity through a Gauss hypergeometric closed form.
double g_gamma_hypergeometric(double y, double x, double gamma);

/// Real Gauss hypergeometric function 2F1(a, b; c; z). For z > 1 the real part
/// of the principal branch is returned. Throws std::runtime_error when the
/// series or transformation chain does not converge.
double gauss_2f1(double a, double b, double c, double z);

/// 1 / Gamma(x), zero at the poles of Gamma.
double rgamma(double x);

}  // namespace diamonds
