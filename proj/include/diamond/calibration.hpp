#pragma once

#include <optional>
#include <string>
#include <vector>

#include "diamond/curve.hpp"

namespace diamonds {

struct LeveragePoint {
  double T;
  double leverage;
  double weight;
};

/// Market leverage-swap quotes, maturities strictly increasing.
struct LeverageTermStructure {
  std::vector<LeveragePoint> points;

  void validate() const;
  /// Reads a `T_years,leverage[,weight]` CSV file; missing weights default to 1/T.
  static LeverageTermStructure from_csv(const std::string& path);
};

struct FitResult {
  double rho_nu = 0.0;
  double H = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  /// False when the fitted leverage is so small that H has no influence on it.
  bool h_identified = true;
};

/// Leverage swaps of the lambda = 0 rough Heston model with alpha = H + 1/2;
/// depends on rho and nu only through their product.
std::vector<double> model_leverage_curve(double rho_nu, double H, const ForwardCurve& curve,
                                         const std::vector<double>& maturities);

/// sum_i w_i (L_model(T_i; rho nu, H) - L_i)^2.
double leverage_objective(const LeverageTermStructure& ts, const ForwardCurve& curve, double rho,
                          double nu, double H);

struct FitOptions {
  double tolerance = 1e-8;
  int max_iterations = 5000;
};

/// Weighted least squares in (rho nu, H) by Nelder-Mead from the four starts
/// rho nu in {-0.1, -0.5} x H in {0.08, 0.3}, plus init when given. The best
/// converged start wins; if none converges the best candidate is returned with
/// converged = false.
FitResult fit_leverage(const LeverageTermStructure& ts, const ForwardCurve& curve,
                       std::optional<std::pair<double, double>> init = std::nullopt,
                       const FitOptions& opt = {});

}  // namespace diamonds
