#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "diamond/curve.hpp"
#include "diamond/rough_bergomi.hpp"
#include "diamond/rough_heston.hpp"

namespace diamonds {

/// phi(a) = E[exp(i a X_T)] with X_T = log(S_T / F), evaluated at complex a.
using CharFn = std::function<std::complex<double>(std::complex<double>)>;

struct SmilePoint {
  double k;
  double sigma_bs;
};

/// Implied volatilities of one expiry, k = log(K / F) strictly increasing.
struct SmileSlice {
  double T = 0.0;
  std::vector<SmilePoint> points;

  void validate() const;
  /// Reads a `k,sigma_bs` CSV file.
  static SmileSlice from_csv(const std::string& path, double T);
};

/// Tree values feeding the second-order smile expansion.
struct TreeInputs {
  double M = 0.0;
  double XdM = 0.0;
  double MdM = 0.0;
  double XXdM = 0.0;
};

struct FourierOptions {
  int min_nodes = 200;
  int panel_nodes = 16;
  /// Integrand magnitude below which the u-integral is truncated.
  double cutoff = 1e-12;
};

/// Solves
///   int_0^inf du / (u^2 + 1/4) Re[e^{-iuk} (phi(u - i/2) - e^{-(u^2 + 1/4) Sigma / 2})] = 0
/// for the implied total variance Sigma(k). The phi term is integrated by
/// composite Gauss-Legendre up to the point where it falls below the cutoff
/// (at least the Black-Scholes envelope of the variance proxy); the
/// Black-Scholes term is integrated in closed form. Values of phi on the
/// nodes are cached, so one instance serves a whole expiry.
class FourierSmile {
 public:
  /// sigma_proxy <= 0 estimates the variance swap -2 E[X_T] from phi.
  FourierSmile(CharFn phi, double T, double sigma_proxy = 0.0, FourierOptions opt = {});

  double total_variance(double k);
  double implied_vol(double k) { return std::sqrt(total_variance(k) / T_); }
  double proxy() const { return proxy_; }
  std::size_t node_count() const { return u_.size(); }

 private:
  void add_panel();
  double model_integral(double k) const;
  static double bs_integral(double k, double sigma);

  CharFn phi_;
  double T_;
  double proxy_;
  FourierOptions opt_;
  double width_ = 0.0;
  double end_ = 0.0;
  std::vector<double> u_, w_;
  std::vector<std::complex<double>> phi_u_;
};

double implied_total_variance(const CharFn& phi, double k, double T, double sigma_proxy = 0.0);

/// Characteristic function of the rough Heston log-price from the Riccati solver.
CharFn rough_heston_cf(const RHParams& params, const ForwardCurve& curve, double T, int n = 512);

/// Black-Scholes characteristic function with total variance sigma2 T.
CharFn black_scholes_cf(double sigma, double T);

/// Sigma(k) ~ M + a1(k) + a2(k).
double bg_expansion(const TreeInputs& in, double k);
double bg_a1(const TreeInputs& in, double k);
double bg_a2(const TreeInputs& in, double k);

TreeInputs rough_heston_tree_inputs(const RHParams& params, const ForwardCurve& curve, double T,
                                    int n = 512);
TreeInputs rough_bergomi_tree_inputs(const RBParams& params, const ForwardCurve& curve, double T,
                                     const RBQuadrature& q = {});

/// Undiscounted forward-normalized Black-Scholes out-of-the-money price.
double bs_otm_price(double k, double total_variance);

/// Replicated total variance -2 E[X_T] from the log-strip.
double varswap_from_smile(const SmileSlice& slice);
/// Replicated gamma swap 2 E[X_T e^{X_T}] from the entropy strip.
double gammaswap_from_smile(const SmileSlice& slice);
/// Gamma swap minus variance swap.
double leverage_from_smile(const SmileSlice& slice);

/// Smile slice with implied vols from a FourierSmile on the given strikes.
SmileSlice fourier_slice(FourierSmile& smile, double T, const std::vector<double>& ks);

}  // namespace diamonds
