#pragma once

#include <string>
#include <vector>

namespace diamonds {

enum class Interpolation { flat_forward, linear };

/// Forward variance curve u -> xi(u). With flat_forward interpolation knot i
/// carries the value on (u_{i-1}, u_i]; with linear interpolation values are
/// interpolated between knots and held flat before the first knot. The curve
/// is defined on [0, u_last]; queries beyond that throw std::out_of_range.
class ForwardCurve {
 public:
  ForwardCurve(std::vector<double> maturities, std::vector<double> xi,
               Interpolation interp = Interpolation::flat_forward);

  /// Flat curve covering all of [0, inf).
  static ForwardCurve flat(double xi0);
  /// Reads a `maturity_years,xi` CSV file.
  static ForwardCurve from_csv(const std::string& path,
                               Interpolation interp = Interpolation::flat_forward);

  double operator()(double u) const;
  /// Exact integral of xi over [a, b].
  double integral(double a, double b) const;
  /// Knot locations strictly inside (a, b), ascending.
  std::vector<double> breakpoints(double a, double b) const;
  double end() const { return u_.back(); }
  bool is_flat() const { return u_.size() == 1; }

  const std::vector<double>& maturities() const { return u_; }
  const std::vector<double>& values() const { return xi_; }
  Interpolation interpolation() const { return interp_; }

 private:
  void check_cover(double u) const;
  std::vector<double> u_;
  std::vector<double> xi_;
  Interpolation interp_;
};

}  // namespace diamonds
