#include "diamond/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "diamond/csv.hpp"

namespace diamonds {

ForwardCurve::ForwardCurve(std::vector<double> maturities, std::vector<double> xi,
                           Interpolation interp)
    : u_(std::move(maturities)), xi_(std::move(xi)), interp_(interp) {
  if (u_.empty() || u_.size() != xi_.size())
    throw std::invalid_argument("ForwardCurve: need matching, non-empty knot vectors");
  for (std::size_t i = 0; i < u_.size(); ++i) {
    if (!(xi_[i] > 0.0)) throw std::invalid_argument("ForwardCurve: xi must be positive");
    if (!(u_[i] > 0.0)) throw std::invalid_argument("ForwardCurve: maturities must be positive");
    if (i > 0 && !(u_[i] > u_[i - 1]))
      throw std::invalid_argument("ForwardCurve: maturities must be strictly increasing");
  }
}

ForwardCurve ForwardCurve::flat(double xi0) {
  return ForwardCurve({std::numeric_limits<double>::infinity()}, {xi0});
}

ForwardCurve ForwardCurve::from_csv(const std::string& path, Interpolation interp) {
  const CsvTable table = read_csv(path);
  const auto& u = table.column("maturity_years");
  const auto& xi = table.column("xi");
  return ForwardCurve(u, xi, interp);
}

void ForwardCurve::check_cover(double u) const {
  if (u < 0.0 || u > u_.back() * (1.0 + 1e-12))
    throw std::out_of_range("ForwardCurve: maturity outside the curve coverage");
}

double ForwardCurve::operator()(double u) const {
  check_cover(u);
  const auto it = std::lower_bound(u_.begin(), u_.end(), u);
  const std::size_t i = std::min<std::size_t>(it - u_.begin(), u_.size() - 1);
  if (interp_ == Interpolation::flat_forward || i == 0) return xi_[i];
  if (u <= u_[0]) return xi_[0];
  const double w = (u - u_[i - 1]) / (u_[i] - u_[i - 1]);
  return xi_[i - 1] + w * (xi_[i] - xi_[i - 1]);
}

std::vector<double> ForwardCurve::breakpoints(double a, double b) const {
  std::vector<double> out;
  for (double u : u_)
    if (u > a && u < b) out.push_back(u);
  return out;
}

double ForwardCurve::integral(double a, double b) const {
  if (b < a) return -integral(b, a);
  check_cover(a);
  check_cover(b);
  std::vector<double> pts{a};
  for (double u : breakpoints(a, b)) pts.push_back(u);
  pts.push_back(b);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double lo = pts[i], hi = pts[i + 1];
    const double mid = 0.5 * (lo + hi);
    if (interp_ == Interpolation::flat_forward) {
      sum += (*this)(mid) * (hi - lo);
    } else {
      sum += 0.5 * ((*this)(lo) + (*this)(hi)) * (hi - lo);
    }
  }
  return sum;
}

}  // namespace diamonds
