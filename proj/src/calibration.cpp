#include "diamond/calibration.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "diamond/csv.hpp"
#include "diamond/parallel.hpp"
#include "diamond/rough_heston.hpp"

namespace diamonds {

void LeverageTermStructure::validate() const {
  if (points.size() < 3) throw std::invalid_argument("leverage term structure: need at least 3 maturities");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!(p.T > 0.0) || !std::isfinite(p.leverage) || !(p.weight > 0.0))
      throw std::invalid_argument("leverage term structure: invalid row " + std::to_string(i));
    if (i > 0 && !(p.T > points[i - 1].T))
      throw std::invalid_argument("leverage term structure: maturities must be strictly increasing");
  }
}

LeverageTermStructure LeverageTermStructure::from_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  const auto& T = table.column("T_years");
  const auto& L = table.column("leverage");
  LeverageTermStructure ts;
  for (std::size_t i = 0; i < T.size(); ++i) {
    const double w = table.has("weight") ? table.column("weight")[i] : 1.0 / T[i];
    ts.points.push_back({T[i], L[i], w});
  }
  ts.validate();
  return ts;
}

std::vector<double> model_leverage_curve(double rho_nu, double H, const ForwardCurve& curve,
                                         const std::vector<double>& maturities) {
  if (!(H > 0.0 && H <= 0.5)) throw std::invalid_argument("model_leverage_curve: H must lie in (0, 1/2]");
  RHParams p;
  p.nu = std::abs(rho_nu);
  p.rho = rho_nu < 0.0 ? -1.0 : 1.0;
  p.alpha = H + 0.5;
  std::vector<double> out(maturities.size());
  parallel_for(maturities.size(), [&](std::size_t i) {
    out[i] = rho_nu == 0.0 ? 0.0 : leverage_swap(p, curve, 0.0, maturities[i]);
  });
  return out;
}

namespace {

double objective_rho_nu(const LeverageTermStructure& ts, const ForwardCurve& curve, double rho_nu, double H) {
  std::vector<double> Ts;
  for (const auto& p : ts.points) Ts.push_back(p.T);
  const std::vector<double> L = model_leverage_curve(rho_nu, H, curve, Ts);
  double s = 0.0;
  for (std::size_t i = 0; i < L.size(); ++i) {
    const double d = L[i] - ts.points[i].leverage;
    s += ts.points[i].weight * d * d;
  }
  return s;
}

struct Problem {
  const LeverageTermStructure* ts;
  const ForwardCurve* curve;
};

double gsl_objective(const gsl_vector* x, void* params) {
  const auto* pr = static_cast<const Problem*>(params);
  const double rn = gsl_vector_get(x, 0), H = gsl_vector_get(x, 1);
  // Outside the admissible region the simplex sees a wall.
  if (!(H > 0.0 && H <= 0.5) || !std::isfinite(rn)) return std::numeric_limits<double>::max();
  try {
    return objective_rho_nu(*pr->ts, *pr->curve, rn, H);
  } catch (const std::exception&) {
    return std::numeric_limits<double>::max();
  }
}

FitResult run_simplex(const Problem& pr, double rn0, double h0, const FitOptions& opt) {
  gsl_multimin_function f{&gsl_objective, 2, const_cast<Problem*>(&pr)};
  gsl_vector* x = gsl_vector_alloc(2);
  gsl_vector* step = gsl_vector_alloc(2);
  gsl_vector_set(x, 0, rn0);
  gsl_vector_set(x, 1, h0);
  gsl_vector_set(step, 0, 0.1);
  gsl_vector_set(step, 1, std::min(0.05, 0.5 * (0.5 - h0) + 0.01));
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2);
  gsl_multimin_fminimizer_set(s, &f, x, step);
  FitResult r;
  int status = GSL_CONTINUE;
  while (status == GSL_CONTINUE && r.iterations < opt.max_iterations) {
    ++r.iterations;
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), opt.tolerance);
  }
  r.converged = status == GSL_SUCCESS;
  r.rho_nu = gsl_vector_get(s->x, 0);
  r.H = gsl_vector_get(s->x, 1);
  r.objective = s->fval;
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(x);
  gsl_vector_free(step);
  return r;
}

}  // namespace

double leverage_objective(const LeverageTermStructure& ts, const ForwardCurve& curve, double rho, double nu,
                          double H) {
  ts.validate();
  return objective_rho_nu(ts, curve, rho * nu, H);
}

FitResult fit_leverage(const LeverageTermStructure& ts, const ForwardCurve& curve,
                       std::optional<std::pair<double, double>> init, const FitOptions& opt) {
  ts.validate();
  gsl_set_error_handler_off();
  const Problem pr{&ts, &curve};
  std::vector<std::pair<double, double>> starts;
  if (init) starts.push_back(*init);
  for (double rn : {-0.1, -0.5})
    for (double h : {0.08, 0.3}) starts.push_back({rn, h});
  FitResult best;
  bool have = false;
  for (const auto& [rn, h] : starts) {
    FitResult r = run_simplex(pr, rn, h, opt);
    const bool better = !have || (r.converged && !best.converged) ||
                        (r.converged == best.converged && r.objective < best.objective);
    if (better) {
      best = r;
      have = true;
    }
  }
  // H only enters through rho nu; with no leverage it is not identified.
  double scale = 0.0;
  for (const auto& p : ts.points) scale = std::max(scale, std::abs(p.leverage));
  best.h_identified = std::abs(best.rho_nu) > 1e-6 && scale > 0.0;
  return best;
}

}  // namespace diamonds
