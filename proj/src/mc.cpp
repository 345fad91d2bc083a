#include "diamond/mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "diamond/parallel.hpp"
#include "diamond/quadrature.hpp"
#include "diamond/specfun.hpp"

namespace diamonds {

namespace {

constexpr long kChunk = 256;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Box-Muller on 53-bit uniforms from mt19937_64, so draws do not depend on
// the standard library's distribution implementations.
class Normals {
 public:
  explicit Normals(std::uint64_t seed) : eng_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double uniform() { return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53; }

  template <class Vec>
  void fill(Vec& v, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) v[i] = (*this)();
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t chunk_seed(std::uint64_t seed, long chunk) {
  return splitmix64(splitmix64(seed) ^ (0xD1B54A32D192ED03ULL * static_cast<std::uint64_t>(chunk + 1)));
}

bool wants(const std::vector<Process>& ps, Process p) {
  return std::find(ps.begin(), ps.end(), p) != ps.end();
}

void check_config(const SimConfig& cfg, double T) {
  if (cfg.n_paths < 2) throw std::invalid_argument("mc: n_paths must be at least 2");
  if (cfg.antithetic && cfg.n_paths % 2 != 0)
    throw std::invalid_argument("mc: n_paths must be even with antithetic sampling");
  if (cfg.n_steps < 1) throw std::invalid_argument("mc: n_steps must be positive");
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("mc: horizon must be positive");
  for (int s : cfg.snapshot_steps)
    if (s < 0 || s > cfg.n_steps) throw std::invalid_argument("mc: snapshot step out of range");
}

void allocate(PathBundle& b, const SimConfig& cfg, long count) {
  const int n1 = cfg.n_steps + 1;
  b.n_steps = cfg.n_steps;
  b.n_paths = count;
  b.antithetic = cfg.antithetic;
  b.V.setZero(count, n1);
  std::vector<Process> ps = cfg.processes;
  if (!wants(ps, Process::X)) ps.push_back(Process::X);
  for (Process p : ps) {
    b.level[p].setZero(count, n1);
    b.load_w[p].setZero(count, n1);
    b.load_perp[p].setZero(count, n1);
  }
  b.snapshot_steps = cfg.snapshot_steps;
  b.xi_snapshots.assign(cfg.snapshot_steps.size(),
                        Eigen::MatrixXd::Constant(count, n1, std::numeric_limits<double>::quiet_NaN()));
}

void fill_s(PathBundle& b, long p) {
  if (!b.has(Process::S)) return;
  const auto& X = b.level.at(Process::X);
  for (int j = 0; j <= b.n_steps; ++j) {
    const double s = std::exp(X(p, j));
    b.level[Process::S](p, j) = s;
    b.load_w[Process::S](p, j) = s * b.load_w[Process::X](p, j);
    b.load_perp[Process::S](p, j) = s * b.load_perp[Process::X](p, j);
  }
}

void append_rows(Eigen::MatrixXd& dst, const Eigen::MatrixXd& src, long row) {
  dst.middleRows(row, src.rows()) = src;
}

PathBundle merge(std::vector<PathBundle>& parts, const SimConfig& cfg, Model model, double T) {
  PathBundle out;
  allocate(out, cfg, cfg.n_paths);
  out.model = model;
  out.T = T;
  long row = 0;
  for (auto& part : parts) {
    append_rows(out.V, part.V, row);
    for (auto& [p, m] : part.level) {
      append_rows(out.level[p], m, row);
      append_rows(out.load_w[p], part.load_w[p], row);
      append_rows(out.load_perp[p], part.load_perp[p], row);
    }
    for (std::size_t k = 0; k < part.xi_snapshots.size(); ++k)
      append_rows(out.xi_snapshots[k], part.xi_snapshots[k], row);
    if (part.clock.size() > 0) {
      if (out.clock.size() == 0) out.clock.setZero(cfg.n_paths, cfg.n_steps);
      append_rows(out.clock, part.clock, row);
    }
    out.truncations += part.truncations;
    row += part.n_paths;
    part = PathBundle{};
  }
  return out;
}

long chunk_count(long n_paths) { return (n_paths + kChunk - 1) / kChunk; }
long chunk_size(long n_paths, long c) { return std::min(kChunk, n_paths - c * kChunk); }

template <class Sim>
PathBundle run_all(const SimConfig& cfg, Model model, double T, const Sim& sim) {
  const long nc = chunk_count(cfg.n_paths);
  std::vector<PathBundle> parts(nc);
  parallel_for(nc, [&](std::size_t c) {
    parts[c] = sim(chunk_size(cfg.n_paths, c), chunk_seed(cfg.seed, static_cast<long>(c)));
  });
  return merge(parts, cfg, model, T);
}

template <class Sim>
std::vector<McEstimate> run_stream(const SimConfig& cfg, const std::vector<ProcessPair>& pairs,
                                   Covariation method, const Sim& sim) {
  const long nc = chunk_count(cfg.n_paths);
  std::vector<std::vector<Eigen::VectorXd>> samples(nc);
  parallel_for(nc, [&](std::size_t c) {
    const PathBundle b = sim(chunk_size(cfg.n_paths, c), chunk_seed(cfg.seed, static_cast<long>(c)));
    for (const auto& [a, bb] : pairs) samples[c].push_back(covariation_samples(b, a, bb, method));
  });
  std::vector<McEstimate> out;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    Eigen::VectorXd all(cfg.n_paths);
    long row = 0;
    for (const auto& s : samples) {
      all.segment(row, s[k].size()) = s[k];
      row += s[k].size();
    }
    out.push_back(mean_estimate(all, cfg.antithetic));
  }
  return out;
}

SimConfig stream_config(SimConfig cfg, const std::vector<ProcessPair>& pairs, Covariation method,
                        bool& levels) {
  cfg.processes.clear();
  for (const auto& [a, b] : pairs) {
    if (!wants(cfg.processes, a)) cfg.processes.push_back(a);
    if (!wants(cfg.processes, b)) cfg.processes.push_back(b);
  }
  cfg.snapshot_steps.clear();
  levels = method == Covariation::realized;
  return cfg;
}

// ---------------------------------------------------------------- rough Heston

struct RHContext {
  SimConfig cfg;
  RHParams params;
  double T = 0.0, dt = 0.0;
  bool levels = true;
  std::vector<double> kw;      // averaged kernel weight at lag m
  std::vector<double> xi0;     // xi_0(t_j)
  std::vector<double> k0_T;    // K0(T - t_j)
  std::vector<double> kbar_T;  // K0(T + delta - t_j) - K0(T - t_j)
  std::vector<double> m_fut0;  // int_{t_j}^T xi_0
  double zeta0 = 0.0;          // int_T^{T+delta} xi_0
  std::vector<double> m_run;   // (A(T - t_i) - A(T - t_{i+1})) / dt
  std::vector<double> m_lag;   // (A(m dt) - A((m - 1) dt)) / dt
  std::vector<double> z_w;     // zeta weight of the increment on step i
  std::vector<double> d_lag;   // int over step j of the forward variance response to dZ on step j - m, / dt
  std::vector<double> xi_step; // int_{t_j}^{t_{j+1}} xi_0
  double k_self = 0.0;         // response of the step's integrated variance to its own dZ
};

RHContext make_rh_context(const SimConfig& cfg, const RHParams& params, const ForwardCurve& curve,
                          double T, bool levels) {
  check_config(cfg, T);
  params.validate();
  for (Process p : cfg.processes)
    if (p == Process::XdmM) throw std::invalid_argument("mc: XdmM is only available for rough Bergomi");
  const bool zeta = wants(cfg.processes, Process::Zeta);
  if (T > curve.end() || (zeta && T + cfg.delta > curve.end()))
    throw std::out_of_range("mc: forward curve does not cover the simulation horizon");
  RHContext c;
  c.cfg = cfg;
  c.params = params;
  c.T = T;
  c.levels = levels;
  const int n = cfg.n_steps;
  c.dt = T / n;
  const KernelSpec k = params.kernel(cfg.delta);
  auto A = [&](double tau) { return tau <= 0.0 ? 0.0 : tau * k.k0(tau) - k.k1(tau); };
  c.kw.assign(n + 1, 0.0);
  c.m_lag.assign(n + 1, 0.0);
  std::vector<double> k0g(n + 1), ag(n + 1);
  for (int m = 0; m <= n; ++m) {
    k0g[m] = k.k0(m * c.dt);
    ag[m] = A(m * c.dt);
  }
  for (int m = 1; m <= n; ++m) {
    c.kw[m] = (k0g[m] - k0g[m - 1]) / c.dt;
    c.m_lag[m] = (ag[m] - ag[m - 1]) / c.dt;
  }
  c.d_lag.assign(n + 1, 0.0);
  for (int m = 1; m < n; ++m) c.d_lag[m] = (ag[m + 1] - 2.0 * ag[m] + ag[m - 1]) / c.dt;
  c.k_self = ag[1] / c.dt;
  c.xi_step.assign(n, 0.0);
  for (int j = 0; j < n; ++j) c.xi_step[j] = curve.integral(j * c.dt, (j + 1) * c.dt);
  c.xi0.resize(n + 1);
  c.k0_T.resize(n + 1);
  c.kbar_T.resize(n + 1);
  c.m_fut0.resize(n + 1);
  c.m_run.assign(n + 1, 0.0);
  c.z_w.assign(n + 1, 0.0);
  for (int j = 0; j <= n; ++j) {
    const double t = j * c.dt;
    const double tau = T - t;
    c.xi0[j] = curve(std::min(t, curve.end()));
    c.k0_T[j] = k.k0(tau);
    c.kbar_T[j] = zeta ? k.kbar(tau) : 0.0;
    c.m_fut0[j] = curve.integral(t, T);
  }
  for (int i = 0; i < n; ++i) {
    const double a = T - i * c.dt, b = T - (i + 1) * c.dt;
    c.m_run[i] = (A(a) - A(b)) / c.dt;
    if (zeta) c.z_w[i] = (A(a + cfg.delta) - A(b + cfg.delta) - A(a) + A(b)) / c.dt;
  }
  if (zeta) c.zeta0 = curve.integral(T, T + cfg.delta);
  return c;
}

// Inverse Gaussian draw with mean mu and shape lambda from a squared normal y
// and a uniform u (Michael, Schucany and Haas).
double inverse_gaussian(double mu, double lambda, double y, double u) {
  const double c = mu * y / (2.0 * lambda);
  const double x = mu / (1.0 + c + std::sqrt(c * c + 2.0 * c));
  return u * (mu + x) <= mu ? x : mu * mu / x;
}

// Integrated-variance implicit scheme. On each step the integrated variance
// dU and the martingale increment dZ = int sqrt(V) dW satisfy
// dU = alpha + k_self dZ, where alpha is the conditional forward integrated
// variance of the step; with <Z> = U this makes dU the first passage time of
// a drifted Brownian motion, so dU is inverse Gaussian and never negative.
// Loadings are coefficients on dZ and dZ_perp, with clock dU.
PathBundle simulate_rh_ivi_chunk(const RHContext& c, long count, std::uint64_t seed) {
  PathBundle b;
  allocate(b, c.cfg, count);
  b.model = Model::rough_heston;
  b.T = c.T;
  const int n = c.cfg.n_steps;
  b.clock.setZero(count, n);
  const double rho = c.params.rho, rbar = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  const bool want_m = b.has(Process::M), want_z = b.has(Process::Zeta);
  Normals rng(seed);
  Eigen::VectorXd gs(n), ys(n), us(n), zp(n), dz(n);
  auto& X = b.level[Process::X];

  for (long p = 0; p < count; ++p) {
    const bool partner = c.cfg.antithetic && (p % 2 == 1);
    if (partner) {
      us = (1.0 - us.array()).matrix();
      zp = -zp;
      gs = -gs;
    } else {
      for (int j = 0; j < n; ++j) {
        const double g = rng();
        gs[j] = g;
        ys[j] = g * g;
        us[j] = rng.uniform();
        zp[j] = rng();
      }
    }
    double x = 0.0, u_run = 0.0, m_run = 0.0, z_run = 0.0;
    for (int j = 0; j <= n; ++j) {
      double v = c.xi0[j];
      for (int i = 0; i < j; ++i) v += c.kw[j - i] * dz[i];
      if (v < 0.0) ++b.truncations;
      b.V(p, j) = std::max(v, 0.0);
      X(p, j) = x;
      b.load_w[Process::X](p, j) = rho;
      b.load_perp[Process::X](p, j) = rbar;
      if (want_m) {
        b.load_w[Process::M](p, j) = c.k0_T[j];
        if (c.levels) {
          double conv = 0.0;
          for (int i = 0; i < j; ++i) conv += c.m_lag[j - i] * dz[i];
          b.level[Process::M](p, j) = u_run + c.m_fut0[j] + m_run - conv;
        }
      }
      if (want_z) {
        b.load_w[Process::Zeta](p, j) = c.kbar_T[j];
        b.level[Process::Zeta](p, j) = c.zeta0 + z_run;
      }
      if (j == n) break;
      double alpha = c.xi_step[j];
      for (int i = 0; i < j; ++i) alpha += c.d_lag[j - i] * dz[i];
      double du = 0.0;
      if (c.k_self == 0.0) {
        // Zero kernel: deterministic variance and a Gaussian martingale increment.
        du = std::max(alpha, 0.0);
        dz[j] = std::sqrt(du) * gs[j];
      } else {
        if (alpha > 0.0) du = inverse_gaussian(alpha, alpha * alpha / (c.k_self * c.k_self), ys[j], us[j]);
        dz[j] = (du - alpha) / c.k_self;
      }
      b.clock(p, j) = du;
      u_run += du;
      x += -0.5 * du + rho * dz[j] + rbar * std::sqrt(du) * zp[j];
      m_run += c.m_run[j] * dz[j];
      z_run += c.z_w[j] * dz[j];
    }
    fill_s(b, p);
  }
  return b;
}

PathBundle simulate_rh_chunk(const RHContext& c, long count, std::uint64_t seed) {
  PathBundle b;
  allocate(b, c.cfg, count);
  b.model = Model::rough_heston;
  b.T = c.T;
  const int n = c.cfg.n_steps;
  const double dt = c.dt, sdt = std::sqrt(dt);
  const double rho = c.params.rho, rbar = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  const bool want_m = b.has(Process::M), want_z = b.has(Process::Zeta);
  Normals rng(seed);
  Eigen::VectorXd zw(n), zp(n), incr(n);
  auto& X = b.level[Process::X];
  auto& Xw = b.load_w[Process::X];
  auto& Xp = b.load_perp[Process::X];

  for (long p = 0; p < count; ++p) {
    const bool partner = c.cfg.antithetic && (p % 2 == 1);
    if (partner) {
      zw = -zw;
      zp = -zp;
    } else {
      rng.fill(zw, n);
      rng.fill(zp, n);
    }
    double x = 0.0, int_v = 0.0, m_run = 0.0, z_run = 0.0, v_prev = 0.0;
    for (int j = 0; j <= n; ++j) {
      double v = c.xi0[j];
      for (int i = 0; i < j; ++i) v += c.kw[j - i] * incr[i];
      if (v < 0.0) ++b.truncations;
      const double vp = std::max(v, 0.0), sv = std::sqrt(vp);
      if (j > 0) int_v += 0.5 * dt * (v_prev + vp);
      v_prev = vp;
      b.V(p, j) = vp;
      X(p, j) = x;
      Xw(p, j) = rho * sv;
      Xp(p, j) = rbar * sv;
      if (want_m) {
        b.load_w[Process::M](p, j) = c.k0_T[j] * sv;
        if (c.levels) {
          double conv = 0.0;
          for (int i = 0; i < j; ++i) conv += c.m_lag[j - i] * incr[i];
          b.level[Process::M](p, j) = int_v + c.m_fut0[j] + m_run - conv;
        }
      }
      if (want_z) {
        b.load_w[Process::Zeta](p, j) = c.kbar_T[j] * sv;
        b.level[Process::Zeta](p, j) = c.zeta0 + z_run;
      }
      if (j == n) break;
      const double dw = sdt * zw[j];
      incr[j] = sv * dw;
      x += -0.5 * vp * dt + sv * (rho * dw + rbar * sdt * zp[j]);
      m_run += c.m_run[j] * incr[j];
      z_run += c.z_w[j] * incr[j];
    }
    fill_s(b, p);
  }
  return b;
}

PathBundle simulate_rh(const RHContext& c, long count, std::uint64_t seed) {
  return c.cfg.rh_scheme == RHScheme::ivi ? simulate_rh_ivi_chunk(c, count, seed)
                                          : simulate_rh_chunk(c, count, seed);
}

// --------------------------------------------------------------- rough Bergomi

// Weights of int_0^L x^-kappa f(x) dx on the unit grid for f linear in x^p
// between nodes ("rough hats"). full[m] applies to m < L, last[L] to m = L.
struct HatWeights {
  std::vector<double> full, last;
};

HatWeights hat_weights(int n, double kappa, double p) {
  HatWeights h;
  h.full.assign(n + 1, 0.0);
  h.last.assign(n + 1, 0.0);
  auto mom = [](double e, double a, double b) { return (std::pow(b, e + 1.0) - std::pow(a, e + 1.0)) / (e + 1.0); };
  for (int cell = 0; cell < n; ++cell) {
    const double a = cell, b = cell + 1.0;
    const double ya = std::pow(a, p), yb = std::pow(b, p);
    const double i0 = mom(-kappa, a, b), ip = mom(p - kappa, a, b);
    const double lo = (yb * i0 - ip) / (yb - ya);
    const double hi = (ip - ya * i0) / (yb - ya);
    h.full[cell] += lo;
    if (cell + 1 < n) h.full[cell + 1] += hi;
    h.last[cell + 1] = hi;
  }
  return h;
}

// Corner weights of the kernels y^-g (x^-g / 2 + (x + y)^-g) and y^-g against
// products of rough hats on the unit cell [i, i+1] x [j, j+1], or on its
// lower-left triangle.
struct CellWeights {
  double load[2][2] = {{0, 0}, {0, 0}};
  double level[2][2] = {{0, 0}, {0, 0}};
};

CellWeights cell_weights(int i, int j, bool tri, double p, double g, double q) {
  const int ng = (i <= 1 || j <= 1) ? 14 : 5;
  const GaussRule& r = gauss_legendre(ng);
  const double qx = i == 0 ? q : 1.0, qy = j == 0 ? q : 1.0;
  const double xa = std::pow(double(i), p), xb = std::pow(i + 1.0, p);
  const double ya = std::pow(double(j), p), yb = std::pow(j + 1.0, p);
  CellWeights w;
  for (int a = 0; a < ng; ++a) {
    const double s = 0.5 * (r.nodes[a] + 1.0);
    const double phi = std::pow(s, qx), dphi = qx * std::pow(s, qx - 1.0);
    for (int b = 0; b < ng; ++b) {
      const double t = 0.5 * (r.nodes[b] + 1.0);
      const double psi = std::pow(t, qy), dpsi = qy * std::pow(t, qy - 1.0);
      const double x = i + phi;
      const double y = tri ? j + (1.0 - phi) * psi : j + psi;
      double jac = 0.25 * r.weights[a] * r.weights[b] * dphi * dpsi;
      if (tri) jac *= 1.0 - phi;
      if (!(x > 0.0) || !(y > 0.0)) continue;
      const double hx1 = (std::pow(x, p) - xa) / (xb - xa), hy1 = (std::pow(y, p) - ya) / (yb - ya);
      const double hx[2] = {1.0 - hx1, hx1}, hy[2] = {1.0 - hy1, hy1};
      const double yg = std::pow(y, -g);
      const double kl = yg * (0.5 * std::pow(x, -g) + std::pow(x + y, -g));
      for (int dx = 0; dx < 2; ++dx)
        for (int dy = 0; dy < 2; ++dy) {
          const double h = hx[dx] * hy[dy] * jac;
          w.load[dx][dy] += kl * h;
          w.level[dx][dy] += yg * h;
        }
    }
  }
  return w;
}

// Weights for the double sums over offsets (a, b) = ((r - s) / dt, (u - r) / dt)
// on the triangle a + b <= L, already multiplied by the deterministic factor
// E(a, b) = exp(eta^2 (a dt)^2H (G((a + b) / a) - 1/4) / 2).
struct TriWeights {
  std::vector<std::vector<double>> inner;  // inner[a][b], a + b <= n - 2
  std::vector<std::vector<double>> b1;     // b1[L][a], node (a, L - 1 - a)
  std::vector<std::vector<double>> b2;     // b2[L][a], node (a, L - a)
};

struct TriPair {
  TriWeights load, level;
};

TriPair tri_weights(int n, const RBParams& prm, double dt) {
  const double p = 2.0 * prm.H, g = prm.gamma(), q = rb_grading_power(prm.H);
  // Cell weights: full cells for i + j <= n - 2, triangles for i + j <= n - 1.
  std::vector<std::vector<CellWeights>> full(n), half(n);
  parallel_for(n, [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    for (int j = 0; i + j <= n - 1; ++j) {
      if (i + j <= n - 2) full[i].push_back(cell_weights(i, j, false, p, g, q));
      half[i].push_back(cell_weights(i, j, true, p, g, q));
    }
  });
  std::vector<std::vector<double>> E(n + 1);
  parallel_for(n + 1, [&](std::size_t aa) {
    const int a = static_cast<int>(aa);
    E[a].assign(n + 1 - a, 1.0);
    if (a == 0) return;
    const double sp = std::pow(a * dt, p);
    for (int b = 0; a + b <= n; ++b)
      E[a][b] = std::exp(0.5 * prm.eta * prm.eta * sp * (g_gamma(double(a + b) / a, 1.0, g) - 0.25));
  });
  auto F = [&](int i, int j, int dx, int dy, bool lev) {
    if (i < 0 || j < 0) return 0.0;
    const CellWeights& c = full[i][j];
    return lev ? c.level[dx][dy] : c.load[dx][dy];
  };
  auto Hf = [&](int i, int j, int dx, int dy, bool lev) {
    if (i < 0 || j < 0) return 0.0;
    const CellWeights& c = half[i][j];
    return lev ? c.level[dx][dy] : c.load[dx][dy];
  };
  TriPair out;
  for (int k = 0; k < 2; ++k) {
    const bool lev = k == 1;
    TriWeights& tw = lev ? out.level : out.load;
    tw.inner.resize(std::max(n - 1, 0));
    for (int a = 0; a <= n - 2; ++a) {
      tw.inner[a].resize(n - 1 - a);
      for (int b = 0; a + b <= n - 2; ++b) {
        const double om = F(a, b, 0, 0, lev) + F(a - 1, b, 1, 0, lev) + F(a, b - 1, 0, 1, lev) +
                          F(a - 1, b - 1, 1, 1, lev);
        tw.inner[a][b] = om * E[a][b];
      }
    }
    tw.b1.assign(n + 1, {});
    tw.b2.assign(n + 1, {});
    for (int L = 1; L <= n; ++L) {
      tw.b1[L].resize(L);
      for (int a = 0; a <= L - 1; ++a) {
        const int b = L - 1 - a;
        const double om = Hf(a, b, 0, 0, lev) + F(a - 1, b, 1, 0, lev) + F(a, b - 1, 0, 1, lev) +
                          F(a - 1, b - 1, 1, 1, lev);
        tw.b1[L][a] = om * E[a][b];
      }
      tw.b2[L].resize(L + 1);
      for (int a = 0; a <= L; ++a) {
        const int b = L - a;
        const double om = F(a - 1, b - 1, 1, 1, lev) + Hf(a - 1, b, 1, 0, lev) + Hf(a, b - 1, 0, 1, lev);
        tw.b2[L][a] = om * E[a][b];
      }
    }
  }
  return out;
}

// Upper-triangular matrix K with K(a, a + b) = w(a, b) on the triangle
// a + b <= L, so that (K F)(a) = sum_b w(a, b) f(a + b).
void build_tri_matrix(const TriWeights& w, int L, Eigen::MatrixXd& K) {
  K.setZero(L + 1, L + 1);
  for (int a = 0; a <= L; ++a) {
    for (int b = 0; a + b <= L - 2; ++b) K(a, a + b) = w.inner[a][b];
    if (a <= L - 1) K(a, L - 1) = w.b1[L][a];
    K(a, L) = w.b2[L][a];
  }
}

struct RBContext {
  SimConfig cfg;
  RBParams params;
  double T = 0.0, dt = 0.0;
  bool levels = true;
  Eigen::MatrixXd chol;         // factor of Cov(dW, dY_1..dY_n)
  std::vector<double> half_var;  // eta_tilde^2 Var(dY_m) / 2
  std::vector<double> xi0;
  HatWeights w0, wg;
  TriPair tri;
  bool want_tri = false;
};

RBContext make_rb_context(const SimConfig& cfg, const RBParams& params, const ForwardCurve& curve,
                          double T, bool levels) {
  check_config(cfg, T);
  params.validate();
  if (cfg.n_steps > 1024) throw std::invalid_argument("mc: rough Bergomi supports at most 1024 steps");
  if (wants(cfg.processes, Process::Zeta))
    throw std::invalid_argument("mc: zeta is only available for rough Heston");
  if (T > curve.end()) throw std::out_of_range("mc: forward curve does not cover the simulation horizon");
  RBContext c;
  c.cfg = cfg;
  c.params = params;
  c.T = T;
  c.levels = levels;
  const int n = cfg.n_steps;
  c.dt = T / n;
  const double g = params.gamma(), H2 = 2.0 * params.H, et = params.eta_tilde();
  Eigen::MatrixXd cov(n + 1, n + 1);
  cov(0, 0) = c.dt;
  for (int m = 1; m <= n; ++m)
    cov(0, m) = cov(m, 0) = std::pow(c.dt, 1.0 - g) * (std::pow(double(m), 1.0 - g) - std::pow(m - 1.0, 1.0 - g)) / (1.0 - g);
  const double sc = std::pow(c.dt, H2) / H2;
  parallel_for(n, [&](std::size_t mm) {
    const int m = static_cast<int>(mm) + 1;
    for (int k = m; k <= n; ++k) cov(k, m) = sc * g_gamma(double(k), double(m), g);
  });
  for (int m = 1; m <= n; ++m)
    for (int k = m + 1; k <= n; ++k) cov(m, k) = cov(k, m);
  c.half_var.assign(n + 1, 0.0);
  for (int m = 1; m <= n; ++m) c.half_var[m] = 0.5 * et * et * cov(m, m);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    cov.diagonal().array() += 1e-12 * cov.diagonal().mean();
    llt.compute(cov);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("mc: Cholesky factorization of the Volterra covariance failed");
  }
  c.chol = llt.matrixL();
  c.xi0.resize(n + 1);
  for (int k = 0; k <= n; ++k) c.xi0[k] = curve(k * c.dt);
  c.w0 = hat_weights(n, 0.0, H2);
  c.wg = hat_weights(n, g, H2);
  c.want_tri = wants(cfg.processes, Process::XdmM);
  if (c.want_tri) c.tri = tri_weights(n, params, c.dt);
  return c;
}

// All paths of a chunk advance together so that the field update and the
// nested loadings are triangular matrix products. Column i < nb is a base
// path and column nb + i its antithetic partner; base path i is stored as
// bundle row 2i and its partner as row 2i + 1.
PathBundle simulate_rb_chunk(const RBContext& c, long count, std::uint64_t seed) {
  PathBundle b;
  allocate(b, c.cfg, count);
  b.model = Model::rough_bergomi;
  b.T = c.T;
  const int n = c.cfg.n_steps;
  const double dt = c.dt, sdt = std::sqrt(dt);
  const double rho = c.params.rho, rbar = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  const double g = c.params.gamma(), et = c.params.eta_tilde();
  const double scale_g = std::pow(dt, 1.0 - g);
  const double scale_load = c.params.rho * et * et * std::pow(dt, 2.0 - 2.0 * g);
  const double scale_level = c.params.rho * et * std::pow(dt, 2.0 - g);
  const bool want_m = b.has(Process::M), want_y = b.has(Process::XdmM);
  const bool anti = c.cfg.antithetic;
  const long nb = anti ? count / 2 : count;
  auto row_of = [&](long col) { return anti ? (col < nb ? 2 * col : 2 * (col - nb) + 1) : col; };

  Normals rng(seed);
  Eigen::MatrixXd xi = Eigen::VectorXd::Map(c.xi0.data(), n + 1).replicate(1, count);
  Eigen::RowVectorXd x = Eigen::RowVectorXd::Zero(count), int_v = Eigen::RowVectorXd::Zero(count);
  Eigen::VectorXd hv = Eigen::VectorXd::Map(c.half_var.data(), n + 1);
  Eigen::MatrixXd Z, E, K, Q, R;
  Eigen::RowVectorXd zp(nb), v_prev, wg, w0;
  auto& X = b.level[Process::X];
  auto& Xw = b.load_w[Process::X];
  auto& Xp = b.load_perp[Process::X];

  for (int j = 0; j <= n; ++j) {
    if (j > 0) {
      // Step from t_{j-1} to t_j: dW and dY_m for the nodes u_k = t_{j-1} + m dt, k = j..n.
      const int len = n + 2 - j;
      Z.resize(len, nb);
      for (long i = 0; i < nb; ++i) {
        for (int r = 0; r < len; ++r) Z(r, i) = rng();
        zp[i] = rng();
      }
      E.noalias() = c.chol.topLeftCorner(len, len).triangularView<Eigen::Lower>() * Z;
      v_prev = xi.row(j - 1);
      Eigen::RowVectorXd dw(count), dp(count);
      dw.head(nb) = E.row(0);
      dp.head(nb) = sdt * zp;
      if (anti) {
        dw.tail(nb) = -E.row(0);
        dp.tail(nb) = -sdt * zp;
      }
      x.array() += -0.5 * dt * v_prev.array() + v_prev.array().sqrt() * (rho * dw.array() + rbar * dp.array());
      const auto hseg = hv.segment(1, len - 1);
      auto tail = xi.middleRows(j, len - 1);
      tail.leftCols(nb).array() *= ((et * E.bottomRows(len - 1)).colwise() - hseg).array().exp();
      if (anti) tail.rightCols(nb).array() *= ((-et * E.bottomRows(len - 1)).colwise() - hseg).array().exp();
      int_v.array() += 0.5 * dt * (v_prev.array() + xi.row(j).array());
    }
    const int L = n - j;
    const auto F = xi.middleRows(j, L + 1);
    Eigen::RowVectorXd lam = Eigen::RowVectorXd::Zero(count), fut = Eigen::RowVectorXd::Zero(count);
    if (want_m && L > 0) {
      wg.resize(L + 1);
      w0.resize(L + 1);
      for (int m = 0; m < L; ++m) {
        wg[m] = c.wg.full[m];
        w0[m] = c.w0.full[m];
      }
      wg[L] = c.wg.last[L];
      w0[L] = c.w0.last[L];
      lam.noalias() = wg * F;
      fut.noalias() = w0 * F;
    }
    Eigen::RowVectorXd yload = Eigen::RowVectorXd::Zero(count), ylevel = Eigen::RowVectorXd::Zero(count);
    if (want_y && L > 0) {
      R = F.array().sqrt();
      build_tri_matrix(c.tri.load, L, K);
      Q.noalias() = K.triangularView<Eigen::Upper>() * F;
      yload = scale_load * (R.array() * Q.array()).colwise().sum();
      if (c.levels) {
        build_tri_matrix(c.tri.level, L, K);
        Q.noalias() = K.triangularView<Eigen::Upper>() * F;
        ylevel = scale_level * (R.array() * Q.array()).colwise().sum();
      }
    }
    for (long col = 0; col < count; ++col) {
      const long p = row_of(col);
      const double v = xi(j, col), sv = std::sqrt(v);
      b.V(p, j) = v;
      X(p, j) = x[col];
      Xw(p, j) = rho * sv;
      Xp(p, j) = rbar * sv;
      if (want_m) {
        b.load_w[Process::M](p, j) = et * scale_g * lam[col];
        b.level[Process::M](p, j) = int_v[col] + dt * fut[col];
      }
      if (want_y) {
        b.load_w[Process::XdmM](p, j) = yload[col];
        b.level[Process::XdmM](p, j) = ylevel[col];
      }
    }
    for (std::size_t k = 0; k < b.snapshot_steps.size(); ++k)
      if (b.snapshot_steps[k] == j)
        for (long col = 0; col < count; ++col)
          for (int u = j; u <= n; ++u) b.xi_snapshots[k](row_of(col), u) = xi(u, col);
  }
  for (long p = 0; p < count; ++p) fill_s(b, p);
  return b;
}

}  // namespace

double McEstimate::z_score(double reference) const {
  const double d = value - reference;
  if (std_error == 0.0) return d == 0.0 ? 0.0 : std::copysign(INFINITY, d);
  return d / std_error;
}

const char* process_name(Process p) {
  switch (p) {
    case Process::X: return "X";
    case Process::S: return "S";
    case Process::M: return "M";
    case Process::Zeta: return "zeta";
    case Process::XdmM: return "XdmM";
  }
  return "?";
}

PathBundle simulate_rough_heston(const SimConfig& cfg, const RHParams& params, const ForwardCurve& curve,
                                 double T) {
  const RHContext c = make_rh_context(cfg, params, curve, T, true);
  return run_all(cfg, Model::rough_heston, T,
                 [&](long count, std::uint64_t seed) { return simulate_rh(c, count, seed); });
}

PathBundle simulate_rough_bergomi(const SimConfig& cfg, const RBParams& params, const ForwardCurve& curve,
                                  double T) {
  const RBContext c = make_rb_context(cfg, params, curve, T, true);
  return run_all(cfg, Model::rough_bergomi, T,
                 [&](long count, std::uint64_t seed) { return simulate_rb_chunk(c, count, seed); });
}

Eigen::VectorXd covariation_samples(const PathBundle& bundle, Process a, Process b, Covariation method) {
  if (!bundle.has(a) || !bundle.has(b))
    throw std::invalid_argument(std::string("mc: process not simulated: ") +
                                process_name(bundle.has(a) ? b : a));
  const int n = bundle.n_steps;
  Eigen::VectorXd out(bundle.n_paths);
  if (method == Covariation::bracket) {
    const auto& aw = bundle.load_w.at(a);
    const auto& ap = bundle.load_perp.at(a);
    const auto& bw = bundle.load_w.at(b);
    const auto& bp = bundle.load_perp.at(b);
    const double dt = bundle.dt();
    const bool uniform = bundle.clock.size() == 0;
    for (long p = 0; p < bundle.n_paths; ++p) {
      double s = 0.0, prev = aw(p, 0) * bw(p, 0) + ap(p, 0) * bp(p, 0);
      for (int j = 1; j <= n; ++j) {
        const double d = aw(p, j) * bw(p, j) + ap(p, j) * bp(p, j);
        s += 0.5 * (prev + d) * (uniform ? dt : bundle.clock(p, j - 1));
        prev = d;
      }
      out[p] = s;
    }
  } else {
    const auto& A = bundle.level.at(a);
    const auto& B = bundle.level.at(b);
    for (long p = 0; p < bundle.n_paths; ++p) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += (A(p, j + 1) - A(p, j)) * (B(p, j + 1) - B(p, j));
      out[p] = s;
    }
  }
  return out;
}

McEstimate mean_estimate(const Eigen::VectorXd& samples, bool antithetic) {
  Eigen::VectorXd x = samples;
  if (antithetic) {
    if (samples.size() % 2 != 0) throw std::invalid_argument("mc: antithetic samples must come in pairs");
    x.resize(samples.size() / 2);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = 0.5 * (samples[2 * i] + samples[2 * i + 1]);
  }
  McEstimate est;
  est.n_paths = samples.size();
  const double k = static_cast<double>(x.size());
  est.value = x.mean();
  est.std_error = x.size() > 1 ? std::sqrt((x.array() - est.value).square().sum() / (k - 1.0) / k)
                               : std::numeric_limits<double>::infinity();
  return est;
}

McEstimate estimate_diamond(const PathBundle& bundle, Process a, Process b, Covariation method) {
  return mean_estimate(covariation_samples(bundle, a, b, method), bundle.antithetic);
}

McEstimate estimate_leverage(const PathBundle& bundle, Covariation method) {
  // S_0 = 1 on the simulated paths.
  return estimate_diamond(bundle, Process::S, Process::M, method);
}

std::vector<McEstimate> stream_rough_heston(const SimConfig& cfg, const RHParams& params,
                                            const ForwardCurve& curve, double T,
                                            const std::vector<ProcessPair>& pairs, Covariation method) {
  bool levels = true;
  const SimConfig sc = stream_config(cfg, pairs, method, levels);
  const RHContext c = make_rh_context(sc, params, curve, T, levels);
  return run_stream(sc, pairs, method,
                    [&](long count, std::uint64_t seed) { return simulate_rh(c, count, seed); });
}

std::vector<McEstimate> stream_rough_bergomi(const SimConfig& cfg, const RBParams& params,
                                             const ForwardCurve& curve, double T,
                                             const std::vector<ProcessPair>& pairs, Covariation method) {
  bool levels = true;
  const SimConfig sc = stream_config(cfg, pairs, method, levels);
  const RBContext c = make_rb_context(sc, params, curve, T, levels);
  return run_stream(sc, pairs, method,
                    [&](long count, std::uint64_t seed) { return simulate_rb_chunk(c, count, seed); });
}

}  // namespace diamonds
