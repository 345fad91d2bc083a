#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "diamond/afv.hpp"
#include "diamond/calibration.hpp"
#include "diamond/csv.hpp"
#include "diamond/forest.hpp"
#include "diamond/mc.hpp"
#include "diamond/rough_bergomi.hpp"
#include "diamond/rough_heston.hpp"
#include "diamond/smile.hpp"

namespace diamonds::cli {

using nlohmann::json;

namespace {

/// Numeric failure with a context record for the diagnostics file.
struct NumericFailure : std::runtime_error {
  NumericFailure(const std::string& what, json ctx) : std::runtime_error(what), context(std::move(ctx)) {}
  json context;
};

struct Options {
  std::string config;
  std::string output;
  std::string diagnostics;
  std::string format;
  bool no_timestamp = false;
};

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

using Cell = std::variant<double, std::string>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

// Numbers go through the 12-digit formatter in both encodings, so CSV and
// JSON outputs carry the same values.
json json_number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return std::stod(format_number(x));
}

void write_table(std::ostream& os, const Table& t, const std::string& format, bool stamp) {
  if (format == "json") {
    json doc;
    if (stamp) doc["generated"] = timestamp();
    doc["columns"] = t.header;
    json rows = json::array();
    for (const auto& r : t.rows) {
      json row = json::object();
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (const double* x = std::get_if<double>(&r[i])) {
          row[t.header[i]] = json_number(*x);
        } else {
          row[t.header[i]] = std::get<std::string>(r[i]);
        }
      }
      rows.push_back(row);
    }
    doc["rows"] = rows;
    os << doc.dump(2) << "\n";
    return;
  }
  if (stamp) os << "# generated " << timestamp() << "\n";
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      os << (i ? "," : "");
      if (const double* x = std::get_if<double>(&r[i])) {
        os << format_number(*x);
      } else {
        os << csv_field(std::get<std::string>(r[i]));
      }
    }
    os << "\n";
  }
}

/// Writes to the file named by -o, else the config output path, else stdout.
template <class Writer>
void emit(const Options& opt, const RunConfig* cfg, std::ostream& out, Writer&& writer) {
  std::string path = opt.output;
  if (path.empty() && cfg) path = cfg->output.path;
  if (path.empty()) {
    writer(out);
    return;
  }
  std::ofstream file(path);
  if (!file) throw ConfigError("cannot open output file '" + path + "'");
  writer(file);
  if (!file) throw std::runtime_error("failed writing '" + path + "'");
}

std::string output_format(const Options& opt, const RunConfig& cfg, const std::string& fallback) {
  if (!opt.format.empty()) return opt.format;
  return cfg.output.format.empty() ? fallback : cfg.output.format;
}

void write_diagnostics(const Options& opt, const RunConfig* cfg, const std::string& command,
                       const std::string& error, const json& context, std::ostream& err) {
  std::string path = opt.diagnostics;
  if (path.empty()) {
    std::string base = opt.output;
    if (base.empty() && cfg) base = cfg->output.path;
    path = base.empty() ? "diamond-diagnostics.json" : base + ".diagnostics.json";
  }
  json doc;
  doc["command"] = command;
  doc["error"] = error;
  if (cfg) doc["model"] = cfg->family_name();
  if (!context.is_null()) doc["context"] = context;
  std::ofstream file(path);
  if (file) {
    file << doc.dump(2) << "\n";
    err << "diagnostics written to " << path << "\n";
  } else {
    err << "could not write diagnostics file " << path << "\n";
  }
}

// ------------------------------------------------------------------ forests

GaussRational parse_rational(const std::string& s) {
  static const std::regex fraction(R"(^([+-]?\d+)(?:/(\d+))?$)");
  static const std::regex decimal(R"(^([+-]?)(\d*)\.(\d+)$)");
  std::smatch m;
  if (std::regex_match(s, m, fraction)) {
    Rational num(m[1].str());
    Rational den = m[2].matched ? Rational(m[2].str()) : Rational(1);
    if (den == 0) throw ConfigError("--bind: zero denominator in '" + s + "'");
    return GaussRational{num / den};
  }
  if (std::regex_match(s, m, decimal)) {
    const std::string digits = m[2].str() + m[3].str();
    Rational scale = 1;
    for (std::size_t i = 0; i < m[3].length(); ++i) scale *= 10;
    Rational value = Rational(digits.empty() ? std::string("0") : digits) / scale;
    return GaussRational{m[1].str() == "-" ? Rational(-value) : value};
  }
  throw ConfigError("--bind: '" + s + "' is not a rational number");
}

std::array<GaussRational, 3> parse_binding(const std::string& spec) {
  std::array<GaussRational, 3> v{GaussRational{0}, GaussRational{0}, GaussRational{0}};
  std::array<bool, 3> seen{};
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("--bind: expected name=value, got '" + item + "'");
    const std::string name = item.substr(0, eq);
    int idx = -1;
    if (name == "a") idx = 0;
    if (name == "b") idx = 1;
    if (name == "c") idx = 2;
    if (idx < 0) throw ConfigError("--bind: unknown variable '" + name + "'");
    if (seen[idx]) throw ConfigError("--bind: '" + name + "' given twice");
    seen[idx] = true;
    v[idx] = parse_rational(item.substr(eq + 1));
  }
  return v;
}

struct ForestArgs {
  int max_order = 5;
  std::string mode = "scalar";
  std::string bind;
  bool martingale = false;
  bool use_m = false;
  bool latex = false;
  std::string format = "text";
};

int cmd_forests(const ForestArgs& a, const Options& opt, std::ostream& out) {
  const ForestMode mode = a.mode == "triple" ? ForestMode::triple : ForestMode::scalar;
  std::vector<Forest> forests = g_forests(a.max_order, mode);
  const bool bound = !a.bind.empty() || a.martingale;
  if (a.martingale) {
    // b = -a^2 / 2 turns exp(aX + b<X>) into the exponential martingale.
    const Poly b = Poly(GaussRational{Rational(-1, 2)}) * Poly::var(Var::a).pow(2);
    for (auto& f : forests) f = f.map_coefficients([&](const Poly& p) { return p.substitute(Var::b, b); });
  }
  if (!a.bind.empty()) {
    const auto v = parse_binding(a.bind);
    for (auto& f : forests) f = bind_exact(f, v[0], v[1], v[2]);
  }
  if (a.use_m)
    for (auto& f : forests) f = substitute_m(f);

  auto coeff_text = [&](const Poly& p) { return a.latex ? p.to_latex() : p.to_string(); };
  auto tree_text = [&](const DiamondTree& t) { return a.latex ? t.to_latex() : t.to_string(); };

  emit(opt, nullptr, out, [&](std::ostream& os) {
    if (a.format == "csv") {
      Table t{{"order", "coefficient", "tree"}, {}};
      for (std::size_t i = 0; i < forests.size(); ++i)
        for (const auto& [tree, p] : forests[i].terms())
          t.rows.push_back({static_cast<double>(i + 2), coeff_text(p), tree_text(tree)});
      write_table(os, t, "csv", !opt.no_timestamp);
      return;
    }
    if (!opt.no_timestamp) os << "# generated " << timestamp() << "\n";
    bool all_zero = true;
    for (std::size_t i = 0; i < forests.size(); ++i) {
      const auto& f = forests[i];
      const std::size_t k = i + 2;
      if (f.empty()) {
        os << "G^" << k << " = 0\n";
        continue;
      }
      all_zero = false;
      os << "G^" << k << " (" << f.size() << (f.size() == 1 ? " tree)" : " trees)") << "\n";
      for (const auto& [tree, p] : f.terms()) os << "  " << coeff_text(p) << "  " << tree_text(tree) << "\n";
    }
    if (bound) os << (all_zero ? "all orders vanish\n" : "nonzero orders remain\n");
  });
  return ok;
}

// -------------------------------------------------------------------- smile

CharFn model_cf(const RunConfig& cfg, double T) {
  switch (cfg.model.family) {
    case Family::black_scholes: return black_scholes_cf(cfg.model.sigma, T);
    case Family::rough_heston:
      return rough_heston_cf(cfg.model.rh, cfg.require_curve(), T, cfg.grid.riccati_steps);
    case Family::rough_bergomi:
      throw ConfigError("smile: rough_bergomi has no characteristic function; use --method bg2");
  }
  return {};
}

TreeInputs model_trees(const RunConfig& cfg, double T) {
  switch (cfg.model.family) {
    case Family::black_scholes: return {cfg.model.sigma * cfg.model.sigma * T, 0.0, 0.0, 0.0};
    case Family::rough_heston:
      return rough_heston_tree_inputs(cfg.model.rh, cfg.require_curve(), T, cfg.grid.riccati_steps);
    case Family::rough_bergomi:
      return rough_bergomi_tree_inputs(cfg.model.rb, cfg.require_curve(), T, cfg.grid.quadrature);
  }
  return {};
}

int cmd_smile(const std::string& method, const Options& opt, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load_config(opt.config);
  if (cfg.maturities.empty()) throw ConfigError("smile: config needs 'maturities'");
  if (cfg.strikes.empty()) throw ConfigError("smile: config needs 'strikes'");
  const bool fourier = method != "bg2";
  const bool bg2 = method != "fourier";

  Table t;
  if (method == "both") {
    t.header = {"T", "k", "sigma_fourier", "sigma_bg2", "diff"};
  } else {
    t.header = {"T", "k", "sigma_bs"};
  }
  double max_diff = 0.0;
  for (double T : cfg.maturities) {
    std::optional<FourierSmile> smile;
    TreeInputs trees;
    try {
      if (fourier) smile.emplace(model_cf(cfg, T), T, 0.0, FourierOptions{200, 16, cfg.tolerances.fourier_cutoff});
      if (bg2) trees = model_trees(cfg, T);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::runtime_error& e) {
      throw NumericFailure(e.what(), {{"T", T}, {"stage", "setup"}});
    }
    for (double k : cfg.strikes) {
      double sf = 0.0, sb = 0.0;
      if (fourier) {
        try {
          sf = smile->implied_vol(k);
        } catch (const std::runtime_error& e) {
          throw NumericFailure(e.what(), {{"T", T}, {"k", k}, {"method", "fourier"}});
        }
      }
      if (bg2) {
        const double sigma2 = bg_expansion(trees, k);
        if (!(sigma2 > 0.0))
          throw NumericFailure("second-order expansion gives a non-positive total variance",
                               {{"T", T}, {"k", k}, {"method", "bg2"}, {"total_variance", sigma2}});
        sb = std::sqrt(sigma2 / T);
      }
      if (method == "both") {
        max_diff = std::max(max_diff, std::abs(sf - sb));
        t.rows.push_back({T, k, sf, sb, sf - sb});
      } else {
        t.rows.push_back({T, k, fourier ? sf : sb});
      }
    }
  }
  emit(opt, &cfg, out, [&](std::ostream& os) {
    write_table(os, t, output_format(opt, cfg, "csv"), !opt.no_timestamp);
  });
  if (method == "both") err << "max |sigma_fourier - sigma_bg2| = " << format_number(max_diff) << "\n";
  return ok;
}

// ----------------------------------------------------------------- leverage

int cmd_leverage(int order, const Options& opt, std::ostream& out) {
  const RunConfig cfg = load_config(opt.config);
  if (cfg.maturities.empty()) throw ConfigError("leverage: config needs 'maturities'");
  const ForwardCurve& curve = cfg.require_curve();
  Table t{{"T", "M", "leverage", "series"}, {}};
  for (double T : cfg.maturities) {
    const double M = curve.integral(0.0, T);
    double lev = 0.0, series = 0.0;
    if (cfg.model.family == Family::rough_heston) {
      cfg.model.rh.require_zero_lambda();
      lev = leverage_swap(cfg.model.rh, curve, 0.0, T);
      for (int k = 1; k <= order; ++k) series += x_pow_diamond_m(k, cfg.model.rh, curve, 0.0, T);
    } else if (cfg.model.family == Family::rough_bergomi) {
      throw ConfigError("leverage: closed forms exist for rough_heston and black_scholes only");
    }
    t.rows.push_back({T, M, lev, series});
  }
  emit(opt, &cfg, out, [&](std::ostream& os) {
    write_table(os, t, output_format(opt, cfg, "csv"), !opt.no_timestamp);
  });
  return ok;
}

// ---------------------------------------------------------------- calibrate

int cmd_calibrate(const Options& opt, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load_config(opt.config);
  if (cfg.calibration.term_structure.empty())
    throw ConfigError("calibrate: config needs 'calibration.term_structure'");
  const ForwardCurve& curve = cfg.require_curve();
  LeverageTermStructure ts;
  try {
    ts = LeverageTermStructure::from_csv(cfg.calibration.term_structure);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("calibrate: ") + e.what());
  }
  const FitResult fit = fit_leverage(ts, curve, cfg.calibration.init,
                                     FitOptions{cfg.tolerances.calibration, cfg.tolerances.max_iterations});
  std::vector<double> Ts;
  for (const auto& p : ts.points) Ts.push_back(p.T);
  const std::vector<double> model = model_leverage_curve(fit.rho_nu, fit.H, curve, Ts);

  const std::string format = output_format(opt, cfg, "json");
  emit(opt, &cfg, out, [&](std::ostream& os) {
    if (format == "csv") {
      Table t{{"T", "market", "model", "weight"}, {}};
      for (std::size_t i = 0; i < Ts.size(); ++i)
        t.rows.push_back({Ts[i], ts.points[i].leverage, model[i], ts.points[i].weight});
      write_table(os, t, "csv", !opt.no_timestamp);
      return;
    }
    json doc;
    if (!opt.no_timestamp) doc["generated"] = timestamp();
    doc["rho_nu"] = json_number(fit.rho_nu);
    doc["H"] = json_number(fit.H);
    doc["objective"] = json_number(fit.objective);
    doc["iterations"] = fit.iterations;
    doc["converged"] = fit.converged;
    doc["h_identified"] = fit.h_identified;
    json rows = json::array();
    for (std::size_t i = 0; i < Ts.size(); ++i)
      rows.push_back({{"T", json_number(Ts[i])},
                      {"market", json_number(ts.points[i].leverage)},
                      {"model", json_number(model[i])},
                      {"weight", json_number(ts.points[i].weight)}});
    doc["fit"] = rows;
    os << doc.dump(2) << "\n";
  });
  err << "rho_nu = " << format_number(fit.rho_nu) << ", H = " << format_number(fit.H) << "\n";
  if (!fit.h_identified) err << "warning: fitted leverage is too small to identify H\n";
  if (!fit.converged)
    throw NumericFailure("Nelder-Mead did not converge",
                         {{"iterations", fit.iterations}, {"objective", fit.objective},
                          {"rho_nu", fit.rho_nu}, {"H", fit.H}});
  return ok;
}

// -------------------------------------------------------------- mc-validate

struct Check {
  std::string name;
  ProcessPair pair;
  double closed_form;
};

int cmd_mc_validate(const std::string& covariation, const Options& opt, std::ostream& out,
                    std::ostream& err) {
  const RunConfig cfg = load_config(opt.config);
  if (cfg.maturities.empty()) throw ConfigError("mc-validate: config needs 'maturities'");
  const ForwardCurve& curve = cfg.require_curve();
  const Covariation method = covariation == "realized" ? Covariation::realized : Covariation::bracket;

  SimConfig sim;
  sim.n_paths = cfg.grid.paths;
  sim.n_steps = cfg.grid.steps;
  sim.seed = cfg.seed;
  sim.antithetic = cfg.grid.antithetic;
  sim.rh_scheme = cfg.grid.scheme;

  Table t{{"T", "quantity", "estimate", "std_error", "closed_form", "z_score"}, {}};
  bool failed = false;
  for (double T : cfg.maturities) {
    const double M = curve.integral(0.0, T);
    std::vector<Check> checks;
    std::vector<McEstimate> est;
    if (cfg.model.family == Family::rough_heston) {
      const RHParams& p = cfg.model.rh;
      p.require_zero_lambda();
      const KernelSpec kernel = p.kernel();
      const int n = cfg.grid.riccati_steps;
      checks = {{"X.X", {Process::X, Process::X}, M},
                {"X.M", {Process::X, Process::M}, x_pow_diamond_m(1, p, curve, 0.0, T)},
                {"M.M", {Process::M, Process::M}, tree_value(diamond(leaf_m(), leaf_m()), kernel, p.rho, curve, 0.0, T, n)},
                {"S.M", {Process::S, Process::M}, leverage_swap(p, curve, 0.0, T)}};
      std::vector<ProcessPair> pairs;
      for (const auto& c : checks) pairs.push_back(c.pair);
      est = stream_rough_heston(sim, p, curve, T, pairs, method);
    } else if (cfg.model.family == Family::rough_bergomi) {
      const RBParams& p = cfg.model.rb;
      const RBQuadrature& q = cfg.grid.quadrature;
      checks = {{"X.X", {Process::X, Process::X}, M},
                {"X.M", {Process::X, Process::M}, x_diamond_m(curve, p, 0.0, T, q)},
                {"M.M", {Process::M, Process::M}, m_diamond_m(curve, p, 0.0, T, q)},
                {"X.(X.M)", {Process::X, Process::XdmM}, x_x_m(curve, p, 0.0, T, q)}};
      std::vector<ProcessPair> pairs;
      for (const auto& c : checks) pairs.push_back(c.pair);
      est = stream_rough_bergomi(sim, p, curve, T, pairs, method);
    } else {
      throw ConfigError("mc-validate: model must be rough_heston or rough_bergomi");
    }
    for (std::size_t i = 0; i < checks.size(); ++i) {
      const double z = est[i].z_score(checks[i].closed_form);
      if (!(std::abs(z) <= cfg.tolerances.z_max)) {
        failed = true;
        err << "T = " << format_number(T) << ": " << checks[i].name << " off by z = " << format_number(z) << "\n";
      }
      t.rows.push_back({T, checks[i].name, est[i].value, est[i].std_error, checks[i].closed_form, z});
    }
  }
  emit(opt, &cfg, out, [&](std::ostream& os) {
    write_table(os, t, output_format(opt, cfg, "csv"), !opt.no_timestamp);
  });
  return failed ? validation_failure : ok;
}

// ----------------------------------------------------------- rbergomi-trees

int cmd_rbergomi_trees(const Options& opt, std::ostream& out) {
  const RunConfig cfg = load_config(opt.config);
  if (cfg.model.family != Family::rough_bergomi) throw ConfigError("rbergomi-trees: model must be rough_bergomi");
  if (cfg.maturities.empty()) throw ConfigError("rbergomi-trees: config needs 'maturities'");
  const ForwardCurve& curve = cfg.require_curve();
  const RBParams& p = cfg.model.rb;
  const RBQuadrature& q = cfg.grid.quadrature;
  Table t{{"T", "M", "x_diamond_m", "m_diamond_m", "m_diamond_m_raw", "x_x_m"}, {}};
  for (double T : cfg.maturities) {
    t.rows.push_back({T, curve.integral(0.0, T), x_diamond_m(curve, p, 0.0, T, q),
                      m_diamond_m(curve, p, 0.0, T, q), m_diamond_m_raw(curve, p, 0.0, T, q),
                      x_x_m(curve, p, 0.0, T, q)});
  }
  emit(opt, &cfg, out, [&](std::ostream& os) {
    write_table(os, t, output_format(opt, cfg, "csv"), !opt.no_timestamp);
  });
  return ok;
}

void add_common(CLI::App* sub, Options& opt, bool needs_config) {
  auto* c = sub->add_option("-c,--config", opt.config, "JSON run configuration")->check(CLI::ExistingFile);
  if (needs_config) c->required();
  sub->add_option("-o,--output", opt.output, "Output file (default: config output.path, else stdout)");
  sub->add_flag("--no-timestamp", opt.no_timestamp, "Omit the generation timestamp");
  sub->add_option("--format", opt.format, "csv or json (default: config output.format)")
      ->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diamond-tree expansions, smiles, Monte Carlo checks and leverage calibration", "diamond"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (overrides DIAMOND_THREADS)")->check(CLI::PositiveNumber);

  Options opt;
  ForestArgs fa;
  auto* forests = app.add_subcommand("forests", "Print the G-forests with their exact coefficients");
  forests->add_option("--max", fa.max_order, "Highest order k")->check(CLI::Range(2, 12));
  forests->add_option("--mode", fa.mode, "Leaf alphabet")->check(CLI::IsMember({"scalar", "triple"}));
  forests->add_option("--bind", fa.bind, "Exact binding, e.g. a=1,b=-1/2,c=0");
  forests->add_flag("--martingale", fa.martingale, "Substitute b = -a^2/2");
  forests->add_flag("--use-m", fa.use_m, "Rewrite X⋄X subtrees as the leaf M");
  forests->add_flag("--latex", fa.latex, "Emit LaTeX");
  forests->add_option("--format", fa.format, "text or csv")->check(CLI::IsMember({"text", "csv"}));
  forests->add_option("-o,--output", opt.output, "Output file");
  forests->add_flag("--no-timestamp", opt.no_timestamp, "Omit the generation timestamp");

  std::string method = "fourier";
  auto* smile = app.add_subcommand("smile", "Implied volatilities per expiry");
  add_common(smile, opt, true);
  smile->add_option("--method", method, "fourier, bg2, or both (difference report)")
      ->check(CLI::IsMember({"fourier", "bg2", "both"}));
  smile->add_option("--diagnostics", opt.diagnostics, "Diagnostics file written on numeric failure");

  int order = 6;
  auto* leverage = app.add_subcommand("leverage", "Leverage swap term structure");
  add_common(leverage, opt, true);
  leverage->add_option("--order", order, "Terms in the tree-series column")->check(CLI::Range(1, 40));

  auto* calibrate = app.add_subcommand("calibrate", "Fit (rho nu, H) to leverage swap quotes");
  add_common(calibrate, opt, true);
  calibrate->add_option("--diagnostics", opt.diagnostics, "Diagnostics file written on numeric failure");

  std::string covariation = "bracket";
  auto* mc = app.add_subcommand("mc-validate", "Monte Carlo estimates against closed forms");
  add_common(mc, opt, true);
  mc->add_option("--covariation", covariation, "bracket or realized")
      ->check(CLI::IsMember({"bracket", "realized"}));

  auto* rb = app.add_subcommand("rbergomi-trees", "Rough Bergomi tree values");
  add_common(rb, opt, true);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }
  if (threads > 0) setenv("DIAMOND_THREADS", std::to_string(threads).c_str(), 1);

  std::string command = app.get_subcommands().front()->get_name();
  std::optional<RunConfig> cfg_for_diag;
  try {
    if (!opt.config.empty()) cfg_for_diag = load_config(opt.config);
    if (forests->parsed()) return cmd_forests(fa, opt, out);
    if (smile->parsed()) return cmd_smile(method, opt, out, err);
    if (leverage->parsed()) return cmd_leverage(order, opt, out);
    if (calibrate->parsed()) return cmd_calibrate(opt, out, err);
    if (mc->parsed()) return cmd_mc_validate(covariation, opt, out, err);
    if (rb->parsed()) return cmd_rbergomi_trees(opt, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return usage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return usage;
  } catch (const NumericFailure& e) {
    err << "numeric failure: " << e.what() << "\n";
    write_diagnostics(opt, cfg_for_diag ? &*cfg_for_diag : nullptr, command, e.what(), e.context, err);
    return numeric_failure;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << "\n";
    write_diagnostics(opt, cfg_for_diag ? &*cfg_for_diag : nullptr, command, e.what(), nullptr, err);
    return numeric_failure;
  }
  return usage;
}

}  // namespace diamonds::cli
