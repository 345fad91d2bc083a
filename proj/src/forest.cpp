#include "diamond/forest.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace diamonds {

namespace {

std::string rational_string(const Rational& q) {
  std::ostringstream os;
  os << numerator(q);
  if (denominator(q) != 1) os << '/' << denominator(q);
  return os.str();
}

std::string rational_latex(const Rational& q) {
  if (denominator(q) == 1) return numerator(q).str();
  std::ostringstream os;
  if (q < 0) os << '-';
  os << "\\frac{" << abs(numerator(q)) << "}{" << denominator(q) << "}";
  return os.str();
}

const char* var_name(int i) {
  static const char* names[] = {"a", "b", "c"};
  return names[i];
}

}  // namespace

std::string to_string(const GaussRational& q) {
  if (q.im == 0) return rational_string(q.re);
  if (q.re == 0) return rational_string(q.im) + "*i";
  std::string im = rational_string(q.im);
  if (q.im > 0) im = "+" + im;
  return "(" + rational_string(q.re) + im + "*i)";
}

// ---------------------------------------------------------------------------
// Poly

Poly::Poly(GaussRational constant) {
  if (!constant.is_zero()) terms_.emplace(Monomial{0, 0, 0}, std::move(constant));
}

Poly Poly::var(Var v) {
  Monomial m{0, 0, 0};
  m[static_cast<int>(v)] = 1;
  return term(GaussRational{1}, m);
}

Poly Poly::term(GaussRational coeff, Monomial exponents) {
  Poly p;
  p.add_term(exponents, coeff);
  return p;
}

void Poly::add_term(const Monomial& m, const GaussRational& q) {
  if (q.is_zero()) return;
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    terms_.emplace(m, q);
    return;
  }
  it->second = it->second + q;
  if (it->second.is_zero()) terms_.erase(it);
}

Poly& Poly::operator+=(const Poly& other) {
  for (const auto& [m, q] : other.terms_) add_term(m, q);
  return *this;
}

Poly& Poly::operator-=(const Poly& other) {
  for (const auto& [m, q] : other.terms_) add_term(m, -q);
  return *this;
}

Poly operator-(const Poly& x) {
  Poly out;
  for (const auto& [m, q] : x.terms_) out.terms_.emplace(m, -q);
  return out;
}

Poly operator*(const Poly& x, const Poly& y) {
  Poly out;
  for (const auto& [mx, qx] : x.terms_) {
    for (const auto& [my, qy] : y.terms_) {
      out.add_term({mx[0] + my[0], mx[1] + my[1], mx[2] + my[2]}, qx * qy);
    }
  }
  return out;
}

Poly Poly::pow(int n) const {
  if (n < 0) throw std::invalid_argument("Poly::pow: negative exponent");
  Poly out{1};
  for (int i = 0; i < n; ++i) out = out * *this;
  return out;
}

Poly Poly::substitute(Var v, const Poly& p) const {
  const int k = static_cast<int>(v);
  Poly out;
  for (const auto& [m, q] : terms_) {
    Monomial rest = m;
    rest[k] = 0;
    out += term(q, rest) * p.pow(m[k]);
  }
  return out;
}

Poly Poly::derivative(Var v) const {
  const int k = static_cast<int>(v);
  Poly out;
  for (const auto& [m, q] : terms_) {
    if (m[k] == 0) continue;
    Monomial d = m;
    d[k] -= 1;
    out.add_term(d, q * GaussRational{m[k]});
  }
  return out;
}

GaussRational Poly::evaluate(const GaussRational& a, const GaussRational& b,
                             const GaussRational& c) const {
  const GaussRational point[3] = {a, b, c};
  GaussRational sum;
  for (const auto& [m, q] : terms_) {
    GaussRational t = q;
    for (int k = 0; k < 3; ++k)
      for (int e = 0; e < m[k]; ++e) t = t * point[k];
    sum = sum + t;
  }
  return sum;
}

std::complex<double> Poly::evaluate(std::complex<double> a, std::complex<double> b,
                                    std::complex<double> c) const {
  const std::complex<double> point[3] = {a, b, c};
  std::complex<double> sum{0.0, 0.0};
  for (const auto& [m, q] : terms_) {
    std::complex<double> t = q.to_complex();
    for (int k = 0; k < 3; ++k)
      for (int e = 0; e < m[k]; ++e) t *= point[k];
    sum += t;
  }
  return sum;
}

// Terms are printed in descending total degree, then lexicographically.
std::string Poly::to_string() const {
  if (terms_.empty()) return "0";
  std::vector<std::pair<Monomial, GaussRational>> ordered(terms_.begin(), terms_.end());
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& x, const auto& y) {
    const int dx = x.first[0] + x.first[1] + x.first[2];
    const int dy = y.first[0] + y.first[1] + y.first[2];
    if (dx != dy) return dx > dy;
    return x.first > y.first;
  });
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, q] : ordered) {
    const bool constant = m[0] == 0 && m[1] == 0 && m[2] == 0;
    std::string coeff;
    bool negative = false;
    if (q.im == 0) {
      negative = q.re < 0;
      Rational mag = negative ? Rational(-q.re) : q.re;
      coeff = (mag == 1 && !constant) ? "" : rational_string(mag);
    } else {
      coeff = diamonds::to_string(q);
    }
    if (!first) os << (negative ? "-" : "+");
    else if (negative) os << "-";
    os << coeff;
    bool need_star = !coeff.empty();
    for (int k = 0; k < 3; ++k) {
      if (m[k] == 0) continue;
      if (need_star) os << '*';
      os << var_name(k);
      if (m[k] > 1) os << '^' << m[k];
      need_star = true;
    }
    first = false;
  }
  return os.str();
}

std::string Poly::to_latex() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [m, q] = *it;
    const bool constant = m[0] == 0 && m[1] == 0 && m[2] == 0;
    if (q.im == 0) {
      const bool negative = q.re < 0;
      if (!first) os << (negative ? " - " : " + ");
      else if (negative) os << "-";
      const Rational mag = negative ? Rational(-q.re) : q.re;
      if (mag != 1 || constant) os << rational_latex(mag);
    } else {
      if (!first) os << " + ";
      os << "\\left(" << rational_latex(q.re) << (q.im < 0 ? " - " : " + ")
         << rational_latex(q.im < 0 ? Rational(-q.im) : q.im) << "\\,i\\right)";
    }
    for (int k = 0; k < 3; ++k) {
      if (m[k] == 0) continue;
      os << var_name(k);
      if (m[k] > 1) os << "^{" << m[k] << "}";
    }
    first = false;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// DiamondTree

DiamondTree DiamondTree::leaf(Leaf tag) {
  auto n = std::make_shared<Node>();
  n->is_leaf = true;
  n->tag = tag;
  n->leaves = 1;
  return DiamondTree(std::move(n));
}

int compare(const DiamondTree& x, const DiamondTree& y) {
  if (x.node_ == y.node_) return 0;
  if (x.leaf_count() != y.leaf_count()) return x.leaf_count() < y.leaf_count() ? -1 : 1;
  if (x.is_leaf()) {
    const int tx = static_cast<int>(x.tag());
    const int ty = static_cast<int>(y.tag());
    return tx == ty ? 0 : (tx < ty ? -1 : 1);
  }
  if (const int l = compare(x.left(), y.left()); l != 0) return l;
  return compare(x.right(), y.right());
}

DiamondTree diamond(const DiamondTree& t1, const DiamondTree& t2) {
  auto n = std::make_shared<DiamondTree::Node>();
  n->is_leaf = false;
  n->leaves = t1.leaf_count() + t2.leaf_count();
  const bool swap = compare(t2, t1) < 0;
  n->left = std::make_shared<const DiamondTree>(swap ? t2 : t1);
  n->right = std::make_shared<const DiamondTree>(swap ? t1 : t2);
  return DiamondTree(std::move(n));
}

int DiamondTree::weighted_leaf_count() const {
  if (is_leaf()) return tag() == Leaf::M ? 2 : 1;
  return left().weighted_leaf_count() + right().weighted_leaf_count();
}

int DiamondTree::count(Leaf t) const {
  if (is_leaf()) return tag() == t ? 1 : 0;
  return left().count(t) + right().count(t);
}

std::string DiamondTree::to_string() const {
  if (is_leaf()) {
    switch (tag()) {
      case Leaf::X: return "X";
      case Leaf::Zeta: return "Z";
      case Leaf::M: return "M";
    }
  }
  return "(d " + left().to_string() + " " + right().to_string() + ")";
}

std::string DiamondTree::to_latex() const {
  if (is_leaf()) {
    switch (tag()) {
      case Leaf::X: return "X";
      case Leaf::Zeta: return "\\zeta";
      case Leaf::M: return "M";
    }
  }
  return "(" + left().to_latex() + " \\diamond " + right().to_latex() + ")";
}

// ---------------------------------------------------------------------------
// Forest

Forest::Forest(const DiamondTree& t, Poly coeff) { add(t, coeff); }

Poly Forest::coefficient(const DiamondTree& t) const {
  auto it = terms_.find(t);
  return it == terms_.end() ? Poly{} : it->second;
}

void Forest::add(const DiamondTree& t, const Poly& coeff) {
  if (coeff.is_zero()) return;
  auto it = terms_.find(t);
  if (it == terms_.end()) {
    terms_.emplace(t, coeff);
    return;
  }
  it->second += coeff;
  if (it->second.is_zero()) terms_.erase(it);
}

Forest& Forest::operator+=(const Forest& other) {
  for (const auto& [t, p] : other.terms_) add(t, p);
  return *this;
}

Forest operator*(const Poly& s, const Forest& f) {
  return f.map_coefficients([&](const Poly& p) { return s * p; });
}

std::string Forest::to_string() const {
  std::ostringstream os;
  for (const auto& [t, p] : terms_) os << '(' << p.to_string() << ") " << t.to_string() << '\n';
  return os.str();
}

std::string Forest::to_latex() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [t, p] : terms_) {
    if (!first) os << " + ";
    os << "\\left(" << p.to_latex() << "\\right)\\, " << t.to_latex();
    first = false;
  }
  return os.str();
}

Forest forest_diamond(const Forest& f1, const Forest& f2) {
  Forest out;
  for (const auto& [t1, p1] : f1.terms())
    for (const auto& [t2, p2] : f2.terms()) out.add(diamond(t1, t2), p1 * p2);
  return out;
}

std::vector<Forest> g_forests(int max_order, ForestMode mode) {
  if (max_order < 2) throw std::invalid_argument("g_forests: max_order must be >= 2");
  const Poly a = Poly::var(Var::a);
  const Poly b = Poly::var(Var::b);
  const Poly c = Poly::var(Var::c);
  const Poly half{GaussRational{Rational(1, 2)}};
  const DiamondTree& X = leaf_x();
  const DiamondTree& Z = leaf_zeta();

  Forest seed;
  Forest linear;
  if (mode == ForestMode::scalar) {
    seed = Forest(diamond(X, X), half * a * a + b);
    linear = Forest(X, a);
  } else {
    seed = Forest(diamond(X, X), half * a * (a - Poly{1}) + b);
    seed.add(diamond(X, Z), a * c);
    seed.add(diamond(Z, Z), half * c * c);
    linear = Forest(X, a) + Forest(Z, c);
  }

  // g[k] holds G^k; indices 0 and 1 unused.
  std::vector<Forest> g(static_cast<std::size_t>(max_order) + 1);
  g[2] = seed;
  for (int k = 3; k <= max_order; ++k) {
    Forest gk;
    for (int j = 2; j <= k - 2; ++j) gk += half * forest_diamond(g[k - j], g[j]);
    gk += forest_diamond(linear, g[k - 1]);
    g[k] = std::move(gk);
  }
  return {g.begin() + 2, g.end()};
}

std::vector<Forest> f_tilde_forests(int max_index) {
  if (max_index < 0) throw std::invalid_argument("f_tilde_forests: max_index must be >= 0");
  const Poly a = Poly::var(Var::a);
  const Poly i{GaussRational::i()};
  const Poly half{GaussRational{Rational(1, 2)}};
  const Forest linear(leaf_x(), i * a);

  std::vector<Forest> f(static_cast<std::size_t>(max_index) + 1);
  f[0] = Forest(leaf_m(), -half * a * (a + i));
  for (int k = 1; k <= max_index; ++k) {
    Forest fk;
    for (int j = 0; j <= k - 2; ++j) fk += half * forest_diamond(f[k - 2 - j], f[j]);
    fk += forest_diamond(linear, f[k - 1]);
    f[k] = std::move(fk);
  }
  return f;
}

DiamondTree substitute_m(const DiamondTree& t) {
  if (t.is_leaf()) return t;
  const DiamondTree l = substitute_m(t.left());
  const DiamondTree r = substitute_m(t.right());
  if (l.is_leaf() && r.is_leaf() && l.tag() == Leaf::X && r.tag() == Leaf::X) return leaf_m();
  return diamond(l, r);
}

Forest substitute_m(const Forest& f) {
  Forest out;
  for (const auto& [t, p] : f.terms()) out.add(substitute_m(t), p);
  return out;
}

DiamondTree expand_m(const DiamondTree& t) {
  if (t.is_leaf()) return t.tag() == Leaf::M ? diamond(leaf_x(), leaf_x()) : t;
  return diamond(expand_m(t.left()), expand_m(t.right()));
}

std::vector<BoundTerm> bind_coefficients(const Forest& f, std::complex<double> a,
                                         std::complex<double> b, std::complex<double> c) {
  std::vector<BoundTerm> out;
  for (const auto& [t, p] : f.terms()) {
    const std::complex<double> v = p.evaluate(a, b, c);
    if (std::abs(v) == 0.0) continue;
    out.push_back({t, v});
  }
  return out;
}

Forest bind_exact(const Forest& f, const GaussRational& a, const GaussRational& b,
                  const GaussRational& c) {
  return f.map_coefficients([&](const Poly& p) { return Poly{p.evaluate(a, b, c)}; });
}

}  // namespace diamonds
