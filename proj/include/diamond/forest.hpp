#pragma once

// Exact symbolic layer: diamond trees, polynomial coefficients over the
// Gaussian rationals, and the G / F-tilde forest recursions.

#include <array>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace diamonds {

using Rational = boost::multiprecision::cpp_rational;

/// Exact complex number with rational real and imaginary parts.
struct GaussRational {
  Rational re{0};
  Rational im{0};

  GaussRational() = default;
  GaussRational(Rational r, Rational i = Rational{0}) : re(std::move(r)), im(std::move(i)) {}
  GaussRational(long long r) : re(r) {}

  static GaussRational i() { return {Rational{0}, Rational{1}}; }

  bool is_zero() const { return re == 0 && im == 0; }
  std::complex<double> to_complex() const {
    return {re.convert_to<double>(), im.convert_to<double>()};
  }

  friend GaussRational operator+(const GaussRational& x, const GaussRational& y) {
    return {x.re + y.re, x.im + y.im};
  }
  friend GaussRational operator-(const GaussRational& x, const GaussRational& y) {
    return {x.re - y.re, x.im - y.im};
  }
  friend GaussRational operator-(const GaussRational& x) { return {-x.re, -x.im}; }
  friend GaussRational operator*(const GaussRational& x, const GaussRational& y) {
    return {x.re * y.re - x.im * y.im, x.re * y.im + x.im * y.re};
  }
  friend bool operator==(const GaussRational& x, const GaussRational& y) {
    return x.re == y.re && x.im == y.im;
  }
};

std::string to_string(const GaussRational& q);

/// Formal variables of the coefficient ring.
enum class Var : int { a = 0, b = 1, c = 2 };

/// Polynomial in a, b, c with Gaussian-rational coefficients. Zero terms are
/// never stored, so the zero polynomial is the empty map.
class Poly {
 public:
  using Monomial = std::array<int, 3>;

  Poly() = default;
  Poly(GaussRational constant);
  Poly(long long constant) : Poly(GaussRational{constant}) {}

  static Poly var(Var v);
  static Poly term(GaussRational coeff, Monomial exponents);

  bool is_zero() const { return terms_.empty(); }
  const std::map<Monomial, GaussRational>& terms() const { return terms_; }

  Poly& operator+=(const Poly& other);
  Poly& operator-=(const Poly& other);
  friend Poly operator+(Poly x, const Poly& y) { return x += y; }
  friend Poly operator-(Poly x, const Poly& y) { return x -= y; }
  friend Poly operator-(const Poly& x);
  friend Poly operator*(const Poly& x, const Poly& y);
  friend bool operator==(const Poly& x, const Poly& y) { return x.terms_ == y.terms_; }

  Poly pow(int n) const;
  /// Replace variable v by the polynomial p.
  Poly substitute(Var v, const Poly& p) const;
  Poly derivative(Var v) const;
  GaussRational evaluate(const GaussRational& a, const GaussRational& b,
                         const GaussRational& c) const;
  std::complex<double> evaluate(std::complex<double> a, std::complex<double> b,
                                std::complex<double> c) const;

  std::string to_string() const;
  std::string to_latex() const;

 private:
  void add_term(const Monomial& m, const GaussRational& q);
  std::map<Monomial, GaussRational> terms_;
};

enum class Leaf : int { X = 0, Zeta = 1, M = 2 };

/// Immutable binary tree. Children of every node are stored in canonical
/// order, so structurally equal values compare equal regardless of the order
/// in which the diamond products were taken.
class DiamondTree {
 public:
  static DiamondTree leaf(Leaf tag);

  bool is_leaf() const { return node_->is_leaf; }
  Leaf tag() const { return node_->tag; }
  const DiamondTree& left() const { return *node_->left; }
  const DiamondTree& right() const { return *node_->right; }

  /// Structural leaf count (an M leaf counts once).
  int leaf_count() const { return node_->leaves; }
  int node_count() const { return node_->leaves - 1; }
  /// Leaf count with M weighted as two X leaves.
  int weighted_leaf_count() const;
  int count(Leaf tag) const;

  /// Canonical total order: leaf count first, then X < Zeta < M for leaves,
  /// then left child, then right child.
  friend int compare(const DiamondTree& x, const DiamondTree& y);
  friend bool operator<(const DiamondTree& x, const DiamondTree& y) { return compare(x, y) < 0; }
  friend bool operator==(const DiamondTree& x, const DiamondTree& y) { return compare(x, y) == 0; }

  /// S-expression, e.g. `(d X (d X X))`.
  std::string to_string() const;
  std::string to_latex() const;

 private:
  struct Node {
    bool is_leaf = true;
    Leaf tag = Leaf::X;
    int leaves = 1;
    std::shared_ptr<const DiamondTree> left;
    std::shared_ptr<const DiamondTree> right;
  };
  explicit DiamondTree(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  friend DiamondTree diamond(const DiamondTree& t1, const DiamondTree& t2);
  std::shared_ptr<const Node> node_;
};

DiamondTree diamond(const DiamondTree& t1, const DiamondTree& t2);

inline const DiamondTree& leaf_x() {
  static const DiamondTree t = DiamondTree::leaf(Leaf::X);
  return t;
}
inline const DiamondTree& leaf_zeta() {
  static const DiamondTree t = DiamondTree::leaf(Leaf::Zeta);
  return t;
}
inline const DiamondTree& leaf_m() {
  static const DiamondTree t = DiamondTree::leaf(Leaf::M);
  return t;
}

/// Linear combination of canonical trees with nonzero polynomial coefficients.
class Forest {
 public:
  Forest() = default;
  Forest(const DiamondTree& t, Poly coeff = Poly{1});

  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }
  const std::map<DiamondTree, Poly>& terms() const { return terms_; }
  /// Coefficient of t (zero polynomial when absent).
  Poly coefficient(const DiamondTree& t) const;

  void add(const DiamondTree& t, const Poly& coeff);
  Forest& operator+=(const Forest& other);
  friend Forest operator+(Forest x, const Forest& y) { return x += y; }
  friend Forest operator*(const Poly& s, const Forest& f);
  friend bool operator==(const Forest& x, const Forest& y) { return x.terms_ == y.terms_; }

  /// Apply a coefficient map termwise, dropping terms that become zero.
  template <class Fn>
  Forest map_coefficients(Fn&& fn) const {
    Forest out;
    for (const auto& [t, p] : terms_) out.add(t, fn(p));
    return out;
  }

  std::string to_string() const;
  std::string to_latex() const;

 private:
  std::map<DiamondTree, Poly> terms_;
};

/// Bilinear extension of the diamond product.
Forest forest_diamond(const Forest& f1, const Forest& f2);

enum class ForestMode { scalar, triple };

/// G^2 ... G^max_order (index i of the result holds G^{i+2}).
std::vector<Forest> g_forests(int max_order, ForestMode mode);

/// F~_0 ... F~_max_index over the leaf alphabet {X, M}.
std::vector<Forest> f_tilde_forests(int max_index);

/// Rewrite every X⋄X subtree as the leaf M.
DiamondTree substitute_m(const DiamondTree& t);
Forest substitute_m(const Forest& f);

/// Replace M leaves by X⋄X.
DiamondTree expand_m(const DiamondTree& t);

struct BoundTerm {
  DiamondTree tree;
  std::complex<double> coeff;
};

std::vector<BoundTerm> bind_coefficients(const Forest& f, std::complex<double> a,
                                         std::complex<double> b, std::complex<double> c);

/// Exact binding at a Gaussian-rational point; zero terms are dropped.
Forest bind_exact(const Forest& f, const GaussRational& a, const GaussRational& b,
                  const GaussRational& c);

}  // namespace diamonds
