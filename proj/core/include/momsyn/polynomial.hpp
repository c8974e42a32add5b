#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace momsyn {

/// Exponent vector of one monomial; entry i is the power of variable i.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> exps);

  static MultiIndex zeros(int nvars);
  /// Multi-index of x_var^power.
  static MultiIndex unit(int nvars, int var, int power = 1);

  int nvars() const { return static_cast<int>(exps_.size()); }
  int degree() const;
  int operator[](int i) const { return exps_[static_cast<size_t>(i)]; }
  const std::vector<int>& exponents() const { return exps_; }

  MultiIndex plus(const MultiIndex& other) const;
  /// Appends `count` zero exponents (embedding into a larger variable space).
  MultiIndex padded(int count) const;

  bool operator==(const MultiIndex& other) const { return exps_ == other.exps_; }
  std::string str() const;

 private:
  std::vector<int> exps_;
};

/// Graded lexicographic order: lower total degree first; within a degree,
/// earlier variables carry higher weight (x1^2 precedes x1*x2 precedes x2^2).
struct GradedLexLess {
  bool operator()(const MultiIndex& a, const MultiIndex& b) const;
};

struct MultiIndexHash {
  size_t operator()(const MultiIndex& mi) const;
};

int binomial(int n, int k);

/// Sparse multivariate polynomial with real coefficients over a fixed number
/// of variables. Zero coefficients are never stored.
class Polynomial {
 public:
  using TermMap = std::map<MultiIndex, double, GradedLexLess>;

  Polynomial() = default;
  explicit Polynomial(int nvars) : nvars_(nvars) {}

  static Polynomial zero(int nvars) { return Polynomial(nvars); }
  static Polynomial constant(int nvars, double value);
  static Polynomial variable(int nvars, int var);
  static Polynomial monomial(const MultiIndex& mi, double coeff);

  int nvars() const { return nvars_; }
  /// Max total degree of a stored term; the zero polynomial has degree 0.
  int degree() const;
  bool is_zero() const { return terms_.empty(); }
  size_t term_count() const { return terms_.size(); }
  const TermMap& terms() const { return terms_; }

  double coeff(const MultiIndex& mi) const;
  void add_term(const MultiIndex& mi, double coeff);
  double max_abs_coeff() const;

  Polynomial operator+(const Polynomial& other) const;
  Polynomial operator-(const Polynomial& other) const;
  Polynomial operator*(const Polynomial& other) const;
  Polynomial operator*(double s) const { return scaled(s); }
  Polynomial operator-() const { return scaled(-1.0); }
  Polynomial scaled(double s) const;

  Polynomial differentiate(int var) const;
  double evaluate(const Eigen::VectorXd& point) const;

  /// Replaces variable `var` by the polynomial `value` (same variable space).
  Polynomial substitute(int var, const Polynomial& value) const;
  /// Replaces variable `var` by the affine expression a + b * x_var.
  Polynomial substitute_affine(int var, double a, double b) const;
  /// Reinterprets this polynomial over `new_nvars` variables, mapping old
  /// variable i to var_map[i].
  Polynomial embedded(int new_nvars, const std::vector<int>& var_map) const;
  /// Appends extra trailing variables with zero exponent.
  Polynomial padded(int extra_vars) const;

  bool near_equal(const Polynomial& other, double tol) const;
  std::string str() const;

 private:
  int nvars_ = 0;
  TermMap terms_;
};

inline Polynomial operator*(double s, const Polynomial& p) { return p.scaled(s); }

/// All multi-indices over `nvars` variables with total degree <= max_degree,
/// in graded lexicographic order; position 0 is the constant monomial.
class MonomialBasis {
 public:
  MonomialBasis() = default;
  MonomialBasis(int nvars, int max_degree);

  int nvars() const { return nvars_; }
  int max_degree() const { return max_degree_; }
  int size() const { return static_cast<int>(elements_.size()); }
  const MultiIndex& operator[](int i) const { return elements_[static_cast<size_t>(i)]; }
  const std::vector<MultiIndex>& elements() const { return elements_; }

  /// Position of a multi-index, or -1 when it lies outside the basis.
  int position(const MultiIndex& mi) const;
  /// Number of basis elements of degree <= d (a graded basis is prefix-closed).
  int size_up_to_degree(int d) const { return binomial(nvars_ + d, d); }

 private:
  int nvars_ = 0;
  int max_degree_ = 0;
  std::vector<MultiIndex> elements_;
  std::unordered_map<MultiIndex, int, MultiIndexHash> index_;
};

MonomialBasis monomial_basis(int nvars, int degree);

/// L_f v = dv/dt + sum_k dv/dx_k * f_k, over variables (t, x_1..x_n).
Polynomial lie_f(const Polynomial& v, const std::vector<Polynomial>& f);

/// [L_g v]_j = sum_k dv/dx_k * g_kj, over variables (t, x_1..x_n).
std::vector<Polynomial> lie_g(const Polynomial& v,
                              const std::vector<std::vector<Polynomial>>& g);

/// L_F v = L_f v + sum_j [L_g v]_j * u_j, over variables (t, x, u).
Polynomial lie_F(const Polynomial& v, const std::vector<Polynomial>& f,
                 const std::vector<std::vector<Polynomial>>& g);

}  // namespace momsyn
