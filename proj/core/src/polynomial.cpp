#include "momsyn/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace momsyn {

MultiIndex::MultiIndex(std::vector<int> exps) : exps_(std::move(exps)) {
  for (int e : exps_) {
    if (e < 0) throw std::invalid_argument("MultiIndex: negative exponent");
  }
}

MultiIndex MultiIndex::zeros(int nvars) {
  return MultiIndex(std::vector<int>(static_cast<size_t>(nvars), 0));
}

MultiIndex MultiIndex::unit(int nvars, int var, int power) {
  if (var < 0 || var >= nvars) throw std::invalid_argument("MultiIndex::unit: var out of range");
  std::vector<int> e(static_cast<size_t>(nvars), 0);
  e[static_cast<size_t>(var)] = power;
  return MultiIndex(std::move(e));
}

int MultiIndex::degree() const {
  return std::accumulate(exps_.begin(), exps_.end(), 0);
}

MultiIndex MultiIndex::plus(const MultiIndex& other) const {
  if (other.nvars() != nvars()) throw std::invalid_argument("MultiIndex::plus: nvars mismatch");
  std::vector<int> e(exps_);
  for (size_t i = 0; i < e.size(); ++i) e[i] += other.exps_[i];
  return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::padded(int count) const {
  std::vector<int> e(exps_);
  e.resize(e.size() + static_cast<size_t>(count), 0);
  return MultiIndex(std::move(e));
}

std::string MultiIndex::str() const {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < exps_.size(); ++i) os << (i ? "," : "") << exps_[i];
  os << ")";
  return os.str();
}

bool GradedLexLess::operator()(const MultiIndex& a, const MultiIndex& b) const {
  const int da = a.degree(), db = b.degree();
  if (da != db) return da < db;
  // Within a degree the larger leading exponents come first.
  return std::lexicographical_compare(b.exponents().begin(), b.exponents().end(),
                                      a.exponents().begin(), a.exponents().end());
}

size_t MultiIndexHash::operator()(const MultiIndex& mi) const {
  size_t h = 1469598103934665603ull;
  for (int e : mi.exponents()) {
    h ^= static_cast<size_t>(e);
    h *= 1099511628211ull;
  }
  return h;
}

int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return static_cast<int>(r);
}

Polynomial Polynomial::constant(int nvars, double value) {
  Polynomial p(nvars);
  p.add_term(MultiIndex::zeros(nvars), value);
  return p;
}

Polynomial Polynomial::variable(int nvars, int var) {
  Polynomial p(nvars);
  p.add_term(MultiIndex::unit(nvars, var), 1.0);
  return p;
}

Polynomial Polynomial::monomial(const MultiIndex& mi, double coeff) {
  Polynomial p(mi.nvars());
  p.add_term(mi, coeff);
  return p;
}

int Polynomial::degree() const {
  if (terms_.empty()) return 0;
  return terms_.rbegin()->first.degree();
}

double Polynomial::coeff(const MultiIndex& mi) const {
  auto it = terms_.find(mi);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::add_term(const MultiIndex& mi, double coeff) {
  if (mi.nvars() != nvars_) throw std::invalid_argument("Polynomial::add_term: nvars mismatch");
  auto [it, inserted] = terms_.try_emplace(mi, coeff);
  if (!inserted) it->second += coeff;
  if (it->second == 0.0) terms_.erase(it);
}

double Polynomial::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& [mi, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
  if (other.nvars_ != nvars_) throw std::invalid_argument("Polynomial::add: nvars mismatch");
  Polynomial out(*this);
  for (const auto& [mi, c] : other.terms_) out.add_term(mi, c);
  return out;
}

Polynomial Polynomial::operator-(const Polynomial& other) const {
  if (other.nvars_ != nvars_) throw std::invalid_argument("Polynomial::sub: nvars mismatch");
  Polynomial out(*this);
  for (const auto& [mi, c] : other.terms_) out.add_term(mi, -c);
  return out;
}

Polynomial Polynomial::operator*(const Polynomial& other) const {
  if (other.nvars_ != nvars_) throw std::invalid_argument("Polynomial::mul: nvars mismatch");
  Polynomial out(nvars_);
  for (const auto& [a, ca] : terms_) {
    for (const auto& [b, cb] : other.terms_) {
      out.add_term(a.plus(b), ca * cb);
    }
  }
  return out;
}

Polynomial Polynomial::scaled(double s) const {
  Polynomial out(nvars_);
  if (s == 0.0) return out;
  for (const auto& [mi, c] : terms_) out.add_term(mi, c * s);
  return out;
}

Polynomial Polynomial::differentiate(int var) const {
  if (var < 0 || var >= nvars_) throw std::invalid_argument("Polynomial::differentiate: var out of range");
  Polynomial out(nvars_);
  for (const auto& [mi, c] : terms_) {
    const int e = mi[var];
    if (e == 0) continue;
    std::vector<int> exps = mi.exponents();
    exps[static_cast<size_t>(var)] = e - 1;
    out.add_term(MultiIndex(std::move(exps)), c * e);
  }
  return out;
}

namespace {
double int_pow(double x, int e) {
  double r = 1.0;
  while (e > 0) {
    if (e & 1) r *= x;
    x *= x;
    e >>= 1;
  }
  return r;
}
}  // namespace

double Polynomial::evaluate(const Eigen::VectorXd& point) const {
  if (point.size() != nvars_) throw std::invalid_argument("Polynomial::evaluate: point length mismatch");
  double sum = 0.0;
  for (const auto& [mi, c] : terms_) {
    double v = c;
    for (int i = 0; i < nvars_; ++i) {
      if (mi[i] > 0) v *= int_pow(point[i], mi[i]);
    }
    sum += v;
  }
  return sum;
}

Polynomial Polynomial::substitute(int var, const Polynomial& value) const {
  if (var < 0 || var >= nvars_) throw std::invalid_argument("Polynomial::substitute: var out of range");
  if (value.nvars() != nvars_) throw std::invalid_argument("Polynomial::substitute: nvars mismatch");
  // Cache powers of the replacement polynomial up to the max exponent of var.
  int max_e = 0;
  for (const auto& [mi, c] : terms_) max_e = std::max(max_e, mi[var]);
  std::vector<Polynomial> powers;
  powers.push_back(Polynomial::constant(nvars_, 1.0));
  for (int e = 1; e <= max_e; ++e) powers.push_back(powers.back() * value);

  Polynomial out(nvars_);
  for (const auto& [mi, c] : terms_) {
    std::vector<int> rest = mi.exponents();
    const int e = rest[static_cast<size_t>(var)];
    rest[static_cast<size_t>(var)] = 0;
    Polynomial term = Polynomial::monomial(MultiIndex(std::move(rest)), c) * powers[static_cast<size_t>(e)];
    out = out + term;
  }
  return out;
}

Polynomial Polynomial::substitute_affine(int var, double a, double b) const {
  Polynomial repl = Polynomial::constant(nvars_, a) + Polynomial::variable(nvars_, var).scaled(b);
  return substitute(var, repl);
}

Polynomial Polynomial::embedded(int new_nvars, const std::vector<int>& var_map) const {
  if (static_cast<int>(var_map.size()) != nvars_) {
    throw std::invalid_argument("Polynomial::embedded: var_map length mismatch");
  }
  Polynomial out(new_nvars);
  for (const auto& [mi, c] : terms_) {
    std::vector<int> e(static_cast<size_t>(new_nvars), 0);
    for (int i = 0; i < nvars_; ++i) {
      const int target = var_map[static_cast<size_t>(i)];
      if (target < 0 || target >= new_nvars) throw std::invalid_argument("Polynomial::embedded: target out of range");
      e[static_cast<size_t>(target)] += mi[i];
    }
    out.add_term(MultiIndex(std::move(e)), c);
  }
  return out;
}

Polynomial Polynomial::padded(int extra_vars) const {
  Polynomial out(nvars_ + extra_vars);
  for (const auto& [mi, c] : terms_) out.add_term(mi.padded(extra_vars), c);
  return out;
}

bool Polynomial::near_equal(const Polynomial& other, double tol) const {
  if (other.nvars_ != nvars_) return false;
  Polynomial diff = *this - other;
  return diff.max_abs_coeff() <= tol;
}

std::string Polynomial::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [mi, c] : terms_) {
    os << (first ? "" : " + ") << c << "*x^" << mi.str();
    first = false;
  }
  return os.str();
}

namespace {
void enumerate_degree(int nvars, int var, int remaining, std::vector<int>& current,
                      std::vector<MultiIndex>& out) {
  if (var == nvars - 1) {
    current[static_cast<size_t>(var)] = remaining;
    out.emplace_back(current);
    current[static_cast<size_t>(var)] = 0;
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[static_cast<size_t>(var)] = e;
    enumerate_degree(nvars, var + 1, remaining - e, current, out);
  }
  current[static_cast<size_t>(var)] = 0;
}
}  // namespace

MonomialBasis::MonomialBasis(int nvars, int max_degree) : nvars_(nvars), max_degree_(max_degree) {
  if (nvars < 1) throw std::invalid_argument("MonomialBasis: nvars must be >= 1");
  if (max_degree < 0) throw std::invalid_argument("MonomialBasis: degree must be >= 0");
  elements_.reserve(static_cast<size_t>(binomial(nvars + max_degree, max_degree)));
  std::vector<int> current(static_cast<size_t>(nvars), 0);
  for (int d = 0; d <= max_degree; ++d) {
    enumerate_degree(nvars, 0, d, current, elements_);
  }
  index_.reserve(elements_.size());
  for (size_t i = 0; i < elements_.size(); ++i) {
    index_.emplace(elements_[i], static_cast<int>(i));
  }
}

int MonomialBasis::position(const MultiIndex& mi) const {
  auto it = index_.find(mi);
  return it == index_.end() ? -1 : it->second;
}

MonomialBasis monomial_basis(int nvars, int degree) { return MonomialBasis(nvars, degree); }

Polynomial lie_f(const Polynomial& v, const std::vector<Polynomial>& f) {
  const int n = static_cast<int>(f.size());
  if (v.nvars() != n + 1) throw std::invalid_argument("lie_f: v must live over (t, x_1..x_n)");
  Polynomial out = v.differentiate(0);
  for (int k = 0; k < n; ++k) {
    if (f[static_cast<size_t>(k)].nvars() != n + 1) throw std::invalid_argument("lie_f: f_k nvars mismatch");
    out = out + v.differentiate(1 + k) * f[static_cast<size_t>(k)];
  }
  return out;
}

std::vector<Polynomial> lie_g(const Polynomial& v, const std::vector<std::vector<Polynomial>>& g) {
  const int n = static_cast<int>(g.size());
  if (n == 0) throw std::invalid_argument("lie_g: empty g");
  const int m = static_cast<int>(g[0].size());
  if (v.nvars() != n + 1) throw std::invalid_argument("lie_g: v must live over (t, x_1..x_n)");
  std::vector<Polynomial> out(static_cast<size_t>(m), Polynomial(n + 1));
  for (int k = 0; k < n; ++k) {
    if (static_cast<int>(g[static_cast<size_t>(k)].size()) != m) {
      throw std::invalid_argument("lie_g: ragged g");
    }
    const Polynomial dv = v.differentiate(1 + k);
    if (dv.is_zero()) continue;
    for (int j = 0; j < m; ++j) {
      out[static_cast<size_t>(j)] = out[static_cast<size_t>(j)] + dv * g[static_cast<size_t>(k)][static_cast<size_t>(j)];
    }
  }
  return out;
}

Polynomial lie_F(const Polynomial& v, const std::vector<Polynomial>& f,
                 const std::vector<std::vector<Polynomial>>& g) {
  const int n = static_cast<int>(f.size());
  const int m = g.empty() ? 0 : static_cast<int>(g[0].size());
  Polynomial out = lie_f(v, f).padded(m);
  const std::vector<Polynomial> lg = lie_g(v, g);
  for (int j = 0; j < m; ++j) {
    const Polynomial uj = Polynomial::variable(1 + n + m, 1 + n + j);
    out = out + lg[static_cast<size_t>(j)].padded(m) * uj;
  }
  return out;
}

}  // namespace momsyn
