#include "momsyn/moments.hpp"

#include <stdexcept>

namespace momsyn {

MomentVector MomentVector::zero(const MonomialBasis& basis) {
  return MomentVector{basis, Eigen::VectorXd::Zero(basis.size())};
}

MomentVector MomentVector::dirac(const MonomialBasis& basis, const Eigen::VectorXd& point,
                                 double mass) {
  if (point.size() != basis.nvars()) throw std::invalid_argument("dirac: point length mismatch");
  MomentVector y = zero(basis);
  for (int i = 0; i < basis.size(); ++i) {
    y.values[i] = mass * Polynomial::monomial(basis[i], 1.0).evaluate(point);
  }
  return y;
}

double riesz(const MomentVector& y, const Polynomial& p) {
  if (p.nvars() != y.basis.nvars()) throw std::invalid_argument("riesz: nvars mismatch");
  if (p.degree() > y.basis.max_degree()) {
    throw std::invalid_argument("riesz: polynomial degree exceeds the moment truncation");
  }
  double sum = 0.0;
  for (const auto& [mi, c] : p.terms()) {
    const int pos = y.basis.position(mi);
    if (pos < 0) throw std::invalid_argument("riesz: monomial outside the basis");
    sum += c * y.values[pos];
  }
  return sum;
}

MomentIndexTable moment_index_table(const MonomialBasis& basis2k, int k) {
  if (2 * k > basis2k.max_degree()) {
    throw std::invalid_argument("moment_index_table: moments truncated below degree 2k");
  }
  const int side = basis2k.size_up_to_degree(k);
  MomentIndexTable table;
  table.side = side;
  table.flat.resize(static_cast<size_t>(side) * side);
  for (int a = 0; a < side; ++a) {
    for (int b = a; b < side; ++b) {
      const int pos = basis2k.position(basis2k[a].plus(basis2k[b]));
      table.flat[static_cast<size_t>(a) * side + b] = pos;
      table.flat[static_cast<size_t>(b) * side + a] = pos;
    }
  }
  return table;
}

LocalizingIndexTable localizing_index_table(const MonomialBasis& basis2k, const Polynomial& h,
                                            int k_h) {
  if (h.nvars() != basis2k.nvars()) {
    throw std::invalid_argument("localizing_index_table: nvars mismatch");
  }
  if (2 * k_h + h.degree() > basis2k.max_degree()) {
    throw std::invalid_argument("localizing_index_table: 2*k_h + deg h exceeds the truncation");
  }
  const int side = basis2k.size_up_to_degree(k_h);
  LocalizingIndexTable table;
  table.side = side;
  table.flat.resize(static_cast<size_t>(side) * side);
  for (int a = 0; a < side; ++a) {
    for (int b = a; b < side; ++b) {
      std::vector<std::pair<int, double>> refs;
      refs.reserve(h.term_count());
      const MultiIndex ab = basis2k[a].plus(basis2k[b]);
      for (const auto& [gamma, c] : h.terms()) {
        refs.emplace_back(basis2k.position(gamma.plus(ab)), c);
      }
      table.flat[static_cast<size_t>(a) * side + b] = refs;
      if (a != b) table.flat[static_cast<size_t>(b) * side + a] = std::move(refs);
    }
  }
  return table;
}

Eigen::MatrixXd moment_matrix(const MomentVector& y, int k) {
  const MomentIndexTable table = moment_index_table(y.basis, k);
  Eigen::MatrixXd M(table.side, table.side);
  for (int a = 0; a < table.side; ++a) {
    for (int b = a; b < table.side; ++b) {
      M(a, b) = M(b, a) = y.values[table(a, b)];
    }
  }
  return M;
}

Eigen::MatrixXd localizing_matrix(const MomentVector& y, const Polynomial& h, int k_h) {
  const LocalizingIndexTable table = localizing_index_table(y.basis, h, k_h);
  Eigen::MatrixXd M(table.side, table.side);
  for (int a = 0; a < table.side; ++a) {
    for (int b = a; b < table.side; ++b) {
      double v = 0.0;
      for (const auto& [pos, c] : table(a, b)) v += c * y.values[pos];
      M(a, b) = M(b, a) = v;
    }
  }
  return M;
}

}  // namespace momsyn
