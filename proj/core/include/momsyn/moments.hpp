#pragma once

#include <vector>

#include <Eigen/Core>

#include "momsyn/polynomial.hpp"

namespace momsyn {

/// Truncated moment sequence y_alpha of one measure, indexed by a graded
/// monomial basis of degree 2k.
struct MomentVector {
  MonomialBasis basis;
  Eigen::VectorXd values;

  static MomentVector zero(const MonomialBasis& basis);
  /// Moments of a Dirac measure at `point`, scaled by `mass`.
  static MomentVector dirac(const MonomialBasis& basis, const Eigen::VectorXd& point,
                            double mass = 1.0);
  double mass() const { return values[0]; }
};

/// Riesz functional L_y(p) = sum_alpha p_alpha y_alpha.
double riesz(const MomentVector& y, const Polynomial& p);

/// Index table mapping moment-matrix slots to positions in the degree-2k
/// basis: slot (a, b) reads moment alpha_a + alpha_b.
struct MomentIndexTable {
  int side = 0;
  std::vector<int> flat;  // row-major side*side

  int operator()(int a, int b) const { return flat[static_cast<size_t>(a) * side + b]; }
};

MomentIndexTable moment_index_table(const MonomialBasis& basis2k, int k);

/// Localizing-matrix slot structure: slot (a, b) reads
/// sum_gamma h_gamma * y[gamma + alpha_a + alpha_b].
struct LocalizingIndexTable {
  int side = 0;
  std::vector<std::vector<std::pair<int, double>>> flat;  // row-major side*side

  const std::vector<std::pair<int, double>>& operator()(int a, int b) const {
    return flat[static_cast<size_t>(a) * side + b];
  }
};

LocalizingIndexTable localizing_index_table(const MonomialBasis& basis2k, const Polynomial& h,
                                            int k_h);

/// M_k(y): symmetric, PSD whenever y are moments of a measure.
Eigen::MatrixXd moment_matrix(const MomentVector& y, int k);

/// M_{k_h}(h, y): PSD whenever y comes from a measure supported on {h >= 0}.
Eigen::MatrixXd localizing_matrix(const MomentVector& y, const Polynomial& h, int k_h);

}  // namespace momsyn
