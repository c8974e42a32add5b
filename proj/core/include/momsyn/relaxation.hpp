#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "momsyn/moments.hpp"
#include "momsyn/ocp.hpp"
#include "momsyn/polynomial.hpp"

namespace momsyn {

/// Records mapping the internal assembly frame (time in [0,1], states in
/// [-1,1]^n, inputs in [-1,1]^m) back to the original coordinates.
struct ScalingInfo {
  double horizon = 1.0;           // physical T (fixed) or T0 (free)
  Eigen::VectorXd x_center;       // x = center + halfwidth .* x_scaled
  Eigen::VectorXd x_halfwidth;
  AffineInputMap input_map;       // u = offset + scale .* u_normalized

  Eigen::VectorXd scale_state(const Eigen::VectorXd& x_phys) const {
    return (x_phys - x_center).cwiseQuotient(x_halfwidth);
  }
  Eigen::VectorXd unscale_state(const Eigen::VectorXd& x_scaled) const {
    return x_center + x_halfwidth.cwiseProduct(x_scaled);
  }
};

/// Problem restated in the assembly frame. All moment data, equality rows and
/// PSD blocks refer to these coordinates.
struct ScaledProblem {
  OCProblem ocp;        // horizon == 1, unit boxes
  ScalingInfo scaling;
};

/// p(c + W x) for a polynomial over the state variables only.
Polynomial scale_state_polynomial(const Polynomial& p, const VariableBox& box);
/// Rescales coefficients to unit max magnitude (zero polynomials pass through).
Polynomial normalize_coefficients(const Polynomial& p);

ScaledProblem scale_problem(const NormalizedProblem& normalized);

enum class MeasureKind { kMu, kMuT, kGamma, kSigmaPlus, kSigmaMinus, kSigmaHat };

std::string measure_name(MeasureKind kind, int j);

/// One measure's slot in the global moment vector.
struct MeasureSpace {
  MeasureKind kind;
  int j = 0;  // input index for the sigma families, 0 otherwise
  int offset = 0;
  MonomialBasis basis;  // degree-2k basis over the measure's variables

  int size() const { return basis.size(); }
};

/// Variable layout of (P_k): mu over (t,x,u); muT over x (fixed mode) or
/// (t,x) (free mode); gamma and the sigma families over (t,x).
struct VariableLayout {
  int k = 0;
  int n = 0;
  int m = 0;
  TimeMode time_mode = TimeMode::kFixed;
  std::vector<MeasureSpace> measures;
  int total = 0;

  const MeasureSpace& find(MeasureKind kind, int j = 0) const;
  /// Copies one measure's moments out of the global vector.
  MomentVector slice(MeasureKind kind, int j, const Eigen::VectorXd& y) const;
};

/// Minimum admissible relaxation order for a scaled problem.
int min_relaxation_order(const ScaledProblem& sp);
/// Degree cap for Liouville / dynamics-split test monomials.
int test_degree_cap(const ScaledProblem& sp, int k);

VariableLayout make_layout(const ScaledProblem& sp, int k);

struct EqualityRow {
  std::vector<std::pair<int, double>> coeffs;
  double rhs = 0.0;
  std::string tag;
};

std::vector<EqualityRow> liouville_rows(const ScaledProblem& sp, const VariableLayout& layout,
                                        std::optional<int> degree_cap = std::nullopt);
std::vector<EqualityRow> dynamics_split_rows(const ScaledProblem& sp,
                                             const VariableLayout& layout,
                                             std::optional<int> degree_cap = std::nullopt);
std::vector<EqualityRow> box_decomposition_rows(const VariableLayout& layout);
std::vector<EqualityRow> marginal_rows(const VariableLayout& layout);

/// One affine entry of a PSD block: constant + sum coeff * y[index].
struct BlockEntry {
  double constant = 0.0;
  std::vector<std::pair<int, double>> terms;
};

/// Symmetric PSD block stored as its upper triangle, row-major:
/// slot (r, c) with r <= c lives at index r*side - r*(r-1)/2 + (c - r).
struct PSDBlock {
  std::string name;
  int side = 0;
  std::vector<BlockEntry> entries;

  static int slot(int r, int c, int side) {
    return r * side - r * (r - 1) / 2 + (c - r);
  }
  BlockEntry& at(int r, int c) { return entries[static_cast<size_t>(slot(r, c, side))]; }
  const BlockEntry& at(int r, int c) const {
    return entries[static_cast<size_t>(slot(r, c, side))];
  }
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& y) const;
};

std::vector<PSDBlock> psd_blocks(const ScaledProblem& sp, const VariableLayout& layout);

using SparseRow = std::vector<std::pair<int, double>>;

struct RelaxationMeta {
  int k = 0;
  TimeMode time_mode = TimeMode::kFixed;
  ScalingInfo scaling;
  Eigen::VectorXd row_scale;          // original row / scale = stored row
  std::vector<std::string> row_tags;
  std::vector<int> slack_rows;        // rows that merely define a slack variable
  int dropped_rows = 0;
};

/// Conic problem  min c.y  s.t.  A y = b,  every PSD block evaluated at y PSD.
struct ConicProblem {
  int num_vars = 0;
  Eigen::VectorXd objective;
  std::vector<SparseRow> rows;
  Eigen::VectorXd b;
  std::vector<PSDBlock> blocks;
  RelaxationMeta meta;

  int num_rows() const { return static_cast<int>(rows.size()); }
};

struct RelaxationConfig {
  int k = 0;
  std::optional<int> test_degree_cap;  // override for the d_v rule
  bool redundancy_filter = true;       // drop zero rows and exact duplicates
};

/// Fully assembled relaxation, keeping the layout and scaled problem the
/// downstream synthesis steps need.
struct Relaxation {
  ConicProblem conic;
  VariableLayout layout;
  ScaledProblem scaled;
};

Relaxation build_relaxation(const NormalizedProblem& normalized, const RelaxationConfig& config);
ConicProblem assemble(const NormalizedProblem& normalized, const RelaxationConfig& config);

nlohmann::json conic_to_json(const ConicProblem& problem);
ConicProblem conic_from_json(const nlohmann::json& j);

}  // namespace momsyn
