#include "momsyn/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace momsyn {

Polynomial scale_state_polynomial(const Polynomial& p, const VariableBox& box) {
  Polynomial out = p;
  for (int i = 0; i < p.nvars(); ++i) {
    out = out.substitute_affine(i, box.center()[i], box.halfwidth()[i]);
  }
  return out;
}

Polynomial normalize_coefficients(const Polynomial& p) {
  const double m = p.max_abs_coeff();
  if (m == 0.0) return p;
  return p.scaled(1.0 / m);
}

ScaledProblem scale_problem(const NormalizedProblem& normalized) {
  const OCProblem& p = normalized.problem;
  const auto box = bounding_box(p.X);
  if (!box) {
    throw std::invalid_argument("scale_problem: X has no derivable enclosing box");
  }
  const double T = p.horizon;
  const Eigen::VectorXd c = box->center();
  const Eigen::VectorXd w = box->halfwidth();
  const int n = p.n, m = p.m;

  // t = T*tau, x_i = c_i + w_i * xs_i applied to a polynomial over (t, x...).
  auto to_frame = [&](const Polynomial& q) {
    Polynomial out = q.substitute_affine(0, 0.0, T);
    for (int i = 0; i < n; ++i) out = out.substitute_affine(1 + i, c[i], w[i]);
    return out;
  };

  ScaledProblem sp;
  sp.scaling = ScalingInfo{T, c, w, normalized.input_map};
  OCProblem& q = sp.ocp;
  q.n = n;
  q.m = m;
  q.x0 = (p.x0 - c).cwiseQuotient(w);
  q.horizon = 1.0;
  q.time_mode = p.time_mode;
  q.U.lower = Eigen::VectorXd::Constant(m, -1.0);
  q.U.upper = Eigen::VectorXd::Constant(m, 1.0);

  // dxs_i/dtau = (T/w_i) (f_i + sum_j g_ij u_j) evaluated in frame coordinates.
  q.f.reserve(static_cast<size_t>(n));
  q.g.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    q.f.push_back(to_frame(p.f[static_cast<size_t>(i)]).scaled(T / w[i]));
    for (int j = 0; j < m; ++j) {
      q.g[static_cast<size_t>(i)].push_back(
          to_frame(p.g[static_cast<size_t>(i)][static_cast<size_t>(j)]).scaled(T / w[i]));
    }
  }

  // Running cost picks up the dt = T dtau Jacobian; terminal cost only the
  // state substitution, so objective values need no unscaling.
  Polynomial h = p.running_cost.substitute_affine(0, 0.0, T);
  for (int i = 0; i < n; ++i) h = h.substitute_affine(1 + i, c[i], w[i]);
  q.running_cost = h.scaled(T);
  q.terminal_cost = scale_state_polynomial(p.terminal_cost, *box);

  q.X.nvars = n;
  for (const auto& hx : p.X.inequalities) {
    q.X.inequalities.push_back(normalize_coefficients(scale_state_polynomial(hx, *box)));
  }
  q.XT.nvars = n;
  for (const auto& ht : p.XT.inequalities) {
    q.XT.inequalities.push_back(normalize_coefficients(scale_state_polynomial(ht, *box)));
  }
  return sp;
}

std::string measure_name(MeasureKind kind, int j) {
  switch (kind) {
    case MeasureKind::kMu: return "mu";
    case MeasureKind::kMuT: return "muT";
    case MeasureKind::kGamma: return "gamma";
    case MeasureKind::kSigmaPlus: return "sigma+" + std::to_string(j + 1);
    case MeasureKind::kSigmaMinus: return "sigma-" + std::to_string(j + 1);
    case MeasureKind::kSigmaHat: return "sigma^" + std::to_string(j + 1);
  }
  return "?";
}

const MeasureSpace& VariableLayout::find(MeasureKind kind, int j) const {
  for (const auto& ms : measures) {
    if (ms.kind == kind && ms.j == j) return ms;
  }
  throw std::logic_error("VariableLayout::find: no such measure");
}

MomentVector VariableLayout::slice(MeasureKind kind, int j, const Eigen::VectorXd& y) const {
  const MeasureSpace& ms = find(kind, j);
  MomentVector out{ms.basis, y.segment(ms.offset, ms.size())};
  return out;
}

namespace {

int ceil_half(int d) { return (d + 1) / 2; }

/// Degree-raise of the Lie derivative: max(1, deg f, deg g + 1).
int lie_degree_raise(const ScaledProblem& sp) {
  int r = 1;
  for (const auto& fi : sp.ocp.f) {
    if (!fi.is_zero()) r = std::max(r, fi.degree());
  }
  for (const auto& row : sp.ocp.g) {
    for (const auto& gij : row) {
      if (!gij.is_zero()) r = std::max(r, gij.degree() + 1);
    }
  }
  return r;
}

}  // namespace

int min_relaxation_order(const ScaledProblem& sp) {
  const int r = lie_degree_raise(sp);
  // 1 + ceil(r/2) keeps the Liouville test family at degree >= 3 after the
  // d_v = 2k + 1 - r cap, so the rows see more than masses and first moments.
  int k_min = 1 + ceil_half(r);
  k_min = std::max(k_min, ceil_half(sp.ocp.running_cost.degree()));
  k_min = std::max(k_min, ceil_half(sp.ocp.terminal_cost.degree()));
  for (const auto& h : sp.ocp.X.inequalities) k_min = std::max(k_min, ceil_half(h.degree()));
  for (const auto& h : sp.ocp.XT.inequalities) k_min = std::max(k_min, ceil_half(h.degree()));
  return k_min;
}

int test_degree_cap(const ScaledProblem& sp, int k) {
  return 2 * k + 1 - lie_degree_raise(sp);
}

VariableLayout make_layout(const ScaledProblem& sp, int k) {
  const int k_min = min_relaxation_order(sp);
  if (k < k_min) {
    throw std::invalid_argument("relaxation order k=" + std::to_string(k) +
                                " below the minimum admissible order " + std::to_string(k_min));
  }
  const int n = sp.ocp.n, m = sp.ocp.m;
  VariableLayout layout;
  layout.k = k;
  layout.n = n;
  layout.m = m;
  layout.time_mode = sp.ocp.time_mode;

  const MonomialBasis basis_txu(1 + n + m, 2 * k);
  const MonomialBasis basis_tx(1 + n, 2 * k);
  const MonomialBasis basis_x(n, 2 * k);

  int offset = 0;
  auto push = [&](MeasureKind kind, int j, const MonomialBasis& basis) {
    layout.measures.push_back(MeasureSpace{kind, j, offset, basis});
    offset += basis.size();
  };
  push(MeasureKind::kMu, 0, basis_txu);
  push(MeasureKind::kMuT, 0, sp.ocp.time_mode == TimeMode::kFixed ? basis_x : basis_tx);
  push(MeasureKind::kGamma, 0, basis_tx);
  for (int j = 0; j < m; ++j) push(MeasureKind::kSigmaPlus, j, basis_tx);
  for (int j = 0; j < m; ++j) push(MeasureKind::kSigmaMinus, j, basis_tx);
  for (int j = 0; j < m; ++j) push(MeasureKind::kSigmaHat, j, basis_tx);
  layout.total = offset;
  return layout;
}

namespace {

/// Drops the leading time variable of a (t,x)-multi-index with zero t power.
MultiIndex drop_time(const MultiIndex& mi) {
  std::vector<int> e(mi.exponents().begin() + 1, mi.exponents().end());
  return MultiIndex(std::move(e));
}

void add_poly_to_row(EqualityRow& row, const Polynomial& p, const MeasureSpace& ms, double sign) {
  for (const auto& [mi, c] : p.terms()) {
    const int pos = ms.basis.position(mi);
    if (pos < 0) {
      throw std::logic_error("assembly: monomial of degree " + std::to_string(mi.degree()) +
                             " outside the degree-" + std::to_string(ms.basis.max_degree()) +
                             " basis of " + measure_name(ms.kind, ms.j));
    }
    row.coeffs.emplace_back(ms.offset + pos, sign * c);
  }
}

}  // namespace

std::vector<EqualityRow> liouville_rows(const ScaledProblem& sp, const VariableLayout& layout,
                                        std::optional<int> degree_cap) {
  const int n = sp.ocp.n;
  const int d_v = degree_cap.value_or(test_degree_cap(sp, layout.k));
  const MonomialBasis tests(1 + n, d_v);
  const MeasureSpace& mu = layout.find(MeasureKind::kMu);
  const MeasureSpace& muT = layout.find(MeasureKind::kMuT);
  const bool fixed = sp.ocp.time_mode == TimeMode::kFixed;

  std::vector<EqualityRow> rows;
  rows.reserve(static_cast<size_t>(tests.size()));
  for (int i = 0; i < tests.size(); ++i) {
    const MultiIndex& vmi = tests[i];
    const Polynomial v = Polynomial::monomial(vmi, 1.0);
    EqualityRow row;
    row.tag = "liouville:" + vmi.str();

    add_poly_to_row(row, lie_F(v, sp.ocp.f, sp.ocp.g), mu, 1.0);

    if (fixed) {
      // v(1, x): substitute t = 1 and read off the state monomial.
      Polynomial v_term = v.substitute(0, Polynomial::constant(1 + n, 1.0));
      for (const auto& [mi, c] : v_term.terms()) {
        const int pos = muT.basis.position(drop_time(mi));
        row.coeffs.emplace_back(muT.offset + pos, -c);
      }
    } else {
      const int pos = muT.basis.position(vmi);
      row.coeffs.emplace_back(muT.offset + pos, -1.0);
    }

    // Right-hand side -v(0, x0): only time-free test monomials contribute.
    double v0 = 0.0;
    if (vmi[0] == 0) {
      v0 = Polynomial::monomial(drop_time(vmi), 1.0).evaluate(sp.ocp.x0);
    }
    row.rhs = -v0;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<EqualityRow> dynamics_split_rows(const ScaledProblem& sp,
                                             const VariableLayout& layout,
                                             std::optional<int> degree_cap) {
  const int n = sp.ocp.n, m = sp.ocp.m;
  const int d_v = degree_cap.value_or(test_degree_cap(sp, layout.k));
  const MonomialBasis tests(1 + n, d_v);
  const MeasureSpace& mu = layout.find(MeasureKind::kMu);
  const MeasureSpace& gamma = layout.find(MeasureKind::kGamma);

  std::vector<EqualityRow> rows;
  rows.reserve(static_cast<size_t>(tests.size()));
  for (int i = 0; i < tests.size(); ++i) {
    const Polynomial v = Polynomial::monomial(tests[i], 1.0);
    EqualityRow row;
    row.tag = "dynsplit:" + tests[i].str();

    add_poly_to_row(row, lie_F(v, sp.ocp.f, sp.ocp.g), mu, 1.0);
    add_poly_to_row(row, lie_f(v, sp.ocp.f), gamma, -1.0);
    const std::vector<Polynomial> lg = lie_g(v, sp.ocp.g);
    for (int j = 0; j < m; ++j) {
      add_poly_to_row(row, lg[static_cast<size_t>(j)], layout.find(MeasureKind::kSigmaPlus, j), -1.0);
      add_poly_to_row(row, lg[static_cast<size_t>(j)], layout.find(MeasureKind::kSigmaMinus, j), 1.0);
    }
    row.rhs = 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<EqualityRow> box_decomposition_rows(const VariableLayout& layout) {
  const MeasureSpace& gamma = layout.find(MeasureKind::kGamma);
  std::vector<EqualityRow> rows;
  rows.reserve(static_cast<size_t>(layout.m * gamma.size()));
  for (int j = 0; j < layout.m; ++j) {
    const MeasureSpace& sp_ = layout.find(MeasureKind::kSigmaPlus, j);
    const MeasureSpace& sm = layout.find(MeasureKind::kSigmaMinus, j);
    const MeasureSpace& sh = layout.find(MeasureKind::kSigmaHat, j);
    for (int a = 0; a < gamma.size(); ++a) {
      EqualityRow row;
      row.tag = "box:" + std::to_string(j + 1) + ":" + gamma.basis[a].str();
      row.coeffs = {{sp_.offset + a, 1.0}, {sm.offset + a, 1.0}, {sh.offset + a, 1.0},
                    {gamma.offset + a, -1.0}};
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<EqualityRow> marginal_rows(const VariableLayout& layout) {
  const MeasureSpace& gamma = layout.find(MeasureKind::kGamma);
  const MeasureSpace& mu = layout.find(MeasureKind::kMu);
  std::vector<EqualityRow> rows;
  rows.reserve(static_cast<size_t>(gamma.size()));
  for (int a = 0; a < gamma.size(); ++a) {
    const int mu_pos = mu.basis.position(gamma.basis[a].padded(layout.m));
    EqualityRow row;
    row.tag = "marginal:" + gamma.basis[a].str();
    row.coeffs = {{gamma.offset + a, 1.0}, {mu.offset + mu_pos, -1.0}};
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd PSDBlock::evaluate(const Eigen::VectorXd& y) const {
  Eigen::MatrixXd M(side, side);
  for (int r = 0; r < side; ++r) {
    for (int c = r; c < side; ++c) {
      const BlockEntry& e = at(r, c);
      double v = e.constant;
      for (const auto& [idx, coef] : e.terms) v += coef * y[idx];
      M(r, c) = M(c, r) = v;
    }
  }
  return M;
}

namespace {

PSDBlock moment_block(const MeasureSpace& ms, int k, const std::string& name) {
  const MomentIndexTable table = moment_index_table(ms.basis, k);
  PSDBlock block;
  block.name = name;
  block.side = table.side;
  block.entries.resize(static_cast<size_t>(table.side) * (table.side + 1) / 2);
  for (int r = 0; r < table.side; ++r) {
    for (int c = r; c < table.side; ++c) {
      block.at(r, c).terms = {{ms.offset + table(r, c), 1.0}};
    }
  }
  return block;
}

PSDBlock localizing_block(const MeasureSpace& ms, const Polynomial& h, int k_h,
                          const std::string& name) {
  if (k_h < 0) {
    throw std::invalid_argument("relaxation order too small for localizing block " + name);
  }
  const LocalizingIndexTable table = localizing_index_table(ms.basis, h, k_h);
  PSDBlock block;
  block.name = name;
  block.side = table.side;
  block.entries.resize(static_cast<size_t>(table.side) * (table.side + 1) / 2);
  for (int r = 0; r < table.side; ++r) {
    for (int c = r; c < table.side; ++c) {
      auto& terms = block.at(r, c).terms;
      for (const auto& [pos, coef] : table(r, c)) {
        terms.emplace_back(ms.offset + pos, coef);
      }
    }
  }
  return block;
}

Polynomial time_box_poly(int nvars) {
  // tau (1 - tau) over a space whose first variable is time.
  const Polynomial t = Polynomial::variable(nvars, 0);
  return t - t * t;
}

}  // namespace

std::vector<PSDBlock> psd_blocks(const ScaledProblem& sp, const VariableLayout& layout) {
  const int n = sp.ocp.n, m = sp.ocp.m;
  const int k = layout.k;
  const bool fixed = sp.ocp.time_mode == TimeMode::kFixed;

  // State constraints lifted to (t,x) and (t,x,u).
  std::vector<int> x_to_tx(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) x_to_tx[static_cast<size_t>(i)] = 1 + i;
  std::vector<Polynomial> hx_tx, hx_txu;
  for (const auto& h : sp.ocp.X.inequalities) {
    Polynomial lifted = h.embedded(1 + n, x_to_tx);
    hx_txu.push_back(lifted.padded(m));
    hx_tx.push_back(std::move(lifted));
  }

  std::vector<PSDBlock> blocks;
  for (const auto& ms : layout.measures) {
    const std::string base = measure_name(ms.kind, ms.j);
    blocks.push_back(moment_block(ms, k, base + ".M"));

    if (ms.kind == MeasureKind::kMuT) {
      for (size_t i = 0; i < sp.ocp.XT.inequalities.size(); ++i) {
        const Polynomial& ht = sp.ocp.XT.inequalities[i];
        const int k_t = k - ceil_half(ht.degree());
        const Polynomial lifted = fixed ? ht : ht.embedded(1 + n, x_to_tx);
        blocks.push_back(localizing_block(ms, lifted, k_t, base + ".loc.T" + std::to_string(i + 1)));
      }
      if (!fixed) {
        blocks.push_back(localizing_block(ms, time_box_poly(1 + n), k - 1, base + ".loc.tau"));
      }
      continue;
    }

    const bool on_mu = ms.kind == MeasureKind::kMu;
    const auto& hx = on_mu ? hx_txu : hx_tx;
    for (size_t i = 0; i < hx.size(); ++i) {
      const int k_x = k - ceil_half(hx[i].degree());
      blocks.push_back(localizing_block(ms, hx[i], k_x, base + ".loc.X" + std::to_string(i + 1)));
    }
    if (on_mu) {
      for (int j = 0; j < m; ++j) {
        const Polynomial uj = Polynomial::variable(1 + n + m, 1 + n + j);
        const Polynomial h_u = Polynomial::constant(1 + n + m, 1.0) - uj * uj;
        blocks.push_back(localizing_block(ms, h_u, k - 1, base + ".loc.U" + std::to_string(j + 1)));
      }
    }
    const int nv = on_mu ? 1 + n + m : 1 + n;
    blocks.push_back(localizing_block(ms, time_box_poly(nv), k - 1, base + ".loc.tau"));
  }
  return blocks;
}

namespace {

struct CanonicalRow {
  SparseRow coeffs;
  double rhs = 0.0;
  double scale = 1.0;  // original = scale * canonical
  bool zero = false;
};

CanonicalRow canonicalize(const EqualityRow& row) {
  // Merge duplicate indices, then rescale to unit max coefficient with a
  // positive leading entry.
  std::map<int, double> merged;
  for (const auto& [idx, c] : row.coeffs) merged[idx] += c;
  CanonicalRow out;
  double max_abs = 0.0;
  for (const auto& [idx, c] : merged) max_abs = std::max(max_abs, std::abs(c));
  if (max_abs <= 1e-14) {
    if (std::abs(row.rhs) > 1e-12) {
      throw std::runtime_error("assembly produced an inconsistent empty row: " + row.tag);
    }
    out.zero = true;
    return out;
  }
  double scale = max_abs;
  for (const auto& [idx, c] : merged) {
    if (c != 0.0) {
      if (c < 0.0) scale = -scale;
      break;
    }
  }
  for (const auto& [idx, c] : merged) {
    const double v = c / scale;
    if (v != 0.0) out.coeffs.emplace_back(idx, v);
  }
  out.rhs = row.rhs / scale + 0.0;  // flush -0.0 so duplicate keys match
  out.scale = scale;
  return out;
}

std::string row_key(const CanonicalRow& row) {
  std::string key;
  key.reserve(row.coeffs.size() * 12 + 8);
  auto append = [&key](const void* p, size_t len) {
    key.append(reinterpret_cast<const char*>(p), len);
  };
  for (const auto& [idx, c] : row.coeffs) {
    append(&idx, sizeof(idx));
    append(&c, sizeof(c));
  }
  append(&row.rhs, sizeof(row.rhs));
  return key;
}

}  // namespace

Relaxation build_relaxation(const NormalizedProblem& normalized, const RelaxationConfig& config) {
  Relaxation rel;
  rel.scaled = scale_problem(normalized);
  rel.layout = make_layout(rel.scaled, config.k);
  const ScaledProblem& sp = rel.scaled;
  const VariableLayout& layout = rel.layout;

  std::vector<EqualityRow> all;
  for (auto&& r : liouville_rows(sp, layout, config.test_degree_cap)) all.push_back(std::move(r));
  for (auto&& r : dynamics_split_rows(sp, layout, config.test_degree_cap)) all.push_back(std::move(r));
  for (auto&& r : box_decomposition_rows(layout)) all.push_back(std::move(r));
  for (auto&& r : marginal_rows(layout)) all.push_back(std::move(r));

  ConicProblem& cp = rel.conic;
  cp.num_vars = layout.total;
  cp.meta.k = config.k;
  cp.meta.time_mode = sp.ocp.time_mode;
  cp.meta.scaling = sp.scaling;

  std::vector<SparseRow> kept_rows;
  std::vector<double> b, scales;
  std::vector<std::string> tags;
  std::vector<bool> is_slack;
  std::map<std::string, int> seen;
  for (const EqualityRow& row : all) {
    CanonicalRow canon = canonicalize(row);
    if (config.redundancy_filter) {
      if (canon.zero) {
        ++cp.meta.dropped_rows;
        continue;
      }
      const std::string key = row_key(canon);
      if (auto [it, inserted] = seen.try_emplace(key, static_cast<int>(kept_rows.size()));
          !inserted) {
        ++cp.meta.dropped_rows;
        continue;
      }
    } else if (canon.zero) {
      continue;  // An all-zero row is meaningless for any solver.
    }
    kept_rows.push_back(std::move(canon.coeffs));
    b.push_back(canon.rhs);
    scales.push_back(canon.scale);
    tags.push_back(row.tag);
    // sigma-hat appears nowhere else; a box row just defines that slack.
    is_slack.push_back(row.tag.rfind("box:", 0) == 0);
  }

  // Rank pass: duplicates are gone, but fixed-mode assemblies still carry a
  // few structural dependencies across the row families. A pivoted Cholesky
  // on the Gram matrix identifies a full-rank subset cheaply.
  std::vector<bool> keep(kept_rows.size(), true);
  if (config.redundancy_filter && !kept_rows.empty()) {
    const int m_all = static_cast<int>(kept_rows.size());
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m_all, m_all);
    {
      std::vector<std::vector<std::pair<int, double>>> rows_of_var(
          static_cast<size_t>(layout.total));
      for (int r = 0; r < m_all; ++r) {
        for (const auto& [idx, v] : kept_rows[static_cast<size_t>(r)]) {
          rows_of_var[static_cast<size_t>(idx)].emplace_back(r, v);
        }
      }
      for (const auto& hits : rows_of_var) {
        for (size_t a = 0; a < hits.size(); ++a) {
          for (size_t bidx = a; bidx < hits.size(); ++bidx) {
            G(hits[a].first, hits[bidx].first) += hits[a].second * hits[bidx].second;
            if (hits[a].first != hits[bidx].first) {
              G(hits[bidx].first, hits[a].first) += hits[a].second * hits[bidx].second;
            }
          }
        }
      }
    }
    const double tol = 1e-12 * G.diagonal().maxCoeff();
    Eigen::VectorXd diag = G.diagonal();
    std::vector<bool> used(static_cast<size_t>(m_all), false);
    std::vector<Eigen::VectorXd> l_cols;
    std::vector<int> chosen;
    for (int step = 0; step < m_all; ++step) {
      int best = -1;
      for (int r = 0; r < m_all; ++r) {
        if (!used[static_cast<size_t>(r)] && (best < 0 || diag[r] > diag[best])) best = r;
      }
      if (best < 0 || diag[best] <= tol) break;
      used[static_cast<size_t>(best)] = true;
      Eigen::VectorXd col = G.col(best);
      for (size_t c = 0; c < l_cols.size(); ++c) {
        col -= l_cols[c][best] * l_cols[c];
      }
      col /= std::sqrt(diag[best]);
      for (int r = 0; r < m_all; ++r) {
        if (!used[static_cast<size_t>(r)]) diag[r] -= col[r] * col[r];
      }
      l_cols.push_back(std::move(col));
      chosen.push_back(best);
    }
    if (static_cast<int>(chosen.size()) < m_all) {
      std::fill(keep.begin(), keep.end(), false);
      for (int r : chosen) keep[static_cast<size_t>(r)] = true;
    }
  }

  for (size_t r = 0; r < kept_rows.size(); ++r) {
    if (!keep[r]) {
      ++cp.meta.dropped_rows;
      continue;
    }
    if (is_slack[r]) cp.meta.slack_rows.push_back(cp.num_rows());
    cp.rows.push_back(std::move(kept_rows[r]));
    cp.meta.row_tags.push_back(std::move(tags[r]));
  }
  {
    std::vector<double> b2, s2;
    for (size_t r = 0; r < keep.size(); ++r) {
      if (keep[r]) {
        b2.push_back(b[r]);
        s2.push_back(scales[r]);
      }
    }
    cp.b = Eigen::Map<const Eigen::VectorXd>(b2.data(), static_cast<long>(b2.size()));
    cp.meta.row_scale = Eigen::Map<const Eigen::VectorXd>(s2.data(), static_cast<long>(s2.size()));
  }

  // Objective: Riesz coefficients of the running cost on mu and of the
  // terminal cost on muT.
  cp.objective = Eigen::VectorXd::Zero(layout.total);
  const MeasureSpace& mu = layout.find(MeasureKind::kMu);
  const MeasureSpace& muT = layout.find(MeasureKind::kMuT);
  for (const auto& [mi, c] : sp.ocp.running_cost.terms()) {
    const int pos = mu.basis.position(mi);
    if (pos < 0) throw std::logic_error("running cost degree exceeds 2k");
    cp.objective[mu.offset + pos] += c;
  }
  Polynomial H_on_muT = sp.ocp.terminal_cost;
  if (sp.ocp.time_mode == TimeMode::kFree) {
    std::vector<int> x_to_tx(static_cast<size_t>(sp.ocp.n));
    for (int i = 0; i < sp.ocp.n; ++i) x_to_tx[static_cast<size_t>(i)] = 1 + i;
    H_on_muT = H_on_muT.embedded(1 + sp.ocp.n, x_to_tx);
  }
  for (const auto& [mi, c] : H_on_muT.terms()) {
    const int pos = muT.basis.position(mi);
    if (pos < 0) throw std::logic_error("terminal cost degree exceeds 2k");
    cp.objective[muT.offset + pos] += c;
  }

  cp.blocks = psd_blocks(sp, layout);
  return rel;
}

ConicProblem assemble(const NormalizedProblem& normalized, const RelaxationConfig& config) {
  return build_relaxation(normalized, config).conic;
}

nlohmann::json conic_to_json(const ConicProblem& cp) {
  nlohmann::json j;
  j["num_vars"] = cp.num_vars;
  j["objective"] = std::vector<double>(cp.objective.begin(), cp.objective.end());
  nlohmann::json triplets = nlohmann::json::array();
  for (int r = 0; r < cp.num_rows(); ++r) {
    for (const auto& [c, v] : cp.rows[static_cast<size_t>(r)]) {
      triplets.push_back({r, c, v});
    }
  }
  j["A"] = {{"num_rows", cp.num_rows()}, {"num_cols", cp.num_vars}, {"triplets", triplets}};
  j["b"] = std::vector<double>(cp.b.begin(), cp.b.end());

  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& block : cp.blocks) {
    nlohmann::json entries = nlohmann::json::array();
    for (int r = 0; r < block.side; ++r) {
      for (int c = r; c < block.side; ++c) {
        const BlockEntry& e = block.at(r, c);
        if (e.constant == 0.0 && e.terms.empty()) continue;
        nlohmann::json terms = nlohmann::json::array();
        for (const auto& [idx, coef] : e.terms) terms.push_back({idx, coef});
        entries.push_back({{"r", r}, {"c", c}, {"constant", e.constant}, {"terms", terms}});
      }
    }
    blocks.push_back({{"name", block.name}, {"side", block.side}, {"entries", entries}});
  }
  j["blocks"] = blocks;

  nlohmann::json meta;
  meta["k"] = cp.meta.k;
  meta["time_mode"] = to_string(cp.meta.time_mode);
  meta["dropped_rows"] = cp.meta.dropped_rows;
  meta["slack_rows"] = cp.meta.slack_rows;
  meta["row_scale"] = std::vector<double>(cp.meta.row_scale.begin(), cp.meta.row_scale.end());
  meta["scaling"] = {
      {"horizon", cp.meta.scaling.horizon},
      {"x_center", std::vector<double>(cp.meta.scaling.x_center.begin(), cp.meta.scaling.x_center.end())},
      {"x_halfwidth",
       std::vector<double>(cp.meta.scaling.x_halfwidth.begin(), cp.meta.scaling.x_halfwidth.end())},
      {"input_offset",
       std::vector<double>(cp.meta.scaling.input_map.offset.begin(), cp.meta.scaling.input_map.offset.end())},
      {"input_scale",
       std::vector<double>(cp.meta.scaling.input_map.scale.begin(), cp.meta.scaling.input_map.scale.end())},
  };
  j["meta"] = meta;
  return j;
}

namespace {
Eigen::VectorXd vec_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
}
}  // namespace

ConicProblem conic_from_json(const nlohmann::json& j) {
  ConicProblem cp;
  cp.num_vars = j.at("num_vars").get<int>();
  cp.objective = vec_from_json(j.at("objective"));
  cp.b = vec_from_json(j.at("b"));
  cp.rows.resize(static_cast<size_t>(j.at("A").at("num_rows").get<int>()));
  for (const auto& t : j.at("A").at("triplets")) {
    cp.rows[t.at(0).get<size_t>()].emplace_back(t.at(1).get<int>(), t.at(2).get<double>());
  }
  for (const auto& jb : j.at("blocks")) {
    PSDBlock block;
    block.name = jb.at("name").get<std::string>();
    block.side = jb.at("side").get<int>();
    block.entries.resize(static_cast<size_t>(block.side) * (block.side + 1) / 2);
    for (const auto& je : jb.at("entries")) {
      BlockEntry& e = block.at(je.at("r").get<int>(), je.at("c").get<int>());
      e.constant = je.at("constant").get<double>();
      for (const auto& t : je.at("terms")) {
        e.terms.emplace_back(t.at(0).get<int>(), t.at(1).get<double>());
      }
    }
    cp.blocks.push_back(std::move(block));
  }
  if (j.contains("meta")) {
    const auto& meta = j.at("meta");
    cp.meta.k = meta.at("k").get<int>();
    cp.meta.time_mode = time_mode_from_string(meta.at("time_mode").get<std::string>());
    cp.meta.dropped_rows = meta.at("dropped_rows").get<int>();
    if (meta.contains("slack_rows")) {
      cp.meta.slack_rows = meta.at("slack_rows").get<std::vector<int>>();
    }
    cp.meta.row_scale = vec_from_json(meta.at("row_scale"));
    const auto& s = meta.at("scaling");
    cp.meta.scaling.horizon = s.at("horizon").get<double>();
    cp.meta.scaling.x_center = vec_from_json(s.at("x_center"));
    cp.meta.scaling.x_halfwidth = vec_from_json(s.at("x_halfwidth"));
    cp.meta.scaling.input_map.offset = vec_from_json(s.at("input_offset"));
    cp.meta.scaling.input_map.scale = vec_from_json(s.at("input_scale"));
  }
  return cp;
}

}  // namespace momsyn
