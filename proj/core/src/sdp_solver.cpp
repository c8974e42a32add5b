#include "momsyn/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include <Eigen/Dense>

namespace momsyn {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kNearOptimal: return "near_optimal";
    case SolveStatus::kPrimalInfeasible: return "primal_infeasible";
    case SolveStatus::kDualInfeasible: return "dual_infeasible";
    case SolveStatus::kIterationLimit: return "iteration_limit";
  }
  return "?";
}

double ResidualReport::worst() const {
  return std::max({primal_eq, cone, dual, gap});
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Entry {
  int r, c;
  double v;
};

struct VarEntries {
  int var;  // reduced variable index
  std::vector<Entry> entries;
};

struct WorkBlock {
  int side = 0;
  Eigen::MatrixXd C;               // constant part
  std::vector<VarEntries> vars;    // sorted by var

  Eigen::MatrixXd evaluate(const Eigen::VectorXd& y, bool with_constant) const {
    Eigen::MatrixXd M = with_constant ? Eigen::MatrixXd(C) : Eigen::MatrixXd::Zero(side, side);
    for (const auto& ve : vars) {
      const double yv = y[ve.var];
      if (yv == 0.0) continue;
      for (const auto& e : ve.entries) {
        M(e.r, e.c) += e.v * yv;
        if (e.r != e.c) M(e.c, e.r) += e.v * yv;
      }
    }
    return M;
  }

  double inner_with_form(int local_var, const Eigen::MatrixXd& G) const {
    const auto& ve = vars[static_cast<size_t>(local_var)];
    double s = 0.0;
    for (const auto& e : ve.entries) {
      s += e.v * (e.r == e.c ? G(e.r, e.c) : G(e.r, e.c) + G(e.c, e.r));
    }
    return s;
  }
};

struct WorkProblem {
  int nvars = 0;
  Eigen::VectorXd c;
  double obj_offset = 0.0;
  std::vector<SparseRow> rows;
  Eigen::VectorXd b;
  std::vector<WorkBlock> blocks;

  int nrows() const { return static_cast<int>(rows.size()); }
};

struct Elimination {
  int row = -1;                 // original row index
  int pivot = -1;               // original variable index
  // Substitution recorded over variables alive at creation time:
  // y[pivot] = rhs + sum coeff * y[var].
  double rhs = 0.0;
  SparseRow terms;
};

struct PresolveMap {
  bool active = false;
  bool infeasible = false;
  std::vector<Elimination> elims;
  std::vector<int> var_map;          // original -> reduced (-1 for eliminated)
  std::vector<int> reduced_vars;     // reduced -> original
  std::vector<int> kept_rows;        // reduced row -> original row
  // Fully resolved substitutions over reduced variables.
  std::vector<double> sub_const;     // indexed by original var (pivots only)
  std::vector<SparseRow> sub_reduced;
};

/// Eliminates small-support equality rows by substitution. Each eliminated
/// row donates one pivot variable that is rewritten into the remaining
/// variables everywhere (rows, objective, block entries).
PresolveMap run_presolve(const ConicProblem& cp, std::vector<std::map<int, double>>& work_rows,
                         std::vector<double>& work_rhs) {
  PresolveMap pm;
  const int N = cp.num_vars;
  const int M = cp.num_rows();
  pm.var_map.assign(static_cast<size_t>(N), 0);

  work_rows.resize(static_cast<size_t>(M));
  work_rhs.resize(static_cast<size_t>(M));
  for (int r = 0; r < M; ++r) {
    for (const auto& [idx, v] : cp.rows[static_cast<size_t>(r)]) {
      work_rows[static_cast<size_t>(r)][idx] += v;
    }
    work_rhs[static_cast<size_t>(r)] = cp.b[r];
  }

  std::vector<bool> row_gone(static_cast<size_t>(M), false);
  std::vector<bool> var_gone(static_cast<size_t>(N), false);
  std::vector<int> occurrences(static_cast<size_t>(N), 0);
  for (int r = 0; r < M; ++r) {
    for (const auto& [idx, v] : work_rows[static_cast<size_t>(r)]) {
      if (v != 0.0) ++occurrences[static_cast<size_t>(idx)];
    }
  }
  constexpr double kPivotFloor = 1e-2;

  // Pass 1: constant fixes (support-1 rows) and renamings (support-2 rows).
  // Neither kind can fill the remaining rows: a constant only moves right
  // hand sides, a renaming swaps one variable for another. Together they
  // absorb the terminal-mass row, the time-moment chain of mu, and the
  // marginal rows tying gamma to mu.
  bool changed = true;
  while (changed) {
    changed = false;
    for (int r = 0; r < M; ++r) {
      if (row_gone[static_cast<size_t>(r)]) continue;
      auto& row = work_rows[static_cast<size_t>(r)];
      for (auto it = row.begin(); it != row.end();) {
        if (it->second == 0.0) it = row.erase(it);
        else ++it;
      }
      if (row.size() > 2) continue;
      if (row.empty()) {
        if (std::abs(work_rhs[static_cast<size_t>(r)]) > 1e-9) pm.infeasible = true;
        row_gone[static_cast<size_t>(r)] = true;
        continue;
      }

      int pivot = row.begin()->first;
      double pivot_v = row.begin()->second;
      if (row.size() == 2) {
        auto second = std::next(row.begin());
        if (std::abs(second->second) > std::abs(pivot_v)) {
          pivot = second->first;
          pivot_v = second->second;
        }
      }
      if (pivot_v == 0.0) continue;

      Elimination elim;
      elim.row = r;
      elim.pivot = pivot;
      elim.rhs = work_rhs[static_cast<size_t>(r)] / pivot_v;
      for (const auto& [idx, v] : row) {
        if (idx != pivot) elim.terms.emplace_back(idx, -v / pivot_v);
      }
      for (const auto& [idx, v] : row) --occurrences[static_cast<size_t>(idx)];
      row_gone[static_cast<size_t>(r)] = true;
      var_gone[static_cast<size_t>(pivot)] = true;

      for (int r2 = 0; r2 < M; ++r2) {
        if (r2 == r || row_gone[static_cast<size_t>(r2)]) continue;
        auto& other = work_rows[static_cast<size_t>(r2)];
        auto it = other.find(pivot);
        if (it == other.end()) continue;
        const double w = it->second;
        other.erase(it);
        --occurrences[static_cast<size_t>(pivot)];
        work_rhs[static_cast<size_t>(r2)] -= w * elim.rhs;
        for (const auto& [idx, v] : elim.terms) {
          auto [jt, inserted] = other.try_emplace(idx, w * v);
          if (!inserted) jt->second += w * v;
          if (inserted) ++occurrences[static_cast<size_t>(idx)];
        }
      }
      pm.elims.push_back(std::move(elim));
      changed = true;
    }
  }

  // Pass 2: slack-definition rows flagged by the assembler. Their pivot is
  // the single variable occurring in no other row, so the substitution only
  // rewrites blocks and objective, never the remaining rows.
  for (int r : cp.meta.slack_rows) {
    if (r < 0 || r >= M || row_gone[static_cast<size_t>(r)]) continue;
    auto& row = work_rows[static_cast<size_t>(r)];
    double max_abs = 0.0;
    for (const auto& [idx, v] : row) max_abs = std::max(max_abs, std::abs(v));
    int pivot = -1;
    double pivot_v = 0.0;
    for (const auto& [idx, v] : row) {
      if (occurrences[static_cast<size_t>(idx)] == 1 && std::abs(v) >= kPivotFloor * max_abs &&
          std::abs(v) > std::abs(pivot_v)) {
        pivot = idx;
        pivot_v = v;
      }
    }
    if (pivot < 0) continue;

    Elimination elim;
    elim.row = r;
    elim.pivot = pivot;
    elim.rhs = work_rhs[static_cast<size_t>(r)] / pivot_v;
    for (const auto& [idx, v] : row) {
      if (idx != pivot) elim.terms.emplace_back(idx, -v / pivot_v);
    }
    for (const auto& [idx, v] : row) {
      if (v != 0.0) --occurrences[static_cast<size_t>(idx)];
    }
    row_gone[static_cast<size_t>(r)] = true;
    var_gone[static_cast<size_t>(pivot)] = true;
    pm.elims.push_back(std::move(elim));
  }

  int next = 0;
  for (int v = 0; v < N; ++v) {
    if (var_gone[static_cast<size_t>(v)]) {
      pm.var_map[static_cast<size_t>(v)] = -1;
    } else {
      pm.var_map[static_cast<size_t>(v)] = next++;
      pm.reduced_vars.push_back(v);
    }
  }
  for (int r = 0; r < M; ++r) {
    if (!row_gone[static_cast<size_t>(r)]) pm.kept_rows.push_back(r);
  }
  pm.active = !pm.elims.empty();

  // Resolve substitutions onto reduced variables, walking newest-first: an
  // elimination only references pivots created after it.
  pm.sub_const.assign(static_cast<size_t>(N), 0.0);
  pm.sub_reduced.assign(static_cast<size_t>(N), {});
  for (auto it = pm.elims.rbegin(); it != pm.elims.rend(); ++it) {
    double cst = it->rhs;
    std::map<int, double> acc;  // reduced index -> coeff
    for (const auto& [idx, v] : it->terms) {
      const int red = pm.var_map[static_cast<size_t>(idx)];
      if (red >= 0) {
        acc[red] += v;
      } else {
        cst += v * pm.sub_const[static_cast<size_t>(idx)];
        for (const auto& [rid, w] : pm.sub_reduced[static_cast<size_t>(idx)]) {
          acc[rid] += v * w;
        }
      }
    }
    pm.sub_const[static_cast<size_t>(it->pivot)] = cst;
    auto& out = pm.sub_reduced[static_cast<size_t>(it->pivot)];
    for (const auto& [rid, w] : acc) {
      if (w != 0.0) out.emplace_back(rid, w);
    }
  }
  return pm;
}

WorkProblem build_work_problem(const ConicProblem& cp, const PresolveMap& pm,
                               const std::vector<std::map<int, double>>& work_rows,
                               const std::vector<double>& work_rhs) {
  WorkProblem wp;
  wp.nvars = static_cast<int>(pm.reduced_vars.size());

  wp.c = Eigen::VectorXd::Zero(wp.nvars);
  for (int v = 0; v < cp.num_vars; ++v) {
    const double cv = cp.objective[v];
    if (cv == 0.0) continue;
    const int red = pm.var_map[static_cast<size_t>(v)];
    if (red >= 0) {
      wp.c[red] += cv;
    } else {
      wp.obj_offset += cv * pm.sub_const[static_cast<size_t>(v)];
      for (const auto& [rid, w] : pm.sub_reduced[static_cast<size_t>(v)]) wp.c[rid] += cv * w;
    }
  }

  std::vector<double> rhs;
  for (int r : pm.kept_rows) {
    SparseRow row;
    for (const auto& [idx, v] : work_rows[static_cast<size_t>(r)]) {
      if (v != 0.0) row.emplace_back(pm.var_map[static_cast<size_t>(idx)], v);
    }
    if (row.empty() && std::abs(work_rhs[static_cast<size_t>(r)]) <= 1e-9) continue;
    wp.rows.push_back(std::move(row));
    rhs.push_back(work_rhs[static_cast<size_t>(r)]);
  }
  wp.b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<long>(rhs.size()));

  for (const auto& block : cp.blocks) {
    WorkBlock wb;
    wb.side = block.side;
    wb.C = Eigen::MatrixXd::Zero(block.side, block.side);
    std::map<int, std::vector<Entry>> per_var;
    for (int r = 0; r < block.side; ++r) {
      for (int c = r; c < block.side; ++c) {
        const BlockEntry& e = block.at(r, c);
        double cst = e.constant;
        std::map<int, double> reduced_terms;
        for (const auto& [idx, coef] : e.terms) {
          const int red = pm.var_map[static_cast<size_t>(idx)];
          if (red >= 0) {
            reduced_terms[red] += coef;
          } else {
            cst += coef * pm.sub_const[static_cast<size_t>(idx)];
            for (const auto& [rid, w] : pm.sub_reduced[static_cast<size_t>(idx)]) {
              reduced_terms[rid] += coef * w;
            }
          }
        }
        if (cst != 0.0) {
          wb.C(r, c) = cst;
          wb.C(c, r) = cst;
        }
        for (const auto& [rid, w] : reduced_terms) {
          if (w != 0.0) per_var[rid].push_back({r, c, w});
        }
      }
    }
    for (auto& [var, entries] : per_var) {
      wb.vars.push_back({var, std::move(entries)});
    }
    wp.blocks.push_back(std::move(wb));
  }
  return wp;
}

/// Adjoint of the linear block map: out[j] = sum_i <B_ij, G_i>.
void add_adjoint(const std::vector<WorkBlock>& blocks, const std::vector<Eigen::MatrixXd>& G,
                 Eigen::VectorXd& out) {
  for (size_t i = 0; i < blocks.size(); ++i) {
    const WorkBlock& wb = blocks[i];
    for (size_t a = 0; a < wb.vars.size(); ++a) {
      out[wb.vars[a].var] += wb.inner_with_form(static_cast<int>(a), G[i]);
    }
  }
}

double max_step_to_boundary(const Eigen::LLT<Eigen::MatrixXd>& chol, const Eigen::MatrixXd& dX) {
  // Largest a with X + a dX >= 0, via lambda_min of L^-1 dX L^-T.
  Eigen::MatrixXd T = chol.matrixL().solve(dX);
  T = chol.matrixL().solve(T.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (T + T.transpose()),
                                                    Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin >= -1e-14) return kInf;
  return -1.0 / lmin;
}

struct IpmState {
  Eigen::VectorXd y, lambda;
  std::vector<Eigen::MatrixXd> S, Z;
};

double block_dot(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  return (A.array() * B.array()).sum();
}

}  // namespace

ResidualReport measure_residuals(const ConicProblem& cp, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& row_duals,
                                 const std::vector<Eigen::MatrixXd>& block_duals) {
  ResidualReport rep;
  double eq = 0.0;
  for (int r = 0; r < cp.num_rows(); ++r) {
    double s = -cp.b[r];
    for (const auto& [idx, v] : cp.rows[static_cast<size_t>(r)]) s += v * y[idx];
    eq = std::max(eq, std::abs(s));
  }
  const double bnorm = cp.b.size() ? cp.b.cwiseAbs().maxCoeff() : 0.0;
  rep.primal_eq = eq / (1.0 + bnorm);

  double cone = 0.0;
  for (const auto& block : cp.blocks) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block.evaluate(y), Eigen::EigenvaluesOnly);
    cone = std::max(cone, -es.eigenvalues().minCoeff());
  }
  rep.cone = std::max(cone, 0.0);

  if (row_duals.size() == cp.num_rows() && block_duals.size() == cp.blocks.size()) {
    Eigen::VectorXd rd = cp.objective;
    for (int r = 0; r < cp.num_rows(); ++r) {
      for (const auto& [idx, v] : cp.rows[static_cast<size_t>(r)]) rd[idx] -= v * row_duals[r];
    }
    double comp = 0.0, dual_const = 0.0;
    for (size_t i = 0; i < cp.blocks.size(); ++i) {
      const PSDBlock& block = cp.blocks[i];
      const Eigen::MatrixXd& Zi = block_duals[i];
      for (int r = 0; r < block.side; ++r) {
        for (int c = r; c < block.side; ++c) {
          const BlockEntry& e = block.at(r, c);
          const double zval = (r == c) ? Zi(r, c) : Zi(r, c) + Zi(c, r);
          for (const auto& [idx, coef] : e.terms) rd[idx] -= coef * zval;
          dual_const += e.constant * zval;
        }
      }
      comp = std::max(comp, std::abs(block_dot(block.evaluate(y), Zi)));
    }
    rep.dual = rd.cwiseAbs().maxCoeff() / (1.0 + cp.objective.cwiseAbs().maxCoeff());
    const double pobj = cp.objective.dot(y);
    const double dobj = (cp.b.size() ? cp.b.dot(row_duals) : 0.0) - dual_const;
    rep.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    rep.complementarity = comp;
  }
  return rep;
}

ConicSolution solve(const ConicProblem& cp, const SolverSettings& settings) {
  ConicSolution sol;

  std::vector<std::map<int, double>> work_rows;
  std::vector<double> work_rhs;
  PresolveMap pm;
  if (settings.presolve) {
    pm = run_presolve(cp, work_rows, work_rhs);
  } else {
    pm.var_map.resize(static_cast<size_t>(cp.num_vars));
    for (int v = 0; v < cp.num_vars; ++v) pm.var_map[static_cast<size_t>(v)] = v;
    pm.reduced_vars.resize(static_cast<size_t>(cp.num_vars));
    for (int v = 0; v < cp.num_vars; ++v) pm.reduced_vars[static_cast<size_t>(v)] = v;
    work_rows.resize(cp.rows.size());
    work_rhs.resize(cp.rows.size());
    for (int r = 0; r < cp.num_rows(); ++r) {
      for (const auto& [idx, v] : cp.rows[static_cast<size_t>(r)]) {
        work_rows[static_cast<size_t>(r)][idx] += v;
      }
      work_rhs[static_cast<size_t>(r)] = cp.b[r];
      pm.kept_rows.push_back(r);
    }
    pm.sub_const.assign(static_cast<size_t>(cp.num_vars), 0.0);
    pm.sub_reduced.assign(static_cast<size_t>(cp.num_vars), {});
  }
  if (pm.infeasible) {
    sol.status = SolveStatus::kPrimalInfeasible;
    sol.message = "presolve found an inconsistent equality row";
    sol.y = Eigen::VectorXd::Zero(cp.num_vars);
    return sol;
  }

  const WorkProblem wp = build_work_problem(cp, pm, work_rows, work_rhs);
  const int N = wp.nvars;
  const int M = wp.nrows();
  const int nb = static_cast<int>(wp.blocks.size());

  // Dense A^T for the Schur backsolves.
  Eigen::MatrixXd At = Eigen::MatrixXd::Zero(N, M);
  for (int r = 0; r < M; ++r) {
    for (const auto& [idx, v] : wp.rows[static_cast<size_t>(r)]) At(idx, r) = v;
  }
  auto apply_A = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd out(M);
    for (int r = 0; r < M; ++r) {
      double s = 0.0;
      for (const auto& [idx, w] : wp.rows[static_cast<size_t>(r)]) s += w * v[idx];
      out[r] = s;
    }
    return out;
  };

  IpmState st;
  // Gram factor of the equality rows; two projection passes give the
  // minimum-norm solution of A y = b for the starting point.
  Eigen::LLT<Eigen::MatrixXd> aat_llt;
  if (M > 0) {
    Eigen::MatrixXd AAt = At.transpose() * At;
    AAt.diagonal().array() += 1e-13 * (1.0 + AAt.diagonal().maxCoeff());
    aat_llt.compute(AAt);
  }
  auto project_to_rows = [&](Eigen::VectorXd& v, const Eigen::VectorXd& target) {
    for (int pass = 0; pass < 2; ++pass) {
      v += At * aat_llt.solve(target - apply_A(v));
    }
  };

  // Analytic-center style start: least-squares y, identity-scaled cones.
  if (M > 0) {
    st.y = Eigen::VectorXd::Zero(N);
    project_to_rows(st.y, wp.b);
    if (settings.verbose) {
      std::printf("init: %d vars (%d eliminated), %d rows, ls residual %.3e\n", N,
                  cp.num_vars - N, M, (apply_A(st.y) - wp.b).cwiseAbs().maxCoeff());
    }
  } else {
    st.y = Eigen::VectorXd::Zero(N);
  }
  st.lambda = Eigen::VectorXd::Zero(M);
  st.S.resize(static_cast<size_t>(nb));
  st.Z.resize(static_cast<size_t>(nb));
  for (int i = 0; i < nb; ++i) {
    const WorkBlock& wb = wp.blocks[static_cast<size_t>(i)];
    const Eigen::MatrixXd B0 = wb.evaluate(st.y, true);
    const double scale =
        std::max(settings.initial_radius, B0.norm() / std::sqrt(static_cast<double>(wb.side)));
    st.S[static_cast<size_t>(i)] = scale * Eigen::MatrixXd::Identity(wb.side, wb.side);
    st.Z[static_cast<size_t>(i)] = scale * Eigen::MatrixXd::Identity(wb.side, wb.side);
  }

  const double total_dim = [&] {
    double d = 0.0;
    for (const auto& wb : wp.blocks) d += wb.side;
    return std::max(d, 1.0);
  }();
  const double bnorm = M > 0 ? wp.b.cwiseAbs().maxCoeff() : 0.0;
  const double cnorm = wp.c.size() ? wp.c.cwiseAbs().maxCoeff() : 0.0;

  Eigen::MatrixXd K(N + M, N + M);
  // Nesterov-Todd scaling per block in R-factor form: W = R R' with
  // R = Ls P D^(-1/4), where G = Ls' Z Ls = P D P'. Then both scaled cone
  // variables coincide with the diagonal Lambda = D^(1/2), W Z W = S, and
  // the Schur matrix H_jl = <B_j, Winv B_l Winv> is a Gram matrix.
  std::vector<Eigen::MatrixXd> Winv(static_cast<size_t>(nb)), Rfac(static_cast<size_t>(nb)),
      Rinv(static_cast<size_t>(nb)), Rcon(static_cast<size_t>(nb));
  std::vector<Eigen::VectorXd> Lam(static_cast<size_t>(nb));
  std::vector<Eigen::LLT<Eigen::MatrixXd>> Sllt(static_cast<size_t>(nb)),
      Zllt(static_cast<size_t>(nb));
  std::vector<Eigen::MatrixXd> dS(static_cast<size_t>(nb)), dZ(static_cast<size_t>(nb));
  std::vector<Eigen::MatrixXd> dSa(static_cast<size_t>(nb)), dZa(static_cast<size_t>(nb));

  IpmState best = st;
  double best_metric = kInf;
  int consecutive_tiny_steps = 0;
  int iters_since_best = 0;
  std::string stop_message = "iteration limit reached";

  auto form_H = [&](auto&& Hout) {
    Hout.setZero();
    for (int i = 0; i < nb; ++i) {
      const WorkBlock& wb = wp.blocks[static_cast<size_t>(i)];
      const Eigen::MatrixXd& Wi = Winv[static_cast<size_t>(i)];
      const int nvars_local = static_cast<int>(wb.vars.size());
#pragma omp parallel
      {
        Eigen::MatrixXd G(wb.side, wb.side);
#pragma omp for schedule(dynamic, 4)
        for (int a = 0; a < nvars_local; ++a) {
          G.setZero();
          for (const auto& e : wb.vars[static_cast<size_t>(a)].entries) {
            G.noalias() += e.v * (Wi.col(e.r) * Wi.row(e.c));
            if (e.r != e.c) G.noalias() += e.v * (Wi.col(e.c) * Wi.row(e.r));
          }
          G = 0.5 * (G + G.transpose()).eval();
          const int ja = wb.vars[static_cast<size_t>(a)].var;
          for (int bidx = 0; bidx <= a; ++bidx) {
            const int jb = wb.vars[static_cast<size_t>(bidx)].var;
            Hout(jb, ja) += wb.inner_with_form(bidx, G);
          }
        }
      }
    }
    Hout = Hout.template selfadjointView<Eigen::Upper>();
  };

  int iter = 0;
  for (; iter < settings.max_iterations; ++iter) {
    // Residuals.
    Eigen::VectorXd r_eq = M > 0 ? (wp.b - apply_A(st.y)).eval() : Eigen::VectorXd();
    double mu = 0.0;
    for (int i = 0; i < nb; ++i) {
      Rcon[static_cast<size_t>(i)] =
          wp.blocks[static_cast<size_t>(i)].evaluate(st.y, true) - st.S[static_cast<size_t>(i)];
      mu += block_dot(st.S[static_cast<size_t>(i)], st.Z[static_cast<size_t>(i)]);
    }
    mu /= total_dim;

    Eigen::VectorXd r_dual = wp.c;
    if (M > 0) r_dual -= At * st.lambda;
    {
      Eigen::VectorXd bz = Eigen::VectorXd::Zero(N);
      add_adjoint(wp.blocks, st.Z, bz);
      r_dual -= bz;
    }

    double rcon_norm = 0.0, snorm = 0.0;
    for (int i = 0; i < nb; ++i) {
      rcon_norm = std::max(rcon_norm, Rcon[static_cast<size_t>(i)].cwiseAbs().maxCoeff());
      snorm = std::max(snorm, st.S[static_cast<size_t>(i)].cwiseAbs().maxCoeff());
    }
    const double primal_res =
        std::max(M > 0 ? r_eq.cwiseAbs().maxCoeff() / (1.0 + bnorm) : 0.0,
                 rcon_norm / (1.0 + snorm));
    const double dual_res = r_dual.cwiseAbs().maxCoeff() / (1.0 + cnorm);
    const double pobj = wp.c.dot(st.y) + wp.obj_offset;
    double dual_const = 0.0;
    for (int i = 0; i < nb; ++i) {
      dual_const += block_dot(wp.blocks[static_cast<size_t>(i)].C, st.Z[static_cast<size_t>(i)]);
    }
    const double dobj = (M > 0 ? wp.b.dot(st.lambda) : 0.0) - dual_const + wp.obj_offset;
    const double gap_rel = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

    IterateInfo info{iter, mu, pobj, dobj, primal_res, dual_res, 0.0, 0.0};

    const double metric = std::max({primal_res, dual_res, gap_rel});
    const bool significant = metric < 0.99 * best_metric;
    if (metric < best_metric) {
      best_metric = metric;
      best = st;
    }
    if (best_metric <= std::min(settings.feas_tol, settings.gap_tol)) {
      sol.trace.push_back(info);
      stop_message = "converged";
      break;
    }
    if (significant) {
      iters_since_best = 0;
    } else if (++iters_since_best >= 12) {
      stop_message = "stalled (no residual progress for 12 iterations)";
      sol.trace.push_back(info);
      break;
    }
    if (settings.verbose) {
      std::printf("it %3d  mu %9.2e  rp %9.2e  rd %9.2e  gap %9.2e  p %+.8e  d %+.8e\n", iter, mu,
                  primal_res, dual_res, gap_rel, pobj, dobj);
    }
    if (primal_res <= settings.feas_tol && dual_res <= settings.feas_tol &&
        gap_rel <= settings.gap_tol) {
      sol.trace.push_back(info);
      stop_message = "converged";
      break;
    }

    // Infeasibility certificates.
    if (M > 0) {
      const double blam = wp.b.dot(st.lambda);
      if (blam > 1e-2 * (1.0 + st.lambda.cwiseAbs().maxCoeff())) {
        Eigen::VectorXd ray = At * st.lambda;
        Eigen::VectorXd bz = Eigen::VectorXd::Zero(N);
        add_adjoint(wp.blocks, st.Z, bz);
        ray += bz;
        if (ray.cwiseAbs().maxCoeff() <= 1e-7 * blam) {
          sol.trace.push_back(info);
          stop_message = "primal infeasibility certificate (b'lambda > 0 on a dual ray)";
          sol.status = SolveStatus::kPrimalInfeasible;
          break;
        }
      }
    }
    {
      const double ynorm = st.y.cwiseAbs().maxCoeff();
      if (ynorm > 1e9 && wp.c.dot(st.y) < -1e-2 * ynorm) {
        const Eigen::VectorXd dir = st.y / ynorm;
        double cone_ok = 0.0;
        for (int i = 0; i < nb; ++i) {
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
              wp.blocks[static_cast<size_t>(i)].evaluate(dir, false), Eigen::EigenvaluesOnly);
          cone_ok = std::min(cone_ok, es.eigenvalues().minCoeff());
        }
        const double eqdir = M > 0 ? apply_A(dir).cwiseAbs().maxCoeff() : 0.0;
        if (cone_ok >= -1e-7 && eqdir <= 1e-7) {
          sol.trace.push_back(info);
          stop_message = "dual infeasibility certificate (improving primal ray)";
          sol.status = SolveStatus::kDualInfeasible;
          break;
        }
      }
    }

    // Cone factorizations and the NT scaling point per block.
    bool factor_fail = false;
    for (int i = 0; i < nb && !factor_fail; ++i) {
      const int side = wp.blocks[static_cast<size_t>(i)].side;
      Sllt[static_cast<size_t>(i)].compute(st.S[static_cast<size_t>(i)]);
      Zllt[static_cast<size_t>(i)].compute(st.Z[static_cast<size_t>(i)]);
      if (Sllt[static_cast<size_t>(i)].info() != Eigen::Success ||
          Zllt[static_cast<size_t>(i)].info() != Eigen::Success) {
        factor_fail = true;
        break;
      }
      const Eigen::MatrixXd Ls = Sllt[static_cast<size_t>(i)].matrixL();
      Eigen::MatrixXd G = Ls.transpose() * st.Z[static_cast<size_t>(i)] * Ls;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (G + G.transpose()));
      if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0) {
        factor_fail = true;
        break;
      }
      const Eigen::VectorXd d_quarter = es.eigenvalues().array().pow(0.25).matrix();
      Lam[static_cast<size_t>(i)] = es.eigenvalues().cwiseSqrt();
      Rfac[static_cast<size_t>(i)] =
          Ls * es.eigenvectors() * d_quarter.cwiseInverse().asDiagonal();
      // Rinv = D^(1/4) P' Ls^(-1).
      Rinv[static_cast<size_t>(i)] =
          d_quarter.asDiagonal() * es.eigenvectors().transpose() *
          Ls.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(side, side));
      Winv[static_cast<size_t>(i)] =
          Rinv[static_cast<size_t>(i)].transpose() * Rinv[static_cast<size_t>(i)];
      Winv[static_cast<size_t>(i)] =
          0.5 * (Winv[static_cast<size_t>(i)] + Winv[static_cast<size_t>(i)].transpose()).eval();
    }
    if (factor_fail) {
      sol.trace.push_back(info);
      stop_message = "cone factorization broke down";
      break;
    }

    // Augmented KKT system [H A'; A 0], factored once per iteration. One
    // indefinite solve is markedly more accurate late in the path than the
    // double Schur complement, whose conditioning is effectively squared.
    // Shifting the trailing block would leak into A dy = g, so only the H
    // block gets a relative safeguard, escalated if the factorization comes
    // out numerically singular.
    double h_shift = 1e-14;
    Eigen::PartialPivLU<Eigen::MatrixXd> klu;
    for (int attempt = 0; attempt < 4; ++attempt) {
      auto Htop = K.topLeftCorner(N, N);
      form_H(Htop);
      Htop.diagonal().array() += h_shift * (1.0 + Htop.diagonal().cwiseAbs().maxCoeff());
      if (M > 0) {
        K.topRightCorner(N, M) = At;
        K.bottomLeftCorner(M, N) = At.transpose();
        K.bottomRightCorner(M, M).setZero();
      }
      klu.compute(K);
      const Eigen::VectorXd probe = klu.solve(Eigen::VectorXd::Ones(N + M));
      if (probe.allFinite()) break;
      h_shift *= 1e4;
    }

    auto apply_H_exact = [&](const Eigen::VectorXd& v) {
      // Exact Schur-operator action through the blocks; used to refine the
      // factored solves, whose error otherwise pollutes the dual updates
      // once the barrier parameter is small.
      Eigen::VectorXd out = Eigen::VectorXd::Zero(N);
      std::vector<Eigen::MatrixXd> G(static_cast<size_t>(nb));
      for (int i = 0; i < nb; ++i) {
        const auto& wb = wp.blocks[static_cast<size_t>(i)];
        const Eigen::MatrixXd X = wb.evaluate(v, false);
        const Eigen::MatrixXd T =
            Winv[static_cast<size_t>(i)] * X * Winv[static_cast<size_t>(i)];
        G[static_cast<size_t>(i)] = 0.5 * (T + T.transpose());
      }
      add_adjoint(wp.blocks, G, out);
      return out;
    };

    auto solve_kkt_once = [&](const Eigen::VectorXd& f, const Eigen::VectorXd& g,
                              Eigen::VectorXd& dy, Eigen::VectorXd& dlam) {
      Eigen::VectorXd rhs(N + M);
      rhs.head(N) = f;
      if (M > 0) rhs.tail(M) = g;
      const Eigen::VectorXd solv = klu.solve(rhs);
      dy = solv.head(N);
      // The augmented system carries w = -dlam in its trailing slots.
      dlam = M > 0 ? (-solv.tail(M)).eval() : Eigen::VectorXd();
    };

    auto solve_kkt = [&](const Eigen::VectorXd& f, const Eigen::VectorXd& g,
                         Eigen::VectorXd& dy, Eigen::VectorXd& dlam) -> double {
      solve_kkt_once(f, g, dy, dlam);
      // Refine against the exact operator. Residual targets follow the
      // iterate's own residual scales: the error a direction injects into
      // r_eq and r_dual per step must stay well below their current size,
      // or the outer iteration plateaus at the factorization error.
      const double rdual_norm = r_dual.cwiseAbs().maxCoeff();
      const double tol_f =
          std::max(2e-2 * rdual_norm, 1e-15 * (1.0 + f.cwiseAbs().maxCoeff()));
      const double tol_g =
          M > 0 ? std::max({2e-2 * g.cwiseAbs().maxCoeff(), 1e-2 * rdual_norm,
                            1e-15 * (1.0 + bnorm)})
                : kInf;
      Eigen::VectorXd best_dy = dy, best_dlam = dlam;
      double best_err = kInf;
      for (int round = 0; round < 10; ++round) {
        Eigen::VectorXd rf = f - apply_H_exact(dy);
        if (M > 0) rf += At * dlam;
        Eigen::VectorXd rg = M > 0 ? (g - apply_A(dy)).eval() : Eigen::VectorXd();
        const double err_f = rf.cwiseAbs().maxCoeff();
        const double err_g = M > 0 ? rg.cwiseAbs().maxCoeff() : 0.0;
        const double err = std::max(err_f / tol_f, err_g / tol_g);
        if (err < best_err) {
          best_err = err;
          best_dy = dy;
          best_dlam = dlam;
        } else {
          break;  // refinement stopped contracting
        }
        if (err <= 1.0) break;
        Eigen::VectorXd ddy, ddlam;
        solve_kkt_once(rf, rg, ddy, ddlam);
        dy += ddy;
        if (M > 0) dlam += ddlam;
      }
      dy = best_dy;
      dlam = best_dlam;
      return best_err;
    };

    // NT linearization of the central path, written in the scaled space where
    // both cone variables equal diag(Lambda):
    //   dS + W dZ W = Rc,  dS = B(dy) + Rcon,  dZ = Winv (Rc - dS) Winv,
    // with Rc = R U R' and U_pq = 2 (sigma*mu*I - Lambda^2 - J)_pq /
    // (lambda_p + lambda_q); J is the Mehrotra second-order term formed from
    // the scaled affine directions.
    std::vector<Eigen::MatrixXd> Rc(static_cast<size_t>(nb));
    auto compute_Rc = [&](double sigma_mu, bool corrector) {
      for (int i = 0; i < nb; ++i) {
        const Eigen::VectorXd& lam = Lam[static_cast<size_t>(i)];
        const int side = wp.blocks[static_cast<size_t>(i)].side;
        Eigen::MatrixXd U;
        if (corrector) {
          const Eigen::MatrixXd dS_sc = Rinv[static_cast<size_t>(i)] *
                                        dSa[static_cast<size_t>(i)] *
                                        Rinv[static_cast<size_t>(i)].transpose();
          const Eigen::MatrixXd dZ_sc = Rfac[static_cast<size_t>(i)].transpose() *
                                        dZa[static_cast<size_t>(i)] * Rfac[static_cast<size_t>(i)];
          Eigen::MatrixXd J = dS_sc * dZ_sc;
          J = 0.5 * (J + J.transpose()).eval();
          U = -J;
        } else {
          U = Eigen::MatrixXd::Zero(side, side);
        }
        for (int p = 0; p < side; ++p) {
          U(p, p) += sigma_mu - lam[p] * lam[p];
        }
        for (int p = 0; p < side; ++p) {
          for (int q = 0; q < side; ++q) {
            U(p, q) *= 2.0 / (lam[p] + lam[q]);
          }
        }
        const Eigen::MatrixXd T =
            Rfac[static_cast<size_t>(i)] * U * Rfac[static_cast<size_t>(i)].transpose();
        Rc[static_cast<size_t>(i)] = 0.5 * (T + T.transpose());
      }
    };

    auto direction = [&](Eigen::VectorXd& dy, Eigen::VectorXd& dlam) -> double {
      Eigen::VectorXd f = -r_dual;
      std::vector<Eigen::MatrixXd> G(static_cast<size_t>(nb));
      for (int i = 0; i < nb; ++i) {
        const auto& Wi = Winv[static_cast<size_t>(i)];
        const Eigen::MatrixXd T =
            Wi * (Rc[static_cast<size_t>(i)] - Rcon[static_cast<size_t>(i)]) * Wi;
        G[static_cast<size_t>(i)] = 0.5 * (T + T.transpose());
      }
      Eigen::VectorXd adj = Eigen::VectorXd::Zero(N);
      add_adjoint(wp.blocks, G, adj);
      f += adj;
      return solve_kkt(f, M > 0 ? r_eq : Eigen::VectorXd(), dy, dlam);
    };

    auto directional_blocks = [&](const Eigen::VectorXd& dy, std::vector<Eigen::MatrixXd>& dS_out,
                                  std::vector<Eigen::MatrixXd>& dZ_out) {
      for (int i = 0; i < nb; ++i) {
        const auto& wb = wp.blocks[static_cast<size_t>(i)];
        const auto& Wi = Winv[static_cast<size_t>(i)];
        dS_out[static_cast<size_t>(i)] = wb.evaluate(dy, false) + Rcon[static_cast<size_t>(i)];
        const Eigen::MatrixXd T =
            Wi * (Rc[static_cast<size_t>(i)] - dS_out[static_cast<size_t>(i)]) * Wi;
        dZ_out[static_cast<size_t>(i)] = 0.5 * (T + T.transpose());
      }
    };


    auto step_lengths = [&](const std::vector<Eigen::MatrixXd>& dS_in,
                            const std::vector<Eigen::MatrixXd>& dZ_in, double frac, double& ap,
                            double& ad) {
      ap = ad = 1.0;
      for (int i = 0; i < nb; ++i) {
        ap = std::min(ap, frac * max_step_to_boundary(Sllt[static_cast<size_t>(i)],
                                                      dS_in[static_cast<size_t>(i)]));
        ad = std::min(ad, frac * max_step_to_boundary(Zllt[static_cast<size_t>(i)],
                                                      dZ_in[static_cast<size_t>(i)]));
      }
    };

    // Predictor.
    Eigen::VectorXd dy_a, dlam_a;
    compute_Rc(0.0, false);
    const double err_pred = direction(dy_a, dlam_a);
    directional_blocks(dy_a, dSa, dZa);
    double ap_a, ad_a;
    step_lengths(dSa, dZa, 1.0, ap_a, ad_a);
    double mu_aff = 0.0;
    for (int i = 0; i < nb; ++i) {
      mu_aff += block_dot(st.S[static_cast<size_t>(i)] + ap_a * dSa[static_cast<size_t>(i)],
                          st.Z[static_cast<size_t>(i)] + ad_a * dZa[static_cast<size_t>(i)]);
    }
    mu_aff = std::max(mu_aff / total_dim, 0.0);
    double sigma = mu > 0.0 ? std::pow(mu_aff / mu, 3) : 0.0;
    sigma = std::min(std::max(sigma, 1e-8), 1.0);

    // Corrector with the Mehrotra second-order term.
    Eigen::VectorXd dy, dlam;
    compute_Rc(sigma * mu, true);
    const double err_corr = direction(dy, dlam);
    directional_blocks(dy, dS, dZ);
    if (std::max(err_pred, err_corr) > 1e3) {
      sol.trace.push_back(info);
      stop_message = "search direction accuracy lost (ill-conditioned KKT system)";
      break;
    }
    double ap, ad;
    step_lengths(dS, dZ, settings.step_fraction, ap, ad);
    ap = std::min(ap, 1.0);
    ad = std::min(ad, 1.0);

    st.y += ap * dy;
    if (M > 0) st.lambda += ad * dlam;
    for (int i = 0; i < nb; ++i) {
      st.S[static_cast<size_t>(i)] += ap * dS[static_cast<size_t>(i)];
      st.Z[static_cast<size_t>(i)] += ad * dZ[static_cast<size_t>(i)];
      st.S[static_cast<size_t>(i)] =
          0.5 * (st.S[static_cast<size_t>(i)] + st.S[static_cast<size_t>(i)].transpose()).eval();
      st.Z[static_cast<size_t>(i)] =
          0.5 * (st.Z[static_cast<size_t>(i)] + st.Z[static_cast<size_t>(i)].transpose()).eval();
    }

    info.step_primal = ap;
    info.step_dual = ad;
    sol.trace.push_back(info);
    if (settings.verbose) {
      // Direction quality: residuals of the dual and primal Newton equations.
      Eigen::VectorXd eq3 = r_dual;
      if (M > 0) eq3 -= At * dlam;
      Eigen::VectorXd bz = Eigen::VectorXd::Zero(N);
      add_adjoint(wp.blocks, dZ, bz);
      eq3 -= bz;
      const double eq1 = M > 0 ? (r_eq - apply_A(dy)).cwiseAbs().maxCoeff() : 0.0;
      std::printf("        ap %.3e ad %.3e sigma %.3e eq3 %.3e eq1 %.3e req %.3e rcon %.3e\n",
                  ap, ad, sigma, eq3.cwiseAbs().maxCoeff(), eq1,
                  M > 0 ? r_eq.cwiseAbs().maxCoeff() : 0.0, rcon_norm);
    }

    if (std::max(ap, ad) < 1e-7) {
      if (++consecutive_tiny_steps >= 3) {
        stop_message = "step sizes collapsed";
        break;
      }
    } else {
      consecutive_tiny_steps = 0;
    }
    if (!st.y.allFinite()) {
      stop_message = "iterate diverged";
      st = best;
      break;
    }
  }
  sol.iterations = iter;

  // The loop assesses iterates at its top, so fold in the final state too.
  {
    Eigen::VectorXd r_eq_f = M > 0 ? (wp.b - apply_A(st.y)).eval() : Eigen::VectorXd();
    Eigen::VectorXd r_dual_f = wp.c;
    if (M > 0) r_dual_f -= At * st.lambda;
    Eigen::VectorXd bz = Eigen::VectorXd::Zero(N);
    add_adjoint(wp.blocks, st.Z, bz);
    r_dual_f -= bz;
    double rcon_norm = 0.0, snorm = 0.0;
    for (int i = 0; i < nb; ++i) {
      const Eigen::MatrixXd R =
          wp.blocks[static_cast<size_t>(i)].evaluate(st.y, true) - st.S[static_cast<size_t>(i)];
      rcon_norm = std::max(rcon_norm, R.cwiseAbs().maxCoeff());
      snorm = std::max(snorm, st.S[static_cast<size_t>(i)].cwiseAbs().maxCoeff());
    }
    const double primal_res =
        std::max(M > 0 ? r_eq_f.cwiseAbs().maxCoeff() / (1.0 + bnorm) : 0.0,
                 rcon_norm / (1.0 + snorm));
    const double dual_res = r_dual_f.cwiseAbs().maxCoeff() / (1.0 + cnorm);
    const double pobj = wp.c.dot(st.y) + wp.obj_offset;
    double dual_const = 0.0;
    for (int i = 0; i < nb; ++i) {
      dual_const += block_dot(wp.blocks[static_cast<size_t>(i)].C, st.Z[static_cast<size_t>(i)]);
    }
    const double dobj = (M > 0 ? wp.b.dot(st.lambda) : 0.0) - dual_const + wp.obj_offset;
    const double gap_rel = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double metric = std::max({primal_res, dual_res, gap_rel});
    if (st.y.allFinite() && metric < best_metric) {
      best_metric = metric;
      best = st;
    }
  }

  // Report the best iterate, mapped back to the original variables.
  const IpmState& fin = best;
  sol.y = Eigen::VectorXd::Zero(cp.num_vars);
  for (int v = 0; v < cp.num_vars; ++v) {
    const int red = pm.var_map[static_cast<size_t>(v)];
    if (red >= 0) {
      sol.y[v] = fin.y[red];
    } else {
      double val = pm.sub_const[static_cast<size_t>(v)];
      for (const auto& [rid, w] : pm.sub_reduced[static_cast<size_t>(v)]) val += w * fin.y[rid];
      sol.y[v] = val;
    }
  }
  sol.objective = cp.objective.dot(sol.y);
  sol.block_duals = fin.Z;

  // Duals: kept rows carry the reduced multipliers; eliminated rows are
  // recovered from dual feasibility at their pivot variables.
  sol.row_duals = Eigen::VectorXd::Zero(cp.num_rows());
  for (int r = 0; r < M; ++r) sol.row_duals[pm.kept_rows[static_cast<size_t>(r)]] = fin.lambda[r];
  if (!pm.elims.empty()) {
    const int ne = static_cast<int>(pm.elims.size());
    Eigen::VectorXd g = cp.objective;
    for (int r = 0; r < cp.num_rows(); ++r) {
      const double lam = sol.row_duals[r];
      if (lam == 0.0) continue;
      for (const auto& [idx, v] : cp.rows[static_cast<size_t>(r)]) g[idx] -= v * lam;
    }
    for (size_t i = 0; i < cp.blocks.size(); ++i) {
      const PSDBlock& block = cp.blocks[i];
      const Eigen::MatrixXd& Zi = sol.block_duals[i];
      for (int r = 0; r < block.side; ++r) {
        for (int c = r; c < block.side; ++c) {
          const double zval = (r == c) ? Zi(r, c) : Zi(r, c) + Zi(c, r);
          for (const auto& [idx, coef] : block.at(r, c).terms) g[idx] -= coef * zval;
        }
      }
    }
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(ne, ne);
    Eigen::VectorXd gp(ne);
    for (int e = 0; e < ne; ++e) {
      const int pivot = pm.elims[static_cast<size_t>(e)].pivot;
      gp[e] = g[pivot];
      for (int e2 = 0; e2 < ne; ++e2) {
        const int row = pm.elims[static_cast<size_t>(e2)].row;
        for (const auto& [idx, v] : cp.rows[static_cast<size_t>(row)]) {
          if (idx == pivot) P(e, e2) += v;
        }
      }
    }
    const Eigen::VectorXd lam_e = P.partialPivLu().solve(gp);
    for (int e = 0; e < ne; ++e) {
      sol.row_duals[pm.elims[static_cast<size_t>(e)].row] = lam_e[e];
    }
  }

  sol.residuals = measure_residuals(cp, sol.y, sol.row_duals, sol.block_duals);
  {
    double dual_const = 0.0;
    for (size_t i = 0; i < cp.blocks.size(); ++i) {
      const PSDBlock& block = cp.blocks[i];
      const Eigen::MatrixXd& Zi = sol.block_duals[i];
      for (int r = 0; r < block.side; ++r) {
        for (int c = r; c < block.side; ++c) {
          const double zval = (r == c) ? Zi(r, c) : Zi(r, c) + Zi(c, r);
          dual_const += block.at(r, c).constant * zval;
        }
      }
    }
    sol.dual_objective = (cp.b.size() ? cp.b.dot(sol.row_duals) : 0.0) - dual_const;
  }

  if (sol.status == SolveStatus::kPrimalInfeasible || sol.status == SolveStatus::kDualInfeasible) {
    sol.message = stop_message;
    return sol;
  }

  const ResidualReport& rep = sol.residuals;
  const double feas = settings.feas_tol;
  const double comp_scale = std::max(1.0, std::abs(sol.objective));
  if (rep.primal_eq <= feas && rep.dual <= feas && rep.gap <= settings.gap_tol &&
      rep.cone <= 10.0 * feas && rep.complementarity <= 10.0 * settings.gap_tol * comp_scale) {
    sol.status = SolveStatus::kOptimal;
  } else if (rep.primal_eq <= 100.0 * feas && rep.dual <= 100.0 * feas &&
             rep.gap <= 100.0 * settings.gap_tol && rep.cone <= 1000.0 * feas) {
    sol.status = SolveStatus::kNearOptimal;
  } else {
    sol.status = SolveStatus::kIterationLimit;
  }
  sol.message = stop_message;
  return sol;
}

}  // namespace momsyn
