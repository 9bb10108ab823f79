#include "slsmpc/tube.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "slsmpc/lqr.hpp"

namespace slsmpc {

void TubeShape::validate() const {
  if (Z.is_empty()) throw std::invalid_argument("TubeShape: empty shape");
  Polytope z = Z;
  z.ensure_hrep();
  const VectorXd zero = VectorXd::Zero(Z.dim());
  for (int i = 0; i < z.F().rows(); ++i) {
    if (z.b()(i) <= 1e-9 * z.F().row(i).norm()) {
      throw std::invalid_argument(
          "TubeShape: origin must lie in the interior of Z");
    }
  }
}

TubeShape make_unit_shape(int n) {
  TubeShape s;
  s.Z = Polytope::inf_ball(n, 1.0);
  s.Z.ensure_hrep();
  s.Z.ensure_vrep();
  s.label = "unit";
  s.validate();
  return s;
}

TubeShape make_zinv_shape(const LtvModel& model, const MatrixXd& Q,
                          const MatrixXd& R, double truncation_tol) {
  const MatrixXd K = dare_gain(model.A[0], model.B[0], Q, R);
  DisturbanceInvariantResult z =
      disturbance_invariant_set(model, K, truncation_tol);
  TubeShape s;
  s.Z = std::move(z.set);
  s.Z.ensure_hrep();
  s.Z.ensure_vrep();
  s.label = "inv";
  s.validate();
  return s;
}

int TubeProgram::zc_index(int t, int c) const { return (t - 1) * n + c; }
int TubeProgram::alpha_index(int t) const { return T * n + (t - 1); }
int TubeProgram::u0_index(int c) const { return T * n + T + c; }
int TubeProgram::uv_index(int t, int v, int c) const {
  return T * n + T + m + ((t - 1) * V + v) * m + c;
}

TubeProgram build_tube_program(const LtvModel& model,
                               const ConstraintSet& constraints,
                               const CostWeights& weights, const VectorXd& x0,
                               const TubeShape& shape) {
  shape.validate();
  TubeProgram tp;
  tp.T = model.horizon;
  tp.n = model.state_dim();
  tp.m = model.input_dim();
  Polytope Z = shape.Z;
  Z.ensure_hrep();
  Z.ensure_vrep();
  tp.V = Z.num_vertices();
  tp.H = Z.num_facets();
  tp.shape_vertices = Z.vertices();
  const int T = tp.T, n = tp.n, m = tp.m, V = tp.V;
  tp.variable_count = 1ll * T * (1 + n) + m + 1ll * (T - 1) * m * V;

  const MatrixXd& G = Z.F();
  const VectorXd& g = Z.b();
  const UncertaintyVertexSet uv =
      UncertaintyVertexSet::enumerate(n, m, model.eps_A, model.eps_B);
  const Polytope W = Polytope::inf_ball(n, model.sigma_w);

  ProgramBuilder pb;
  pb.add_vars(static_cast<int>(tp.variable_count));

  // initial state inside X (constant rows; a violation certifies
  // infeasibility at step 0)
  for (int i = 0; i < constraints.Fx.rows(); ++i) {
    pb.add_ineq({}, constraints.bx(i) - constraints.Fx.row(i).dot(x0));
  }

  // one-step robust containment; the disturbance enters only the offsets,
  // so its vertex enumeration folds into a per-facet worst case
  VectorXd w_off = VectorXd::Zero(G.rows());
  for (int i = 0; i < G.rows(); ++i) {
    for (const auto& w : W.vertices()) {
      w_off(i) = std::max(w_off(i), G.row(i).dot(w));
    }
  }
  for (const auto& [dA, dB] : uv.vertices) {
    const MatrixXd Av = model.A[0] + dA;
    const MatrixXd Bv = model.B[0] + dB;
    // from the singleton step-0 section under the shared first input
    const VectorXd base = G * (Av * x0);
    for (int i = 0; i < G.rows(); ++i) {
      std::vector<ProgramBuilder::Term> row;
      const VectorXd gb = (G.row(i) * Bv).transpose();
      for (int c = 0; c < m; ++c) row.emplace_back(tp.u0_index(c), gb(c));
      for (int c = 0; c < n; ++c) row.emplace_back(tp.zc_index(1, c),
                                                   -G(i, c));
      row.emplace_back(tp.alpha_index(1), -g(i));
      pb.add_ineq(row, -base(i) - w_off(i));
    }
    // from each vertex of the intermediate sections
    for (int t = 1; t <= T - 1; ++t) {
      for (int v = 0; v < V; ++v) {
        const VectorXd av_zv = Av * tp.shape_vertices[v];
        for (int i = 0; i < G.rows(); ++i) {
          std::vector<ProgramBuilder::Term> row;
          const VectorXd ga = (G.row(i) * Av).transpose();
          for (int c = 0; c < n; ++c) {
            row.emplace_back(tp.zc_index(t, c), ga(c));
          }
          row.emplace_back(tp.alpha_index(t), G.row(i).dot(av_zv));
          const VectorXd gb = (G.row(i) * Bv).transpose();
          for (int c = 0; c < m; ++c) {
            row.emplace_back(tp.uv_index(t, v, c), gb(c));
          }
          for (int c = 0; c < n; ++c) {
            row.emplace_back(tp.zc_index(t + 1, c), -G(i, c));
          }
          row.emplace_back(tp.alpha_index(t + 1), -g(i));
          pb.add_ineq(row, -w_off(i));
        }
      }
    }
  }

  // sections inside X, the final section inside the terminal set
  for (int t = 1; t <= T; ++t) {
    const MatrixXd& Fc = t == T ? constraints.FT : constraints.Fx;
    const VectorXd& bc = t == T ? constraints.bT : constraints.bx;
    for (int v = 0; v < V; ++v) {
      for (int i = 0; i < Fc.rows(); ++i) {
        std::vector<ProgramBuilder::Term> row;
        for (int c = 0; c < n; ++c) row.emplace_back(tp.zc_index(t, c),
                                                     Fc(i, c));
        row.emplace_back(tp.alpha_index(t),
                         Fc.row(i).dot(tp.shape_vertices[v]));
        pb.add_ineq(row, bc(i));
      }
    }
    // also keep the final section inside X
    if (t == T) {
      for (int v = 0; v < V; ++v) {
        for (int i = 0; i < constraints.Fx.rows(); ++i) {
          std::vector<ProgramBuilder::Term> row;
          for (int c = 0; c < n; ++c) {
            row.emplace_back(tp.zc_index(t, c), constraints.Fx(i, c));
          }
          row.emplace_back(tp.alpha_index(t),
                           constraints.Fx.row(i).dot(tp.shape_vertices[v]));
          pb.add_ineq(row, constraints.bx(i));
        }
      }
    }
  }
  // inputs inside U
  for (int i = 0; i < constraints.Fu.rows(); ++i) {
    std::vector<ProgramBuilder::Term> row;
    for (int c = 0; c < m; ++c) row.emplace_back(tp.u0_index(c),
                                                 constraints.Fu(i, c));
    pb.add_ineq(row, constraints.bu(i));
  }
  for (int t = 1; t <= T - 1; ++t) {
    for (int v = 0; v < V; ++v) {
      for (int i = 0; i < constraints.Fu.rows(); ++i) {
        std::vector<ProgramBuilder::Term> row;
        for (int c = 0; c < m; ++c) {
          row.emplace_back(tp.uv_index(t, v, c), constraints.Fu(i, c));
        }
        pb.add_ineq(row, constraints.bu(i));
      }
    }
  }
  // nonnegative scalings
  for (int t = 1; t <= T; ++t) {
    pb.add_ineq({{tp.alpha_index(t), -1.0}}, 0.0);
  }

  // nominal cost on the center trajectory; the center input interpolates
  // the vertex inputs with the weights of the origin inside Z
  const VectorXd lambda0 = barycentric_weights(tp.shape_vertices,
                                               VectorXd::Zero(n));
  tp.cost_offset = x0.dot(weights.Q[0] * x0);
  for (int t = 1; t <= T; ++t) {
    const MatrixXd& Q = t < T ? weights.Q[t] : weights.QT;
    for (int r = 0; r < n; ++r) {
      for (int c = r; c < n; ++c) {
        if (Q(r, c) != 0.0) {
          pb.add_objective_term(tp.zc_index(t, r), tp.zc_index(t, c),
                                2.0 * Q(r, c));
        }
      }
    }
  }
  for (int r = 0; r < m; ++r) {
    for (int c = r; c < m; ++c) {
      if (weights.R[0](r, c) != 0.0) {
        pb.add_objective_term(tp.u0_index(r), tp.u0_index(c),
                              2.0 * weights.R[0](r, c));
      }
    }
  }
  for (int t = 1; t <= T - 1; ++t) {
    // u_center = L U_t with L = [lambda_0 I, ..., lambda_{V-1} I];
    // quadratic form 2 L'RL over the stacked per-vertex inputs
    const MatrixXd& R = weights.R[t];
    MatrixXd P = MatrixXd::Zero(V * m, V * m);
    for (int v1 = 0; v1 < V; ++v1) {
      for (int v2 = 0; v2 < V; ++v2) {
        P.block(v1 * m, v2 * m, m, m) = 2.0 * lambda0(v1) * lambda0(v2) * R;
      }
    }
    for (int a = 0; a < V * m; ++a) {
      for (int bcol = a; bcol < V * m; ++bcol) {
        if (P(a, bcol) == 0.0) continue;
        pb.add_objective_term(tp.uv_index(t, a / m, a % m),
                              tp.uv_index(t, bcol / m, bcol % m), P(a, bcol));
      }
    }
  }

  tp.raw_constraint_count = pb.num_ineqs();
  tp.program = pb.build();
  return tp;
}

TubeSolution solve_tube(const TubeProgram& program, const SolverOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  TubeSolution sol;
  SolveResult cert;
  const FeasOutcome feas = check_feasible(program.program, opts, nullptr,
                                          &cert);
  if (feas == FeasOutcome::Infeasible) {
    sol.feasible = false;
    sol.status = SolveStatus::PrimalInfeasible;
    sol.wall_time_s = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    return sol;
  }
  if (feas == FeasOutcome::Inconclusive) {
    sol.status = SolveStatus::NumericalFailure;
    return sol;
  }
  InteriorPointSolver solver;
  SolveResult res = solver.solve(program.program, opts);
  sol.status = res.status;
  sol.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (res.status != SolveStatus::Optimal) return sol;
  sol.feasible = true;
  sol.objective = res.objective + program.cost_offset;
  const int T = program.T, n = program.n, m = program.m, V = program.V;
  sol.u0 = VectorXd(m);
  for (int c = 0; c < m; ++c) sol.u0(c) = res.x(program.u0_index(c));
  sol.centers.resize(T);
  sol.alphas.resize(T);
  for (int t = 1; t <= T; ++t) {
    VectorXd z(n);
    for (int c = 0; c < n; ++c) z(c) = res.x(program.zc_index(t, c));
    sol.centers[t - 1] = z;
    sol.alphas[t - 1] = res.x(program.alpha_index(t));
  }
  sol.vertex_inputs.resize(std::max(0, T - 1));
  for (int t = 1; t <= T - 1; ++t) {
    sol.vertex_inputs[t - 1].resize(V);
    for (int v = 0; v < V; ++v) {
      VectorXd u(m);
      for (int c = 0; c < m; ++c) u(c) = res.x(program.uv_index(t, v, c));
      sol.vertex_inputs[t - 1][v] = u;
    }
  }
  return sol;
}

VectorXd barycentric_weights(const std::vector<VectorXd>& vertices,
                             const VectorXd& x) {
  const int V = static_cast<int>(vertices.size());
  const int n = static_cast<int>(x.size());
  ProgramBuilder pb;
  pb.add_vars(V);
  std::vector<ProgramBuilder::Term> sum1;
  for (int v = 0; v < V; ++v) {
    sum1.emplace_back(v, 1.0);
    pb.add_ineq({{v, -1.0}}, 0.0);
  }
  pb.add_eq(sum1, 1.0);
  // least squares on the reconstruction with a small norm tie-breaker
  for (int v1 = 0; v1 < V; ++v1) {
    for (int v2 = v1; v2 < V; ++v2) {
      double p = 2.0 * vertices[v1].dot(vertices[v2]);
      if (v1 == v2) p += 2e-9;
      pb.add_objective_term(v1, v2, p);
    }
    pb.add_linear_cost(v1, -2.0 * vertices[v1].dot(x));
  }
  InteriorPointSolver solver;
  SolveResult res = solver.solve(pb.build());
  if (res.status != SolveStatus::Optimal) {
    throw std::runtime_error("barycentric_weights: QP failed");
  }
  VectorXd recon = VectorXd::Zero(n);
  for (int v = 0; v < V; ++v) recon += res.x(v) * vertices[v];
  if ((recon - x).cwiseAbs().maxCoeff() >
      1e-6 * (1 + x.cwiseAbs().maxCoeff())) {
    throw std::runtime_error(
        "barycentric_weights: point lies outside the vertex hull");
  }
  return res.x;
}

TubeController::TubeController(const TubeProgram& program,
                               const TubeSolution& solution)
    : program_(program), solution_(solution) {
  if (!solution.feasible) {
    throw std::invalid_argument("TubeController: infeasible solution");
  }
}

std::vector<VectorXd> TubeController::section_vertices(int t) const {
  std::vector<VectorXd> verts;
  verts.reserve(program_.shape_vertices.size());
  for (const auto& zv : program_.shape_vertices) {
    verts.push_back(solution_.centers[t - 1] + solution_.alphas[t - 1] * zv);
  }
  return verts;
}

VectorXd TubeController::input_at(int t, const VectorXd& x) const {
  if (t == 0) return solution_.u0;
  if (t > program_.T - 1) {
    throw std::invalid_argument("TubeController: no input beyond T-1");
  }
  const std::vector<VectorXd> verts = section_vertices(t);
  const VectorXd lambda = barycentric_weights(verts, x);
  VectorXd u = VectorXd::Zero(program_.m);
  for (int v = 0; v < program_.V; ++v) {
    u += lambda(v) * solution_.vertex_inputs[t - 1][v];
  }
  return u;
}

}  // namespace slsmpc
