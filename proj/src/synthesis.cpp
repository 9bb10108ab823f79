#include "slsmpc/synthesis.hpp"

#include <cmath>
#include <stdexcept>

namespace slsmpc {

PhiLayout PhiLayout::create(const LtvModel& model) {
  PhiLayout l;
  l.T = model.horizon;
  l.n = model.state_dim();
  l.m = model.input_dim();
  return l;
}

namespace {
// blocks (0,0), (1,0), (1,1), ... enumerated row-major by (row, delay)
inline int tri_block_index(int row, int delay) {
  return row * (row + 1) / 2 + delay;
}
}  // namespace

int PhiLayout::x_index(int row, int delay, int r, int c) const {
  return tri_block_index(row, delay) * n * n + r * n + c;
}

int PhiLayout::u_index(int row, int delay, int r, int c) const {
  if (row >= T) {
    throw std::invalid_argument("PhiLayout: u_T blocks are fixed to zero");
  }
  const int base = (T + 1) * (T + 2) / 2 * n * n;
  return base + tri_block_index(row, delay) * m * n + r * n + c;
}

int PhiLayout::num_vars() const {
  return (T + 1) * (T + 2) / 2 * n * n + T * (T + 1) / 2 * m * n;
}

SystemResponse PhiLayout::unpack(const VectorXd& sol) const {
  SystemResponse resp;
  resp.phi_x = BltOperator(T, n, n);
  resp.phi_u = BltOperator(T, m, n);
  for (int i = 0; i <= T; ++i) {
    for (int k = 0; k <= i; ++k) {
      MatrixXd bx(n, n);
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) bx(r, c) = sol(x_index(i, k, r, c));
      }
      resp.phi_x.set_block(i, k, bx);
      if (i < T) {
        MatrixXd bu(m, n);
        for (int r = 0; r < m; ++r) {
          for (int c = 0; c < n; ++c) bu(r, c) = sol(u_index(i, k, r, c));
        }
        resp.phi_u.set_block(i, k, bu);
      }
    }
  }
  return resp;
}

VectorXd PhiLayout::pack(const SystemResponse& resp) const {
  VectorXd sol = VectorXd::Zero(num_vars());
  for (int i = 0; i <= T; ++i) {
    for (int k = 0; k <= i; ++k) {
      const MatrixXd bx = resp.phi_x.block(i, k);
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) sol(x_index(i, k, r, c)) = bx(r, c);
      }
      if (i < T) {
        const MatrixXd bu = resp.phi_u.block(i, k);
        for (int r = 0; r < m; ++r) {
          for (int c = 0; c < n; ++c) sol(u_index(i, k, r, c)) = bu(r, c);
        }
      }
    }
  }
  return sol;
}

int add_affine_constraint(ProgramBuilder& pb, const PhiLayout& layout,
                          const LtvModel& model) {
  const int T = layout.T, n = layout.n, m = layout.m;
  int rows = 0;
  for (int i = 0; i <= T; ++i) {
    for (int c = 0; c <= i; ++c) {
      for (int r = 0; r < n; ++r) {
        for (int cc = 0; cc < n; ++cc) {
          std::vector<ProgramBuilder::Term> lhs;
          lhs.emplace_back(layout.x_index(i, i - c, r, cc), 1.0);
          if (i >= 1 && c <= i - 1) {
            const MatrixXd& At = model.A[i - 1];
            const MatrixXd& Bt = model.B[i - 1];
            for (int s = 0; s < n; ++s) {
              if (At(r, s) != 0.0) {
                lhs.emplace_back(layout.x_index(i - 1, i - 1 - c, s, cc),
                                 -At(r, s));
              }
            }
            for (int s = 0; s < m; ++s) {
              if (Bt(r, s) != 0.0) {
                lhs.emplace_back(layout.u_index(i - 1, i - 1 - c, s, cc),
                                 -Bt(r, s));
              }
            }
          }
          pb.add_eq(lhs, (i == c && r == cc) ? 1.0 : 0.0);
          ++rows;
        }
      }
    }
  }
  return rows;
}

double affine_residual(const LtvModel& model, const SystemResponse& resp) {
  const int n = model.state_dim();
  const BltOperator Z = BltOperator::downshift(model.horizon, n);
  const BltOperator lhs = resp.phi_x - (Z * model.stacked_A()) * resp.phi_x -
                          (Z * model.stacked_B()) * resp.phi_u -
                          BltOperator::identity(model.horizon, n);
  double r = 0.0;
  for (const auto& [idx, blk] : lhs.blocks()) {
    r = std::max(r, blk.cwiseAbs().maxCoeff());
  }
  return r;
}

SystemResponse complete_response(const LtvModel& model,
                                 const BltOperator& phi_u) {
  const int n = model.state_dim();
  const int T = model.horizon;
  const BltOperator Z = BltOperator::downshift(T, n);
  const BltOperator I = BltOperator::identity(T, n);
  const BltOperator ZB = Z * model.stacked_B();
  SystemResponse resp;
  resp.phi_u = phi_u;
  resp.phi_x = (I - Z * model.stacked_A()).inverse() * (I + ZB * phi_u);
  return resp;
}

BltOperator realize_controller(const SystemResponse& resp) {
  return resp.phi_u * resp.phi_x.inverse();
}

std::pair<SignalTrajectory, SignalTrajectory> simulate_closed_loop(
    const BltOperator& K, const std::vector<MatrixXd>& trueA,
    const std::vector<MatrixXd>& trueB, const VectorXd& x0,
    const std::vector<VectorXd>& w_seq) {
  const int T = K.horizon();
  const int n = K.block_cols();
  const int m = K.block_rows();
  if (static_cast<int>(w_seq.size()) != T) {
    throw std::invalid_argument("simulate_closed_loop: need T disturbances");
  }
  SignalTrajectory x(T, n, SignalTrajectory::Role::State);
  SignalTrajectory u(T, m, SignalTrajectory::Role::Input);
  x.set_block(0, x0);
  for (int t = 0; t <= T; ++t) {
    VectorXd ut = VectorXd::Zero(m);
    for (int i = 0; i <= t; ++i) {
      if (K.has_block(t, t - i)) ut.noalias() += K.block(t, t - i) * x.block(i);
    }
    u.set_block(t, ut);
    if (t < T) {
      x.set_block(t + 1, trueA[t] * x.block(t) + trueB[t] * ut + w_seq[t]);
    }
  }
  return {x, u};
}

std::pair<SignalTrajectory, SignalTrajectory> simulate_closed_loop(
    const BltOperator& K, const LtvModel& nominal, const BltOperator& deltaA,
    const BltOperator& deltaB, const VectorXd& x0,
    const std::vector<VectorXd>& w_seq) {
  const int T = K.horizon();
  const int n = K.block_cols();
  const int m = K.block_rows();
  SignalTrajectory x(T, n, SignalTrajectory::Role::State);
  SignalTrajectory u(T, m, SignalTrajectory::Role::Input);
  x.set_block(0, x0);
  for (int t = 0; t <= T; ++t) {
    VectorXd ut = VectorXd::Zero(m);
    for (int i = 0; i <= t; ++i) {
      if (K.has_block(t, t - i)) ut.noalias() += K.block(t, t - i) * x.block(i);
    }
    u.set_block(t, ut);
    if (t < T) {
      VectorXd next = nominal.A[t] * x.block(t) + nominal.B[t] * ut + w_seq[t];
      for (int i = 0; i <= t; ++i) {
        if (deltaA.has_block(t, t - i)) {
          next.noalias() += deltaA.block(t, t - i) * x.block(i);
        }
        if (deltaB.has_block(t, t - i)) {
          next.noalias() += deltaB.block(t, t - i) * u.block(i);
        }
      }
      x.set_block(t + 1, next);
    }
  }
  return {x, u};
}

RobustResponseCheck validate_robust_response(const SystemResponse& resp,
                                             const BltOperator& deltaA,
                                             const BltOperator& deltaB,
                                             const VectorXd& w) {
  const int T = resp.horizon();
  const int n = resp.state_dim();
  const int m = resp.input_dim();
  const BltOperator phi = resp.stacked();
  const BltOperator delta =
      BltOperator::downshift(T, n) * deltaA.hcat(deltaB);

  const BltOperator In = BltOperator::identity(T, n);
  const BltOperator Inm = BltOperator::identity(T, n + m);
  RobustResponseCheck out;
  out.via_inverse = (phi * (In - delta * phi).inverse()).apply(w);
  out.via_woodbury =
      (phi + phi * delta * (Inm - phi * delta).inverse() * phi).apply(w);
  out.deviation = (out.via_inverse - out.via_woodbury).cwiseAbs().maxCoeff();
  return out;
}

void add_nominal_cost(ProgramBuilder& pb, const PhiLayout& layout,
                      const CostWeights& weights, const VectorXd& x0) {
  const int T = layout.T, n = layout.n, m = layout.m;
  // x_bar_t = phi_x(t, t) x0, u_t = phi_u(t, t) x0; quadratic couplings stay
  // inside each first-column block.
  for (int t = 0; t <= T; ++t) {
    const MatrixXd& Q = (t < T) ? weights.Q[t] : weights.QT;
    for (int r1 = 0; r1 < n; ++r1) {
      for (int r2 = 0; r2 < n; ++r2) {
        if (Q(r1, r2) == 0.0) continue;
        for (int c1 = 0; c1 < n; ++c1) {
          for (int c2 = 0; c2 < n; ++c2) {
            const double v = Q(r1, r2) * x0(c1) * x0(c2);
            if (v == 0.0) continue;
            const int i1 = layout.x_index(t, t, r1, c1);
            const int i2 = layout.x_index(t, t, r2, c2);
            // 1/2 x'Px convention: both matched orderings fold into one term
            if (i1 <= i2) pb.add_objective_term(i1, i2, 2.0 * v);
          }
        }
      }
    }
    if (t < T) {
      const MatrixXd& R = weights.R[t];
      for (int r1 = 0; r1 < m; ++r1) {
        for (int r2 = 0; r2 < m; ++r2) {
          if (R(r1, r2) == 0.0) continue;
          for (int c1 = 0; c1 < n; ++c1) {
            for (int c2 = 0; c2 < n; ++c2) {
              const double v = R(r1, r2) * x0(c1) * x0(c2);
              if (v == 0.0) continue;
              const int i1 = layout.u_index(t, t, r1, c1);
              const int i2 = layout.u_index(t, t, r2, c2);
              if (i1 <= i2) pb.add_objective_term(i1, i2, 2.0 * v);
            }
          }
        }
      }
    }
  }
}

double nominal_cost_of_response(const CostWeights& weights,
                                const SystemResponse& resp,
                                const VectorXd& x0) {
  const int T = resp.horizon();
  double J = 0.0;
  for (int t = 0; t <= T; ++t) {
    const VectorXd xt = resp.phi_x.block(t, t) * x0;
    const MatrixXd& Q = (t < T) ? weights.Q[t] : weights.QT;
    J += xt.dot(Q * xt);
    if (t < T) {
      const VectorXd ut = resp.phi_u.block(t, t) * x0;
      J += ut.dot(weights.R[t] * ut);
    }
  }
  return J;
}

}  // namespace slsmpc
