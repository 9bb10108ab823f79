#ifndef SLSMPC_SYNTHESIS_HPP
#define SLSMPC_SYNTHESIS_HPP

#include <utility>
#include <vector>

#include "slsmpc/conic.hpp"
#include "slsmpc/model.hpp"

namespace slsmpc {

/// Decision-variable indexing for the system-response pair. Variables are
/// the entries of every causal block of phi_x and of phi_u except the last
/// input block row, which is pinned to zero (u_T carries no cost and no
/// constraint).
struct PhiLayout {
  int T = 0, n = 0, m = 0;

  static PhiLayout create(const LtvModel& model);

  int x_index(int row, int delay, int r, int c) const;
  int u_index(int row, int delay, int r, int c) const;
  bool u_row_fixed(int row) const { return row == T; }
  int num_vars() const;
  /// Entry count of the full stacked (T+1)-block response matrices,
  /// the complexity accounting used in reports: (T+1)^2 n (n+m).
  long long reported_variable_count() const {
    return 1ll * (T + 1) * (T + 1) * n * (n + m);
  }

  SystemResponse unpack(const VectorXd& sol) const;
  VectorXd pack(const SystemResponse& resp) const;
};

/// Appends the achievability equalities [I - Z A, -Z B][phi_x; phi_u] = I
/// over the layout's variables. Returns the number of scalar rows added.
int add_affine_constraint(ProgramBuilder& pb, const PhiLayout& layout,
                          const LtvModel& model);

/// Max-abs residual of the achievability constraint at a given response.
double affine_residual(const LtvModel& model, const SystemResponse& resp);

/// Completes phi_x from phi_u so the pair satisfies the achievability
/// constraint exactly: phi_x = (I - Z A)^-1 (I + Z B phi_u).
SystemResponse complete_response(const LtvModel& model,
                                 const BltOperator& phi_u);

/// K = phi_u * phi_x^-1.
BltOperator realize_controller(const SystemResponse& resp);

/// Rollout of x_{t+1} = A_t x_t + B_t u_t + w_t under the block feedback
/// u_t = sum_i K(t, t-i) x_i, for arbitrary (possibly perturbed) matrices.
std::pair<SignalTrajectory, SignalTrajectory> simulate_closed_loop(
    const BltOperator& K, const std::vector<MatrixXd>& trueA,
    const std::vector<MatrixXd>& trueB, const VectorXd& x0,
    const std::vector<VectorXd>& w_seq);

/// Rollout under operator uncertainty: x_{t+1} = A_t x_t + (D_A x)_t +
/// B_t u_t + (D_B u)_t + w_t with causal BLT operators D_A, D_B.
std::pair<SignalTrajectory, SignalTrajectory> simulate_closed_loop(
    const BltOperator& K, const LtvModel& nominal, const BltOperator& deltaA,
    const BltOperator& deltaB, const VectorXd& x0,
    const std::vector<VectorXd>& w_seq);

struct RobustResponseCheck {
  VectorXd via_inverse;   // Phi (I - D Phi)^-1 w
  VectorXd via_woodbury;  // (Phi + Phi D (I - Phi D)^-1 Phi) w
  double deviation = 0.0; // max-abs difference
};

/// Evaluates the perturbed closed-loop response through both algebraic
/// routes; the deviation is an exactness check, not a tolerance fit.
RobustResponseCheck validate_robust_response(const SystemResponse& resp,
                                             const BltOperator& deltaA,
                                             const BltOperator& deltaB,
                                             const VectorXd& w);

/// Adds the nominal quadratic cost || blkdiag(Q^1/2, R^1/2) Phi(:,0) x0 ||^2
/// over the layout's first-block-column entries.
void add_nominal_cost(ProgramBuilder& pb, const PhiLayout& layout,
                      const CostWeights& weights, const VectorXd& x0);

/// The same cost evaluated at a concrete response.
double nominal_cost_of_response(const CostWeights& weights,
                                const SystemResponse& resp,
                                const VectorXd& x0);

}  // namespace slsmpc

#endif  // SLSMPC_SYNTHESIS_HPP
