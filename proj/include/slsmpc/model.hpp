#ifndef SLSMPC_MODEL_HPP
#define SLSMPC_MODEL_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "slsmpc/blt.hpp"

namespace slsmpc {

enum class UncertaintyStructure { Memoryless, FullLtv };

/// Nominal LTV model over a fixed horizon with induced inf-to-inf norm
/// bounds on the model error and an inf-norm bound on the disturbance.
struct LtvModel {
  int horizon = 0;               // T
  std::vector<MatrixXd> A;       // n x n, t = 0..T-1
  std::vector<MatrixXd> B;       // n x m, t = 0..T-1
  double eps_A = 0.0;
  double eps_B = 0.0;
  double sigma_w = 0.0;
  UncertaintyStructure uncertainty = UncertaintyStructure::Memoryless;

  int state_dim() const { return A.empty() ? 0 : static_cast<int>(A[0].rows()); }
  int input_dim() const { return B.empty() ? 0 : static_cast<int>(B[0].cols()); }
  double eps_total() const { return eps_A + eps_B; }
  bool is_lti() const;
  void validate() const;

  /// blkdiag(A_0, ..., A_{T-1}, 0) as a block-diagonal operator.
  BltOperator stacked_A() const;
  /// blkdiag(B_0, ..., B_{T-1}, 0).
  BltOperator stacked_B() const;

  /// LTI convenience: repeat (A, B) over the horizon.
  static LtvModel lti(const MatrixXd& A, const MatrixXd& B, int horizon,
                      double eps_A = 0.0, double eps_B = 0.0,
                      double sigma_w = 0.0);
};

/// Quadratic stage/terminal weights. R_t must be positive definite,
/// Q_t and Q_T positive semidefinite (eigenvalue floor -1e-10).
struct CostWeights {
  std::vector<MatrixXd> Q;  // t = 0..T-1
  MatrixXd QT;
  std::vector<MatrixXd> R;  // t = 0..T-1

  void validate(int horizon, int n, int m) const;
  static CostWeights constant(const MatrixXd& Q, const MatrixXd& R,
                              const MatrixXd& QT, int horizon);
};

/// Rows of the stacked trajectory constraint F [x; u] <= b, labelled by
/// origin so margins can be reported per kind.
enum class ConstraintKind { State, Terminal, Input };

struct StackedConstraints {
  Eigen::SparseMatrix<double> F;  // rows x ((T+1)n + (T+1)m)
  VectorXd b;
  std::vector<ConstraintKind> kind;  // per row
  std::vector<int> time;             // per row: prediction time index
  int n = 0, m = 0, horizon = 0;
};

/// Polytopic state, input and terminal constraints as (F, b) pairs.
struct ConstraintSet {
  MatrixXd Fx;
  VectorXd bx;
  MatrixXd Fu;
  VectorXd bu;
  MatrixXd FT;
  VectorXd bT;

  void validate(int n, int m) const;

  /// Concatenation over the horizon: x_0..x_{T-1} in X, x_T in X_T,
  /// u_0..u_{T-1} in U. u_T is unconstrained (it is fixed to zero in
  /// every program built here).
  StackedConstraints stack(int horizon) const;
};

/// Closed-loop system response pair (state map, input map).
struct SystemResponse {
  BltOperator phi_x;  // n x n blocks
  BltOperator phi_u;  // m x n blocks

  int horizon() const { return phi_x.horizon(); }
  int state_dim() const { return phi_x.block_rows(); }
  int input_dim() const { return phi_u.block_rows(); }

  /// Stacked operator [phi_x; phi_u] with (n+m) x n blocks.
  BltOperator stacked() const { return phi_x.vcat(phi_u); }
};

}  // namespace slsmpc

#endif  // SLSMPC_MODEL_HPP
