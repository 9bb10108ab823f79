#ifndef SLSMPC_CONIC_HPP
#define SLSMPC_CONIC_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>
#include <string>
#include <vector>

namespace slsmpc {

using Eigen::VectorXd;
using SparseMat = Eigen::SparseMatrix<double>;

/// Convex quadratic program
///   min 1/2 x'Px + q'x   s.t.  Cx = d,  Ax <= b
/// with P symmetric positive semidefinite (possibly zero).
struct ConicProgram {
  int num_vars = 0;
  SparseMat P;
  VectorXd q;
  SparseMat C;
  VectorXd d;
  SparseMat A;
  VectorXd b;

  int num_eq() const { return static_cast<int>(d.size()); }
  int num_ineq() const { return static_cast<int>(b.size()); }
  /// Dimension/symmetry/PSD checks (eigenvalue floor -1e-9 after
  /// symmetrization; factorization-based for large P).
  void validate() const;
  /// Self-describing JSON dump for external reproduction.
  void dump_json(const std::string& path) const;
};

enum class SolveStatus {
  Optimal,
  PrimalInfeasible,
  Unbounded,
  IterationLimit,
  NumericalFailure,
};

std::string to_string(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  VectorXd x;
  double objective = 0.0;
  int iterations = 0;
  double wall_time_s = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  // Farkas certificate (y over inequality rows, mu over equality rows)
  // populated when status == PrimalInfeasible: A'y + C'mu = 0, y >= 0,
  // b'y + d'mu < 0, verified numerically before being reported.
  VectorXd farkas_y;
  VectorXd farkas_mu;
};

struct SolverOptions {
  double feas_tol = 1e-8;
  double dual_tol = 1e-8;
  double gap_tol = 1e-9;
  int max_iter = 100;
  // Phase-1 verdict band: max violation below feas_tol_accept is feasible,
  // above infeas_tol_reject is infeasible, in between is inconclusive.
  double feas_tol_accept = 1e-7;
  double infeas_tol_reject = 1e-6;
  bool verbose = false;
};

class SolverBackend {
public:
  virtual ~SolverBackend() = default;
  virtual SolveResult solve(const ConicProgram& prog,
                            const SolverOptions& opts = {}) = 0;
  virtual std::string name() const = 0;
};

/// Primal-dual interior-point method on the regularized quasidefinite KKT
/// system (sparse LDLT, Mehrotra predictor-corrector). Infeasibility is
/// established through an always-feasible phase-1 reformulation whose dual
/// yields a Farkas certificate; the certificate is verified before the
/// PrimalInfeasible status is returned.
class InteriorPointSolver : public SolverBackend {
public:
  SolveResult solve(const ConicProgram& prog,
                    const SolverOptions& opts = {}) override;
  std::string name() const override { return "ipm"; }

  /// Minimize the worst constraint violation; used for feasibility tests
  /// and as the infeasibility certifier.
  SolveResult solve_phase1(const ConicProgram& prog, const SolverOptions& opts);
};

/// Operator-splitting (ADMM) solver with an active-set polish step. Kept as
/// an independent second route for cross-checking the interior-point
/// results; not tuned for feasibility certification.
class AdmmSolver : public SolverBackend {
public:
  SolveResult solve(const ConicProgram& prog,
                    const SolverOptions& opts = {}) override;
  std::string name() const override { return "admm"; }

  int max_admm_iter = 40000;
  double rho = 0.1;
  double sigma = 1e-6;
  double alpha = 1.6;
  double eps_abs = 1e-9;
  double eps_rel = 1e-9;
};

enum class FeasOutcome { Feasible, Infeasible, Inconclusive };

/// Zero-objective feasibility check. On Feasible, *witness (if given)
/// receives a point satisfying all constraints within tolerance. On
/// Infeasible a verified Farkas certificate exists (in *cert if given).
FeasOutcome check_feasible(const ConicProgram& prog,
                           const SolverOptions& opts = {},
                           VectorXd* witness = nullptr,
                           SolveResult* cert = nullptr);

/// Incremental triplet-based builder for ConicProgram instances.
class ProgramBuilder {
public:
  int add_var() { return num_vars_++; }
  int add_vars(int k) {
    int first = num_vars_;
    num_vars_ += k;
    return first;
  }
  int num_vars() const { return num_vars_; }

  using Term = std::pair<int, double>;

  void add_eq(const std::vector<Term>& lhs, double rhs);
  void add_ineq(const std::vector<Term>& lhs, double rhs);  // lhs <= rhs
  void add_objective_term(int i, int j, double Pij);        // 1/2 x'Px form
  void add_linear_cost(int i, double qi);

  int num_eqs() const { return static_cast<int>(d_.size()); }
  int num_ineqs() const { return static_cast<int>(b_.size()); }

  ConicProgram build() const;

private:
  int num_vars_ = 0;
  std::vector<Eigen::Triplet<double>> eq_;
  std::vector<double> d_;
  std::vector<Eigen::Triplet<double>> ineq_;
  std::vector<double> b_;
  std::vector<Eigen::Triplet<double>> pt_;
  std::vector<std::pair<int, double>> q_;
};

}  // namespace slsmpc

#endif  // SLSMPC_CONIC_HPP
