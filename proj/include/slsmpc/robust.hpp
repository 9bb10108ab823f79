#ifndef SLSMPC_ROBUST_HPP
#define SLSMPC_ROBUST_HPP

#include <array>
#include <functional>
#include <optional>
#include <string>

#include "slsmpc/conic.hpp"
#include "slsmpc/model.hpp"
#include "slsmpc/synthesis.hpp"

namespace slsmpc {

/// Scalars of the robust relaxation. alpha splits the uncertainty budget
/// between the state and input responses; 1/2 reproduces the tau/2, gamma/2
/// constraint forms.
struct Hyperparameters {
  double tau = 1.0;
  double gamma = 1.0;
  double beta = 1.0;
  double alpha = 0.5;
  void validate() const;
};

struct ScalarRange {
  double lo = 0.0;
  double hi = 10.0;
};

struct SearchRanges {
  ScalarRange tau, gamma, beta;
};

/// Sum_{k=0}^{T-1} tau^k, evaluated as the explicit sum so tau = 1 is exact.
double geometric_sum(double tau, int T);

/// Which constraint groups to include; the affine achievability equalities
/// are always present.
struct RelaxationOptions {
  Hyperparameters hyper;
  bool with_safety = true;  // initial-condition + disturbance safety rows
  bool with_beta = true;    // disturbance-channel gain bound
  bool with_tau = true;     // uncertainty-times-response norm cap
  bool with_gamma = true;   // initial-condition leakage cap
  bool with_cost = true;
  double alpha() const { return hyper.alpha; }
};

struct RelaxationProgram {
  ConicProgram program;
  PhiLayout layout;
  long long reported_variable_count = 0;  // (T+1)^2 n (n+m)
  int num_phi_vars = 0;
  int num_slack_vars = 0;
};

/// Assembles the relaxation as a QP/LP over response entries plus
/// norm-epigraph slacks. l1 slacks for the per-row products are shared
/// between the safety rows and the gain-bound rows.
RelaxationProgram build_relaxation(const LtvModel& model,
                                   const ConstraintSet& constraints,
                                   const CostWeights& weights,
                                   const VectorXd& x0,
                                   const RelaxationOptions& options);

/// Max violation of the relaxation's constraint groups at a concrete
/// response, re-evaluated from the dense matrices (independent of the
/// program encoding).
double relaxation_residual(const LtvModel& model,
                           const ConstraintSet& constraints,
                           const VectorXd& x0, const Hyperparameters& hyper,
                           const SystemResponse& resp);

struct BoundsReport {
  // feasible-side bracket ends: the grid endpoints
  double lb_tau = 0, lb_gamma = 0, lb_beta = 0;
  double ub_tau = 0, ub_gamma = 0, ub_beta = 0;
  // infeasible-side bracket ends: a reported crossing of these is a sound
  // certificate that no hyperparameter tuple is feasible
  double outer_lb_tau = 0, outer_lb_gamma = 0, outer_lb_beta = 0;
  double outer_ub_tau = 0, outer_ub_gamma = 0, outer_ub_beta = 0;
  std::optional<std::string> infeasible_certificate;  // crossing component
  bool bisection_clean = true;  // no inconclusive probe anywhere
  double eps_tol = 0;
  // feasibility solves consumed per bound, for the complexity accounting
  int solves_lb_tau = 0, solves_lb_gamma = 0, solves_lb_beta = 0;
  int solves_ub_tau = 0, solves_ub_beta = 0;
  int max_solves_per_bound() const;
  int total_solves() const;
};

/// x0-independent lower bounds, reusable across initial conditions.
struct OfflineBounds {
  double lb_tau = 0;
  double lb_beta = 0;
  double outer_lb_tau = 0;
  double outer_lb_beta = 0;
  int solves_lb_tau = 0;
  int solves_lb_beta = 0;
  bool clean = true;  // no inconclusive probe
};

OfflineBounds compute_offline_bounds(const LtvModel& model,
                                     const ConstraintSet& constraints,
                                     const CostWeights& weights,
                                     const SearchRanges& ranges,
                                     double eps_tol, double alpha = 0.5);

/// Bisection brackets for the three scalars: lower bounds from the
/// uncertainty-cap groups, upper bounds from the safety rows at the pinned
/// lower bounds, and the leakage upper bound by the geometric-sum rescale.
/// Each probe is a zero-objective feasibility LP; a crossed bracket yields
/// the infeasibility certificate.
BoundsReport bisect_bounds(const LtvModel& model,
                           const ConstraintSet& constraints,
                           const CostWeights& weights, const VectorXd& x0,
                           const SearchRanges& ranges, double eps_tol,
                           const OfflineBounds* offline = nullptr,
                           double alpha = 0.5);

/// True iff some component has lb > ub + eps_tol.
bool verify_infeasible(const BoundsReport& bounds);

enum class RobustStatus { Feasible, InfeasibleCertified, Unverified };

std::string to_string(RobustStatus s);

struct RobustSolution {
  SystemResponse response;
  Hyperparameters hyper;
  double objective = 0.0;
  RobustStatus status = RobustStatus::Unverified;
  int solver_iterations = 0;
  double wall_time_s = 0.0;
  int grid_points_tried = 0;
  long long reported_variable_count = 0;
  double max_constraint_residual = 0.0;
};

struct GridSearchOptions {
  std::array<int, 3> dims = {3, 3, 3};
  bool first_feasible = false;  // stop at the first feasible tuple
  double hyper_floor = 1e-9;
  double alpha = 0.5;
  SolverOptions solver;
};

/// Linear grid over the bracket box; returns the minimum-objective feasible
/// point (ties to the lexicographically smallest tuple), or Unverified when
/// no grid point is feasible. Requires a certificate-free bounds report.
RobustSolution grid_search_solve(const LtvModel& model,
                                 const ConstraintSet& constraints,
                                 const CostWeights& weights,
                                 const VectorXd& x0,
                                 const BoundsReport& bounds,
                                 const GridSearchOptions& options = {});

struct SearchConfig {
  SearchRanges ranges;
  double eps_tol = 0.01;
  GridSearchOptions grid;
  double alpha = 0.5;
  const OfflineBounds* offline = nullptr;
};

struct MpcStepResult {
  std::optional<VectorXd> u0;
  RobustSolution solution;
  BoundsReport bounds;
  double bisect_time_s = 0.0;
  double grid_time_s = 0.0;
};

/// Full pipeline: bisect, certificate check, grid search, first action.
MpcStepResult mpc_step(const LtvModel& model, const ConstraintSet& constraints,
                       const CostWeights& weights, const VectorXd& x0,
                       const SearchConfig& config);

/// Directly formulated nominal MPC QP over state/input trajectories; the
/// uncertainty-free reference the relaxation must reduce to.
struct NominalMpcResult {
  bool feasible = false;
  double objective = 0.0;
  VectorXd u0;
  std::vector<VectorXd> x;
  std::vector<VectorXd> u;
};

NominalMpcResult solve_nominal_mpc(const LtvModel& model,
                                   const ConstraintSet& constraints,
                                   const CostWeights& weights,
                                   const VectorXd& x0,
                                   SolverBackend* solver = nullptr);

}  // namespace slsmpc

#endif  // SLSMPC_ROBUST_HPP
