#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "slsmpc/polytope.hpp"
#include "slsmpc/robust.hpp"
#include "slsmpc/synthesis.hpp"
#include "test_util.hpp"

using namespace slsmpc;
using namespace slsmpc::test;

namespace {

// terminal set computed once for the shared double-integrator setup
const Polytope& terminal_set() {
  static Polytope XT = [] {
    LtvModel model = paper_model(1);
    Polytope X = Polytope::inf_ball(2, 10.0);
    Polytope U = Polytope::inf_ball(1, 2.0);
    Polytope set = max_robust_invariant_set(X, U, model).set;
    set.ensure_hrep();
    set.ensure_vrep();
    return set;
  }();
  return XT;
}

ConstraintSet paper_constraints() {
  const Polytope& XT = terminal_set();
  return paper_constraints_box(XT.F(), XT.b());
}

}  // namespace

TEST_CASE("geometric sum handles the unit ratio exactly") {
  CHECK(geometric_sum(1.0, 10) == 10.0);
  CHECK(geometric_sum(0.0, 5) == 1.0);
  CHECK(geometric_sum(2.0, 3) == 7.0);
  CHECK(geometric_sum(0.5, 4) == doctest::Approx(1.875).epsilon(1e-14));
}

TEST_CASE("hyperparameter validation") {
  Hyperparameters ok{1.0, 2.0, 3.0, 0.5};
  ok.validate();
  CHECK_THROWS(Hyperparameters{0.0, 1.0, 1.0, 0.5}.validate());
  CHECK_THROWS(Hyperparameters{1.0, 1.0, 1.0, 1.0}.validate());
}

TEST_CASE("reported variable count matches the complexity accounting") {
  LtvModel model = paper_model(10);
  ConstraintSet cs = paper_constraints();
  CostWeights w = paper_weights(10);
  VectorXd x0(2);
  x0 << -7, -2;
  RelaxationOptions opt;
  opt.hyper = {1.0, 1.0, 1.0, 0.5};
  RelaxationProgram rp = build_relaxation(model, cs, w, x0, opt);
  CHECK(rp.reported_variable_count == 726);  // (T+1)^2 n (n+m)
  LtvModel model6 = paper_model(6);
  CostWeights w6 = paper_weights(6);
  RelaxationProgram rp6 = build_relaxation(model6, cs, w6, x0, opt);
  CHECK(rp6.reported_variable_count == 49 * 2 * 3);
}

TEST_CASE("relaxation residual validates solver outputs") {
  const int T = 4;
  LtvModel model = paper_model(T);
  ConstraintSet cs = paper_constraints();
  CostWeights w = paper_weights(T);
  VectorXd x0(2);
  x0 << -3, -1;
  RelaxationOptions opt;
  opt.hyper = {0.5, 0.5, 3.0, 0.5};
  RelaxationProgram rp = build_relaxation(model, cs, w, x0, opt);
  VectorXd witness;
  if (check_feasible(rp.program, {}, &witness) == FeasOutcome::Feasible) {
    SystemResponse resp = rp.layout.unpack(witness.head(rp.num_phi_vars));
    CHECK(relaxation_residual(model, cs, x0, opt.hyper, resp) <= 1e-6);
  }
}

TEST_CASE("zero uncertainty makes the caps vacuous") {
  const int T = 4;
  LtvModel model = paper_model(T, 0.0, 0.0, 0.0);
  ConstraintSet cs = paper_constraints();
  CostWeights w = paper_weights(T);
  VectorXd x0(2);
  x0 << -2, 0;
  SearchRanges ranges;
  BoundsReport rep = bisect_bounds(model, cs, w, x0, ranges, 0.01);
  CHECK(rep.lb_tau <= 0.011);
  CHECK(rep.lb_gamma <= 0.011);
  CHECK_FALSE(rep.infeasible_certificate.has_value());
}

TEST_CASE("bisection solve counts respect the logarithmic budget") {
  const int T = 4;
  LtvModel model = paper_model(T);
  ConstraintSet cs = paper_constraints();
  CostWeights w = paper_weights(T);
  VectorXd x0(2);
  x0 << -3, -1;
  SearchRanges ranges;  // [0, 10]
  const double eps_tol = 0.01;
  BoundsReport rep = bisect_bounds(model, cs, w, x0, ranges, eps_tol);
  const int budget = static_cast<int>(std::ceil(std::log2(10.0 / eps_tol)));
  CHECK(rep.max_solves_per_bound() <= budget);
  CHECK(rep.solves_lb_tau == budget);
}

TEST_CASE("offline lower bounds are independent of the initial state") {
  const int T = 4;
  LtvModel model = paper_model(T);
  ConstraintSet cs = paper_constraints();
  CostWeights w = paper_weights(T);
  SearchRanges ranges;
  VectorXd a(2), b(2);
  a << -3, -1;
  b << 4, 1;
  BoundsReport ra = bisect_bounds(model, cs, w, a, ranges, 0.01);
  BoundsReport rb = bisect_bounds(model, cs, w, b, ranges, 0.01);
  CHECK(std::abs(ra.lb_tau - rb.lb_tau) <= 1e-9);
  CHECK(std::abs(ra.lb_beta - rb.lb_beta) <= 1e-9);
}

TEST_CASE("certified infeasibility outside the terminal-reachable region") {
  const int T = 4;
  LtvModel model = paper_model(T);
  ConstraintSet cs = paper_constraints();
  CostWeights w = paper_weights(T);
  VectorXd x0(2);
  x0 << 9.9, 9.9;
  SearchRanges ranges;
  BoundsReport rep = bisect_bounds(model, cs, w, x0, ranges, 0.01);
  CHECK(verify_infeasible(rep));
  CHECK(rep.infeasible_certificate.has_value());
  CHECK_FALSE(terminal_set().contains(x0));
  CHECK_THROWS_AS(
      grid_search_solve(model, cs, w, x0, rep, {}), std::invalid_argument);
}

TEST_CASE("verify_infeasible flags crossings only") {
  BoundsReport rep;
  rep.eps_tol = 0.01;
  rep.outer_lb_beta = 5;
  rep.outer_ub_beta = 2;
  rep.outer_ub_tau = rep.outer_lb_tau = 1;
  rep.outer_ub_gamma = rep.outer_lb_gamma = 1;
  CHECK(verify_infeasible(rep));
  rep.outer_lb_beta = rep.outer_ub_beta = 2;
  CHECK_FALSE(verify_infeasible(rep));
}

TEST_CASE("monotone feasibility in each scalar") {
  const int T = 4;
  LtvModel model = paper_model(T);
  ConstraintSet cs = paper_constraints();
  CostWeights w = paper_weights(T);
  VectorXd x0(2);
  x0 << -3, -1;
  auto probe_tau = [&](double tau) {
    RelaxationOptions opt;
    opt.hyper = {tau, 1.0, 1.0, 0.5};
    opt.with_safety = opt.with_beta = opt.with_gamma = opt.with_cost = false;
    return check_feasible(build_relaxation(model, cs, w, x0, opt).program);
  };
  // bracket the transition and verify monotonicity across it
  std::vector<double> taus = {0.05, 0.2, 0.5, 1.0, 2.0, 5.0};
  bool was_feasible = false;
  for (double tau : taus) {
    const bool feas = probe_tau(tau) == FeasOutcome::Feasible;
    if (was_feasible) CHECK(feas);
    was_feasible = was_feasible || feas;
  }
  CHECK(was_feasible);
}

TEST_CASE("experiment scenario is feasible at the short horizon") {
  const int T = 6;
  LtvModel model = paper_model(T);
  ConstraintSet cs = paper_constraints();
  CostWeights w = paper_weights(T);
  VectorXd x0(2);
  x0 << -7, -2;
  SearchConfig sc;
  sc.grid.dims = {5, 5, 5};
  MpcStepResult res = mpc_step(model, cs, w, x0, sc);
  REQUIRE(res.solution.status == RobustStatus::Feasible);
  REQUIRE(res.u0.has_value());
  CHECK(std::abs((*res.u0)(0)) <= 2.0 + 1e-9);
  CHECK(res.solution.max_constraint_residual <= 1e-7);
  // the winning tuple satisfies the caps strictly at the solution
  res.solution.hyper.validate();
}

TEST_CASE("origin start gives the zero input") {
  const int T = 4;
  LtvModel model = paper_model(T);
  ConstraintSet cs = paper_constraints();
  CostWeights w = paper_weights(T);
  VectorXd x0 = VectorXd::Zero(2);
  SearchConfig sc;
  MpcStepResult res = mpc_step(model, cs, w, x0, sc);
  REQUIRE(res.solution.status == RobustStatus::Feasible);
  CHECK(res.u0->cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("degenerate reduction to nominal mpc") {
  const int T = 5;
  LtvModel model = paper_model(T, 0.0, 0.0, 0.0);
  ConstraintSet cs = paper_constraints();
  CostWeights w = paper_weights(T);
  for (double x1 : {-6.0, -2.0, 3.0}) {
    VectorXd x0(2);
    x0 << x1, -1.0;
    NominalMpcResult nominal = solve_nominal_mpc(model, cs, w, x0);
    SearchConfig sc;
    MpcStepResult robust = mpc_step(model, cs, w, x0, sc);
    CHECK(nominal.feasible ==
          (robust.solution.status == RobustStatus::Feasible));
    if (nominal.feasible &&
        robust.solution.status == RobustStatus::Feasible) {
      CHECK(robust.solution.objective ==
            doctest::Approx(nominal.objective)
                .epsilon(1e-5)
                .scale(1 + std::abs(nominal.objective)));
    }
  }
}

TEST_CASE("soundness under sampled uncertainty") {
  const int T = 5;
  LtvModel model = paper_model(T);
  ConstraintSet cs = paper_constraints();
  CostWeights w = paper_weights(T);
  VectorXd x0(2);
  x0 << -5, -1;
  SearchConfig sc;
  sc.grid.dims = {5, 5, 5};
  MpcStepResult res = mpc_step(model, cs, w, x0, sc);
  REQUIRE(res.solution.status == RobustStatus::Feasible);
  BltOperator K = realize_controller(res.solution.response);
  const StackedConstraints stacked = cs.stack(T);
  Rng rng(71);
  double min_margin = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 300; ++trial) {
    UncertaintySample s = sample_uncertainty(model, SamplingMode::Mixed, rng);
    auto [x, u] = simulate_closed_loop(K, s.true_A(model), s.true_B(model),
                                       x0, s.w);
    VectorXd xu((T + 1) * 3);
    xu << x.stacked, u.stacked;
    const VectorXd margins = stacked.b - stacked.F * xu;
    min_margin = std::min(min_margin, margins.minCoeff());
  }
  CHECK(min_margin >= -1e-9);
  // membership in the DP terminal set certifies the feasibility claim
  CHECK(terminal_set().contains(x0));
}

TEST_CASE("feasibility at any grid tuple is sound") {
  const int T = 4;
  LtvModel model = paper_model(T);
  ConstraintSet cs = paper_constraints();
  CostWeights w = paper_weights(T);
  VectorXd x0(2);
  x0 << -4, -1;
  SearchRanges ranges;
  BoundsReport rep = bisect_bounds(model, cs, w, x0, ranges, 0.01);
  REQUIRE_FALSE(verify_infeasible(rep));
  // two distinct feasible tuples from the grid both produce sound loops
  GridSearchOptions opts;
  RobustSolution first = grid_search_solve(model, cs, w, x0, rep, opts);
  REQUIRE(first.status == RobustStatus::Feasible);
  GridSearchOptions opts2;
  opts2.dims = {5, 5, 5};
  RobustSolution second = grid_search_solve(model, cs, w, x0, rep, opts2);
  REQUIRE(second.status == RobustStatus::Feasible);
  const StackedConstraints stacked = cs.stack(T);
  Rng rng(99);
  for (const RobustSolution* sol : {&first, &second}) {
    BltOperator K = realize_controller(sol->response);
    for (int trial = 0; trial < 100; ++trial) {
      UncertaintySample s =
          sample_uncertainty(model, SamplingMode::Vertices, rng);
      auto [x, u] = simulate_closed_loop(K, s.true_A(model), s.true_B(model),
                                         x0, s.w);
      VectorXd xu((T + 1) * 3);
      xu << x.stacked, u.stacked;
      CHECK((stacked.b - stacked.F * xu).minCoeff() >= -1e-9);
    }
  }
}

TEST_CASE("nominal mpc rejects initial states outside X") {
  const int T = 4;
  LtvModel model = paper_model(T, 0, 0, 0);
  ConstraintSet cs = paper_constraints();
  CostWeights w = paper_weights(T);
  VectorXd x0(2);
  x0 << 11.0, 0.0;
  CHECK_FALSE(solve_nominal_mpc(model, cs, w, x0).feasible);
}
