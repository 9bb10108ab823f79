#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "slsmpc/conic.hpp"
#include "slsmpc/sampling.hpp"

using namespace slsmpc;

TEST_CASE("scalar QP with a bound") {
  // min x^2 s.t. x >= 3
  ProgramBuilder pb;
  pb.add_var();
  pb.add_objective_term(0, 0, 2.0);
  pb.add_ineq({{0, -1.0}}, -3.0);
  InteriorPointSolver solver;
  SolveResult res = solver.solve(pb.build());
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.x(0) == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(res.objective == doctest::Approx(9.0).epsilon(1e-6));
}

TEST_CASE("infeasible box yields a verified certificate") {
  // 0 <= x <= -1
  ProgramBuilder pb;
  pb.add_var();
  pb.add_ineq({{0, -1.0}}, 0.0);
  pb.add_ineq({{0, 1.0}}, -1.0);
  ConicProgram prog = pb.build();
  InteriorPointSolver solver;
  SolveResult res = solver.solve_phase1(prog, {});
  REQUIRE(res.status == SolveStatus::PrimalInfeasible);
  // check the Farkas certificate explicitly
  VectorXd aty = SparseMat(prog.A.transpose()) * res.farkas_y;
  CHECK(aty.cwiseAbs().maxCoeff() < 1e-6);
  CHECK(res.farkas_y.minCoeff() >= -1e-12);
  CHECK(prog.b.dot(res.farkas_y) < -1e-9);
}

TEST_CASE("program with no constraints is feasible") {
  ProgramBuilder pb;
  pb.add_vars(3);
  CHECK(check_feasible(pb.build()) == FeasOutcome::Feasible);
}

TEST_CASE("contradictory equalities are infeasible") {
  ProgramBuilder pb;
  pb.add_var();
  pb.add_eq({{0, 1.0}}, 1.0);
  pb.add_eq({{0, 1.0}}, 2.0);
  CHECK(check_feasible(pb.build()) == FeasOutcome::Infeasible);
}

TEST_CASE("equality-constrained QP") {
  // min (x-1)^2 + y^2 s.t. x + y = 3  -> x = 2, y = 1
  ProgramBuilder pb;
  pb.add_vars(2);
  pb.add_objective_term(0, 0, 2.0);
  pb.add_linear_cost(0, -2.0);
  pb.add_objective_term(1, 1, 2.0);
  pb.add_eq({{0, 1.0}, {1, 1.0}}, 3.0);
  InteriorPointSolver solver;
  SolveResult res = solver.solve(pb.build());
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.x(0) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(res.x(1) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("degenerate LP with equalities and inequalities") {
  // min x + y s.t. x + y = 1, x >= 0, y >= 0
  ProgramBuilder pb;
  pb.add_vars(2);
  pb.add_linear_cost(0, 1.0);
  pb.add_linear_cost(1, 1.0);
  pb.add_eq({{0, 1.0}, {1, 1.0}}, 1.0);
  pb.add_ineq({{0, -1.0}}, 0.0);
  pb.add_ineq({{1, -1.0}}, 0.0);
  InteriorPointSolver solver;
  SolveResult res = solver.solve(pb.build());
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.objective == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("determinism across repeated solves") {
  ProgramBuilder pb;
  pb.add_vars(4);
  Rng rng(5);
  for (int i = 0; i < 4; ++i) {
    pb.add_objective_term(i, i, 1.0 + rng.uniform());
    pb.add_linear_cost(i, rng.uniform(-1, 1));
  }
  for (int r = 0; r < 6; ++r) {
    std::vector<ProgramBuilder::Term> row;
    for (int i = 0; i < 4; ++i) row.emplace_back(i, rng.uniform(-1, 1));
    pb.add_ineq(row, rng.uniform(0.5, 2.0));
  }
  ConicProgram prog = pb.build();
  InteriorPointSolver solver;
  SolveResult a = solver.solve(prog);
  SolveResult b = solver.solve(prog);
  REQUIRE(a.status == SolveStatus::Optimal);
  REQUIRE(b.status == SolveStatus::Optimal);
  CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-12));
  CHECK((a.x - b.x).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("row scaling does not change the feasibility verdict") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    ProgramBuilder pa, pc;
    pa.add_vars(3);
    pc.add_vars(3);
    for (int r = 0; r < 8; ++r) {
      std::vector<ProgramBuilder::Term> row, scaled;
      const double scale = std::pow(10.0, rng.uniform(-3, 3));
      double rhs = rng.uniform(-1, 1);
      for (int i = 0; i < 3; ++i) {
        const double v = rng.uniform(-1, 1);
        row.emplace_back(i, v);
        scaled.emplace_back(i, v * scale);
      }
      pa.add_ineq(row, rhs);
      pc.add_ineq(scaled, rhs * scale);
    }
    const FeasOutcome fa = check_feasible(pa.build());
    const FeasOutcome fc = check_feasible(pc.build());
    CHECK(fa == fc);
  }
}

TEST_CASE("ADMM agrees with the interior point method on a QP") {
  Rng rng(15);
  ProgramBuilder pb;
  pb.add_vars(6);
  for (int i = 0; i < 6; ++i) pb.add_objective_term(i, i, 2.0);
  for (int i = 0; i < 6; ++i) pb.add_linear_cost(i, rng.uniform(-2, 2));
  pb.add_eq({{0, 1.0}, {1, 1.0}, {2, 1.0}}, 1.0);
  for (int r = 0; r < 10; ++r) {
    std::vector<ProgramBuilder::Term> row;
    for (int i = 0; i < 6; ++i) row.emplace_back(i, rng.uniform(-1, 1));
    pb.add_ineq(row, rng.uniform(0.2, 1.5));
  }
  ConicProgram prog = pb.build();
  InteriorPointSolver ipm;
  AdmmSolver admm;
  SolveResult a = ipm.solve(prog);
  SolveResult b = admm.solve(prog);
  REQUIRE(a.status == SolveStatus::Optimal);
  REQUIRE(b.status == SolveStatus::Optimal);
  CHECK(a.objective ==
        doctest::Approx(b.objective).epsilon(1e-5).scale(1 + std::abs(
            a.objective)));
}

TEST_CASE("json dump round trips through the schema") {
  ProgramBuilder pb;
  pb.add_vars(2);
  pb.add_objective_term(0, 0, 2.0);
  pb.add_eq({{0, 1.0}, {1, -1.0}}, 0.5);
  pb.add_ineq({{1, 1.0}}, 4.0);
  ConicProgram prog = pb.build();
  const std::string path = "/tmp/slsmpc_prog_dump.json";
  prog.dump_json(path);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line == "{");
}
