#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "slsmpc/conic.hpp"
#include "slsmpc/lqr.hpp"
#include "slsmpc/polytope.hpp"
#include "slsmpc/sampling.hpp"
#include "test_util.hpp"

using namespace slsmpc;
using namespace slsmpc::test;

namespace {
bool has_vertex(const std::vector<VectorXd>& verts, double a, double b,
                double tol = 1e-7) {
  for (const auto& v : verts) {
    if (std::abs(v(0) - a) < tol && std::abs(v(1) - b) < tol) return true;
  }
  return false;
}
}  // namespace

TEST_CASE("unit ball vertex enumeration") {
  Polytope P = Polytope::inf_ball(2, 1.0);
  auto verts = vertex_enumeration(P.F(), P.b());
  REQUIRE(verts.size() == 4);
  for (double a : {-1.0, 1.0}) {
    for (double b : {-1.0, 1.0}) CHECK(has_vertex(verts, a, b));
  }
}

TEST_CASE("state box vertices at radius ten") {
  Polytope P = Polytope::inf_ball(2, 10.0);
  auto verts = vertex_enumeration(P.F(), P.b());
  REQUIRE(verts.size() == 4);
  CHECK(has_vertex(verts, 10.0, 10.0));
  CHECK(has_vertex(verts, -10.0, -10.0));
}

TEST_CASE("degenerate single point") {
  MatrixXd F(4, 2);
  F << 1, 0, -1, 0, 0, 1, 0, -1;
  VectorXd b(4);
  b << 1, -1, 2, -2;  // x = (1, 2)
  auto verts = vertex_enumeration(F, b);
  REQUIRE(verts.size() == 1);
  CHECK(has_vertex(verts, 1.0, 2.0));
}

TEST_CASE("unbounded polytopes are rejected") {
  MatrixXd F(1, 2);
  F << 1, 0;
  VectorXd b(1);
  b << 1;
  CHECK_THROWS_AS(vertex_enumeration(F, b), std::invalid_argument);
}

TEST_CASE("H to V to H round trip") {
  Polytope P = Polytope::inf_ball(2, 3.0);
  P.ensure_vrep();
  Polytope Q = Polytope::from_vrep(P.vertices());
  Q.ensure_hrep();
  CHECK(P.support_gap(Q) < 1e-9);
  P.check_duality();
  Q.check_duality();
}

TEST_CASE("minkowski sum with a point translates") {
  Polytope P = Polytope::inf_ball(2, 2.0);
  VectorXd shift(2);
  shift << 1.0, -1.0;
  Polytope S = minkowski_sum(P, Polytope::singleton(shift));
  S.ensure_vrep();
  CHECK(has_vertex(S.vertices(), 3.0, 1.0));
  CHECK(has_vertex(S.vertices(), -1.0, -3.0));
}

TEST_CASE("minkowski sum of balls adds radii") {
  Polytope a = Polytope::inf_ball(2, 1.5);
  Polytope b = Polytope::inf_ball(2, 0.5);
  Polytope s = minkowski_sum(a, b);
  CHECK(s.support_gap(Polytope::inf_ball(2, 2.0)) < 1e-9);
}

TEST_CASE("minkowski sum matches a dense sampling hull") {
  // W + (A+BK)W for the double-integrator LQR loop
  LtvModel model = paper_model(2);
  const MatrixXd K = dare_gain(model.A[0], model.B[0],
                               MatrixXd::Identity(2, 2),
                               0.1 * MatrixXd::Identity(1, 1));
  const MatrixXd S = model.A[0] + model.B[0] * K;
  Polytope W = Polytope::inf_ball(2, 0.1);
  Polytope sum = minkowski_sum(W, affine_map(S, W));
  sum.ensure_hrep();
  // boundary-sampling oracle: dense samples of w1 + S w2
  Rng rng(7);
  double max_violation = 0.0;
  std::vector<VectorXd> samples;
  for (int i = 0; i < 4000; ++i) {
    VectorXd w1(2), w2(2);
    // sample on the box boundary to stress the hull
    w1 << 0.1 * rng.sign(), rng.uniform(-0.1, 0.1);
    if (rng.uniform() < 0.5) std::swap(w1(0), w1(1));
    w2 << 0.1 * rng.sign(), 0.1 * rng.sign();
    const VectorXd p = w1 + S * w2;
    samples.push_back(p);
    for (int r = 0; r < sum.F().rows(); ++r) {
      max_violation = std::max(max_violation,
                               sum.F().row(r).dot(p) - sum.b()(r));
    }
  }
  CHECK(max_violation < 1e-6);
  // and the hull of the samples is close to the computed sum
  Polytope hull = Polytope::from_vrep(samples);
  CHECK(hull.support_gap(sum) < 1e-2);
}

TEST_CASE("pontryagin difference basics") {
  Polytope P = Polytope::inf_ball(2, 10.0);
  Polytope zero = Polytope::singleton(VectorXd::Zero(2));
  Polytope diff = pontryagin_difference(P, zero);
  CHECK(diff.support_gap(P) < 1e-12);

  Polytope small = Polytope::inf_ball(2, 0.1);
  Polytope shrunk = pontryagin_difference(P, small);
  CHECK(shrunk.support_gap(Polytope::inf_ball(2, 9.9)) < 1e-10);
}

TEST_CASE("property: difference then sum stays inside") {
  Rng rng(21);
  for (int trial = 0; trial < 12; ++trial) {
    std::vector<VectorXd> pts;
    for (int i = 0; i < 8; ++i) {
      VectorXd v(2);
      v << rng.uniform(-3, 3), rng.uniform(-3, 3);
      pts.push_back(v);
    }
    Polytope P = Polytope::from_vrep(pts);
    if (P.num_vertices() < 3) continue;
    P.ensure_hrep();
    Polytope Q = Polytope::inf_ball(2, rng.uniform(0.01, 0.4));
    Polytope D = pontryagin_difference(P, Q);
    if (D.is_empty()) continue;
    Polytope back = minkowski_sum(D, Q);
    CHECK(P.contains_set(back, 1e-7));
  }
}

TEST_CASE("uncertainty vertex enumeration") {
  UncertaintyVertexSet set = UncertaintyVertexSet::enumerate(2, 1, 0.02, 0.05);
  CHECK(set.vertices.size() == 16 * 4);  // (2n)^n * (2m)^n
  Rng rng(33);
  auto inf_norm = [](const MatrixXd& M) {
    return M.cwiseAbs().rowwise().sum().maxCoeff();
  };
  for (const auto& [dA, dB] : set.vertices) {
    CHECK(inf_norm(dA) == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(inf_norm(dB) == doctest::Approx(0.05).epsilon(1e-12));
  }
  // random convex combinations stay inside the ball
  for (int trial = 0; trial < 50; ++trial) {
    MatrixXd mixA = MatrixXd::Zero(2, 2), mixB = MatrixXd::Zero(2, 1);
    double total = 0.0;
    std::vector<double> wts;
    for (size_t i = 0; i < 5; ++i) {
      wts.push_back(rng.uniform());
      total += wts.back();
    }
    for (size_t i = 0; i < 5; ++i) {
      const auto& [dA, dB] =
          set.vertices[rng.uniform_int(static_cast<int>(set.vertices.size()))];
      mixA += wts[i] / total * dA;
      mixB += wts[i] / total * dB;
    }
    CHECK(inf_norm(mixA) <= 0.02 + 1e-12);
    CHECK(inf_norm(mixB) <= 0.05 + 1e-12);
  }
  // degenerate radius collapses to the zero matrix
  UncertaintyVertexSet zero = UncertaintyVertexSet::enumerate(2, 1, 0.0, 0.0);
  CHECK(zero.vertices.size() == 1);
  CHECK(zero.vertices[0].first.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("robust_pre of an empty target is empty") {
  LtvModel model = paper_model(1);
  UncertaintyVertexSet verts = UncertaintyVertexSet::enumerate(2, 1, 0.02,
                                                               0.05);
  Polytope X = Polytope::inf_ball(2, 10.0);
  Polytope U = Polytope::inf_ball(1, 2.0);
  Polytope pre = robust_pre(Polytope::empty_set(2), X, U, model, verts);
  CHECK(pre.is_empty());
}

TEST_CASE("robust_pre against a dense gridding oracle") {
  // no uncertainty: pre = {x in X : exists u, Ax + Bu in target}
  LtvModel model = paper_model(1, 0.0, 0.0, 0.0);
  UncertaintyVertexSet verts = UncertaintyVertexSet::enumerate(2, 1, 0, 0);
  Polytope X = Polytope::inf_ball(2, 2.0);
  Polytope U = Polytope::inf_ball(1, 1.0);
  Polytope target = Polytope::inf_ball(2, 2.0);
  Polytope pre = robust_pre(target, X, U, model, verts);
  REQUIRE(!pre.is_empty());
  pre.ensure_hrep();
  const MatrixXd& A = model.A[0];
  const MatrixXd& B = model.B[0];
  int disagreements = 0;
  for (double x1 = -2.0; x1 <= 2.0 + 1e-9; x1 += 0.05) {
    for (double x2 = -2.0; x2 <= 2.0 + 1e-9; x2 += 0.05) {
      VectorXd x(2);
      x << x1, x2;
      bool oracle = false;
      for (double u = -1.0; u <= 1.0 + 1e-9; u += 0.05) {
        VectorXd next = A * x + B * VectorXd::Constant(1, u);
        if (next.cwiseAbs().maxCoeff() <= 2.0 + 1e-9) {
          oracle = true;
          break;
        }
      }
      const bool inside = pre.contains(x, 1e-6);
      // grid resolution tolerance: skip points within one grid cell of the
      // boundary of the computed set
      bool near_boundary = false;
      for (int r = 0; r < pre.F().rows(); ++r) {
        if (std::abs(pre.F().row(r).dot(x) - pre.b()(r)) < 0.08) {
          near_boundary = true;
        }
      }
      if (!near_boundary && oracle != inside) ++disagreements;
    }
  }
  CHECK(disagreements == 0);
}

TEST_CASE("robust_pre certificate: every member admits a robust input") {
  LtvModel model = paper_model(1);
  UncertaintyVertexSet verts =
      UncertaintyVertexSet::enumerate(2, 1, model.eps_A, model.eps_B);
  Polytope X = Polytope::inf_ball(2, 10.0);
  Polytope U = Polytope::inf_ball(1, 2.0);
  Polytope target = Polytope::inf_ball(2, 3.0);
  Polytope pre = robust_pre(target, X, U, model, verts);
  REQUIRE(!pre.is_empty());
  pre.ensure_vrep();
  pre.ensure_hrep();
  Rng rng(55);
  Polytope W = Polytope::inf_ball(2, model.sigma_w);
  for (int trial = 0; trial < 60; ++trial) {
    // random point in the set: convex combination of vertices
    VectorXd x = VectorXd::Zero(2);
    double total = 0.0;
    for (const auto& v : pre.vertices()) {
      const double w = rng.uniform();
      x += w * v;
      total += w;
    }
    x /= total;
    REQUIRE(pre.contains(x, 1e-7));
    // LP over u: all uncertain successors inside the target
    ProgramBuilder pb;
    pb.add_var();
    for (const auto& [dA, dB] : verts.vertices) {
      for (const auto& w : W.vertices()) {
        const VectorXd base = (model.A[0] + dA) * x + w;
        const VectorXd bu = (model.B[0] + dB).col(0);
        Polytope tgt = target;
        tgt.ensure_hrep();
        for (int r = 0; r < tgt.F().rows(); ++r) {
          pb.add_ineq({{0, tgt.F().row(r).dot(bu)}},
                      tgt.b()(r) - tgt.F().row(r).dot(base));
        }
      }
    }
    pb.add_ineq({{0, 1.0}}, 2.0);
    pb.add_ineq({{0, -1.0}}, 2.0);
    CHECK(check_feasible(pb.build()) == FeasOutcome::Feasible);
  }
}

TEST_CASE("robust_pre monotonicity on nested boxes") {
  LtvModel model = paper_model(1);
  UncertaintyVertexSet verts =
      UncertaintyVertexSet::enumerate(2, 1, model.eps_A, model.eps_B);
  Polytope X = Polytope::inf_ball(2, 10.0);
  Polytope U = Polytope::inf_ball(1, 2.0);
  Polytope small = Polytope::inf_ball(2, 2.0);
  Polytope large = Polytope::inf_ball(2, 4.0);
  Polytope pre_small = robust_pre(small, X, U, model, verts);
  Polytope pre_large = robust_pre(large, X, U, model, verts);
  REQUIRE(!pre_small.is_empty());
  REQUIRE(!pre_large.is_empty());
  CHECK(pre_large.contains_set(pre_small, 1e-7));
}

TEST_CASE("maximal robust invariant set for the experiment system") {
  LtvModel model = paper_model(1);
  Polytope X = Polytope::inf_ball(2, 10.0);
  Polytope U = Polytope::inf_ball(1, 2.0);
  InvariantSetResult res = max_robust_invariant_set(X, U, model);
  REQUIRE(!res.set.is_empty());
  Polytope XT = res.set;
  XT.ensure_hrep();
  XT.ensure_vrep();
  // inside the state box, and a proper subset of it: the velocity
  // direction is strictly tighter even though the set touches x1 = +-10
  CHECK(X.contains_set(XT, 1e-9));
  double max_velocity = 0.0;
  for (const auto& v : XT.vertices()) {
    max_velocity = std::max(max_velocity, std::abs(v(1)));
  }
  CHECK(max_velocity < 10.0 - 1e-6);
  VectorXd up(2);
  up << 0, 1;
  CHECK(XT.support(up) < X.support(up) - 0.5);
  // contains the experiment's initial condition
  VectorXd x0(2);
  x0 << -7.0, -2.0;
  CHECK(XT.contains(x0));
  // fixed point: robust_pre(XT) intersect X contains XT (within tolerance)
  UncertaintyVertexSet verts =
      UncertaintyVertexSet::enumerate(2, 1, model.eps_A, model.eps_B);
  Polytope pre = robust_pre(XT, X, U, model, verts);
  Polytope pre_in_X = intersect(pre, X);
  Polytope grown = minkowski_sum(XT, Polytope::inf_ball(2, 1e-6));
  CHECK(grown.contains_set(pre_in_X, 1e-5));
  CHECK(pre_in_X.support_gap(XT) < 1e-5);
}

TEST_CASE("huge uncertainty collapses the invariant set") {
  LtvModel model = paper_model(1, 1.0, 0.05, 0.1);
  Polytope X = Polytope::inf_ball(2, 10.0);
  Polytope U = Polytope::inf_ball(1, 2.0);
  InvariantSetResult res = max_robust_invariant_set(X, U, model);
  if (!res.set.is_empty()) {
    Polytope S = res.set;
    S.ensure_vrep();
    double max_coord = 0.0;
    for (const auto& v : S.vertices()) {
      max_coord = std::max(max_coord, v.cwiseAbs().maxCoeff());
    }
    CHECK(max_coord < 2.0);
  }
}

TEST_CASE("invariance certificate at random interior points") {
  LtvModel model = paper_model(1);
  Polytope X = Polytope::inf_ball(2, 10.0);
  Polytope U = Polytope::inf_ball(1, 2.0);
  InvariantSetResult res = max_robust_invariant_set(X, U, model);
  Polytope XT = res.set;
  XT.ensure_vrep();
  XT.ensure_hrep();
  UncertaintyVertexSet verts =
      UncertaintyVertexSet::enumerate(2, 1, model.eps_A, model.eps_B);
  Polytope W = Polytope::inf_ball(2, model.sigma_w);
  Rng rng(77);
  int failures = 0;
  for (int trial = 0; trial < 500; ++trial) {
    VectorXd x = VectorXd::Zero(2);
    double total = 0.0;
    for (const auto& v : XT.vertices()) {
      const double w = rng.uniform();
      x += w * v;
      total += w;
    }
    x /= total;
    ProgramBuilder pb;
    pb.add_var();
    for (const auto& [dA, dB] : verts.vertices) {
      for (const auto& wv : W.vertices()) {
        const VectorXd base = (model.A[0] + dA) * x + wv;
        const VectorXd bu = (model.B[0] + dB).col(0);
        for (int r = 0; r < XT.F().rows(); ++r) {
          pb.add_ineq({{0, XT.F().row(r).dot(bu)}},
                      XT.b()(r) - XT.F().row(r).dot(base) + 1e-7);
        }
      }
    }
    pb.add_ineq({{0, 1.0}}, 2.0);
    pb.add_ineq({{0, -1.0}}, 2.0);
    if (check_feasible(pb.build()) != FeasOutcome::Feasible) ++failures;
  }
  CHECK(failures == 0);
}

TEST_CASE("disturbance invariant set of a deadbeat loop is the origin") {
  MatrixXd A(2, 2), B(2, 2);
  A << 1, 1, 0, 1;
  B = MatrixXd::Identity(2, 2);
  LtvModel model = LtvModel::lti(A, B, 1, 0, 0, 0.1);
  const MatrixXd K = -A;  // A + BK = 0
  DisturbanceInvariantResult z = disturbance_invariant_set(model, K, 1e-6);
  CHECK(z.terms == 1);
  Polytope set = z.set;
  set.ensure_vrep();
  REQUIRE(set.num_vertices() == 1);
  CHECK(set.vertices()[0].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("disturbance invariant set is invariant for the LQR loop") {
  LtvModel model = paper_model(1);
  const MatrixXd K = dare_gain(model.A[0], model.B[0],
                               MatrixXd::Identity(2, 2),
                               0.1 * MatrixXd::Identity(1, 1));
  DisturbanceInvariantResult z = disturbance_invariant_set(model, K, 1e-6);
  const MatrixXd S = model.A[0] + model.B[0] * K;
  Polytope W = Polytope::inf_ball(2, model.sigma_w);
  Polytope mapped = minkowski_sum(affine_map(S, z.set), affine_map(S, W));
  // S (Z + W) lies inside Z up to the truncation tolerance
  Polytope grown = minkowski_sum(z.set, Polytope::inf_ball(2, 1e-5));
  CHECK(grown.contains_set(mapped, 1e-7));
}

TEST_CASE("unstable closed loop is rejected") {
  LtvModel model = paper_model(1);
  const MatrixXd K = MatrixXd::Zero(1, 2);  // double integrator is unstable
  CHECK_THROWS_AS(disturbance_invariant_set(model, K, 1e-4),
                  std::runtime_error);
}

TEST_CASE("truncation tolerance convergence") {
  LtvModel model = paper_model(1);
  const MatrixXd K = dare_gain(model.A[0], model.B[0],
                               MatrixXd::Identity(2, 2),
                               0.1 * MatrixXd::Identity(1, 1));
  DisturbanceInvariantResult coarse =
      disturbance_invariant_set(model, K, 1e-4);
  DisturbanceInvariantResult fine = disturbance_invariant_set(model, K, 1e-6);
  CHECK(coarse.set.support_gap(fine.set) <= 1e-3);
}

TEST_CASE("json round trip") {
  Polytope P = Polytope::inf_ball(2, 2.5);
  P.ensure_vrep();
  const std::string text = P.to_json();
  Polytope Q = Polytope::from_json(text);
  CHECK(P.support_gap(Q) < 1e-12);
}

TEST_CASE("duality check flags vertex-facet consistency") {
  Polytope P = Polytope::inf_ball(2, 1.0);
  P.ensure_vrep();
  P.check_duality();
}
