#ifndef SLSMPC_TUBE_HPP
#define SLSMPC_TUBE_HPP

#include <string>
#include <vector>

#include "slsmpc/conic.hpp"
#include "slsmpc/model.hpp"
#include "slsmpc/polytope.hpp"

namespace slsmpc {

/// Fixed tube cross-section shape: a polytope with the origin in its
/// interior, carried in both representations. V and H are the complexity
/// multipliers reported alongside the program.
struct TubeShape {
  Polytope Z;
  std::string label = "custom";
  int num_vertices() const { return Z.num_vertices(); }
  int num_facets() const { return Z.num_facets(); }
  void validate() const;
};

TubeShape make_unit_shape(int n);

/// Disturbance-invariant cross-section from the stationary LQR closed loop.
TubeShape make_zinv_shape(const LtvModel& model, const MatrixXd& Q,
                          const MatrixXd& R, double truncation_tol);

/// Homothetic-tube program: centers and scalings per step, one shared first
/// input, and per-vertex inputs at the intermediate steps. Robust one-step
/// containment is enforced at every (tube vertex, uncertainty vertex,
/// disturbance vertex) combination.
struct TubeProgram {
  ConicProgram program;
  int T = 0, n = 0, m = 0, V = 0, H = 0;
  long long variable_count = 0;       // T(1+n) + m + (T-1)mV
  long long raw_constraint_count = 0; // rows as constructed
  double cost_offset = 0.0;           // constant x0 stage-cost term

  std::vector<VectorXd> shape_vertices;
  int zc_index(int t, int c) const;     // t = 1..T
  int alpha_index(int t) const;         // t = 1..T
  int u0_index(int c) const;
  int uv_index(int t, int v, int c) const;  // t = 1..T-1
};

TubeProgram build_tube_program(const LtvModel& model,
                               const ConstraintSet& constraints,
                               const CostWeights& weights, const VectorXd& x0,
                               const TubeShape& shape);

struct TubeSolution {
  bool feasible = false;
  SolveStatus status = SolveStatus::NumericalFailure;
  VectorXd u0;
  std::vector<VectorXd> centers;                 // t = 1..T
  std::vector<double> alphas;                    // t = 1..T
  std::vector<std::vector<VectorXd>> vertex_inputs;  // [t-1][v], t = 1..T-1
  double objective = 0.0;
  double wall_time_s = 0.0;
};

TubeSolution solve_tube(const TubeProgram& program,
                        const SolverOptions& opts = {});

/// Nonnegative least-squares convex-combination weights of x over the given
/// vertices, tie-broken toward the minimum-norm weights.
VectorXd barycentric_weights(const std::vector<VectorXd>& vertices,
                             const VectorXd& x);

/// Vertex-interpolated rollout control: the input applied at a state is the
/// convex combination of the per-vertex inputs with the state's barycentric
/// weights in its cross-section.
class TubeController {
public:
  TubeController(const TubeProgram& program, const TubeSolution& solution);
  VectorXd input_at(int t, const VectorXd& x) const;  // t = 0..T-1
  /// Vertices of cross-section t (t = 1..T).
  std::vector<VectorXd> section_vertices(int t) const;

private:
  const TubeProgram& program_;
  const TubeSolution& solution_;
};

}  // namespace slsmpc

#endif  // SLSMPC_TUBE_HPP
