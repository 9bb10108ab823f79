#ifndef SLSMPC_POLYTOPE_HPP
#define SLSMPC_POLYTOPE_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "slsmpc/model.hpp"

namespace slsmpc {

/// Bounded convex polytope with an H-representation {x : Fx <= b} and/or a
/// V-representation (vertex list). Dimensions up to 3 are supported for
/// exact conversions. Values are immutable once both representations are
/// in place; ensure_* calls populate the missing one.
class Polytope {
public:
  Polytope() = default;

  static Polytope from_hrep(MatrixXd F, VectorXd b);
  static Polytope from_vrep(std::vector<VectorXd> vertices);
  static Polytope inf_ball(int dim, double radius);
  static Polytope singleton(const VectorXd& point);
  static Polytope empty_set(int dim);

  int dim() const { return dim_; }
  bool is_empty() const { return empty_; }
  bool has_hrep() const { return F_.rows() > 0 || (!empty_ && hrep_set_); }
  bool has_vrep() const { return vrep_set_; }

  const MatrixXd& F() const;
  const VectorXd& b() const;
  const std::vector<VectorXd>& vertices() const;
  int num_facets() const { return static_cast<int>(F_.rows()); }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }

  /// Computes the missing representation (exact, dim <= 3 for H -> V).
  void ensure_vrep();
  void ensure_hrep();

  /// max over the set of dir'x; prefers the vertex list.
  double support(const VectorXd& dir) const;
  bool contains(const VectorXd& x, double tol = 1e-9) const;
  /// other subset-of this, via support evaluation at this' facets.
  bool contains_set(const Polytope& other, double tol = 1e-9) const;
  /// Two-sided support-function gap over both facet normal sets; the
  /// set-equality metric used by fixed-point tests.
  double support_gap(const Polytope& other) const;

  /// Consistency of the two representations (vertices feasible, every
  /// facet supported); throws on violation.
  void check_duality(double tol = 1e-8) const;

  std::string to_json() const;
  static Polytope from_json(const std::string& text);

private:
  int dim_ = 0;
  bool empty_ = false;
  bool hrep_set_ = false;
  bool vrep_set_ = false;
  MatrixXd F_;
  VectorXd b_;
  std::vector<VectorXd> vertices_;
};

/// Minimal vertex set of a bounded H-rep polytope (dim <= 3). Throws on
/// unbounded input; empty input yields an empty polytope.
std::vector<VectorXd> vertex_enumeration(const MatrixXd& F, const VectorXd& b);

Polytope minkowski_sum(const Polytope& P, const Polytope& Q);
/// {x : x + Q subset-of P}; may be empty.
Polytope pontryagin_difference(const Polytope& P, const Polytope& Q);
Polytope intersect(const Polytope& P, const Polytope& Q);
/// Image {Mx : x in P} through the vertex representation.
Polytope affine_map(const MatrixXd& M, const Polytope& P);

/// Irredundant H-representation (drops duplicates and non-supporting rows).
Polytope minimal_hrep(const MatrixXd& F, const VectorXd& b);

/// Fourier-Motzkin elimination of the trailing n_drop coordinates of
/// {z : Fz <= b}, with direction deduplication between stages.
std::pair<MatrixXd, VectorXd> fourier_motzkin(const MatrixXd& F,
                                              const VectorXd& b, int n_drop);

/// Extreme points of the memoryless inf-to-inf norm balls: every row of
/// Delta_A carries a single entry of magnitude eps_A (likewise Delta_B),
/// enumerated jointly. Degenerate radius zero collapses to {0}.
struct UncertaintyVertexSet {
  std::vector<std::pair<MatrixXd, MatrixXd>> vertices;  // (Delta_A, Delta_B)
  static UncertaintyVertexSet enumerate(int n, int m, double eps_A,
                                        double eps_B);
};

/// One-step robust controllable-to set
///   {x in X : exists u in U, forall uncertainty vertices and disturbance
///    vertices, (A+dA)x + (B+dB)u + w in target}
/// for the memoryless uncertainty class, by stacking vertex constraints
/// over (x, u) and projecting out u.
Polytope robust_pre(const Polytope& target, const Polytope& X,
                    const Polytope& U, const LtvModel& model,
                    const UncertaintyVertexSet& vertices);

struct InvariantSetResult {
  Polytope set;
  int iterations = 0;
  std::vector<double> gaps;  // support gap per iteration
};

/// Fixed point of X_{k+1} = robust_pre(X_k) from X_0 = X; the DP ground
/// truth for the terminal set. Throws after iteration_cap without
/// convergence (support gap 1e-6).
InvariantSetResult max_robust_invariant_set(const Polytope& X,
                                            const Polytope& U,
                                            const LtvModel& model,
                                            int iteration_cap = 200);

struct DisturbanceInvariantResult {
  Polytope set;
  int terms = 0;  // truncation index N
};

/// Truncated sum_{i=1..N} (A+BK)^i W with N chosen so the tail bound
/// ||(A+BK)^N|| * sigma_w falls below truncation_tol. Requires a strictly
/// stable closed loop. include_zero_term adds the i = 0 term W.
DisturbanceInvariantResult disturbance_invariant_set(
    const LtvModel& model, const MatrixXd& K, double truncation_tol,
    bool include_zero_term = false);

}  // namespace slsmpc

#endif  // SLSMPC_POLYTOPE_HPP
