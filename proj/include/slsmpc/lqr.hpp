#ifndef SLSMPC_LQR_HPP
#define SLSMPC_LQR_HPP

#include <Eigen/Dense>
#include <vector>

#include "slsmpc/model.hpp"

namespace slsmpc {

struct FiniteLqr {
  std::vector<MatrixXd> K;  // u_t = K_t x_t, t = 0..T-1
  std::vector<MatrixXd> P;  // cost-to-go matrices, t = 0..T
  double cost_from(const VectorXd& x0) const { return x0.dot(P[0] * x0); }
};

/// Backward Riccati recursion for the nominal finite-horizon problem.
FiniteLqr finite_horizon_lqr(const LtvModel& model, const CostWeights& w);

/// Stationary LQR gain from the discrete algebraic Riccati equation,
/// solved by iterating the recursion to a fixed point. Throws if the
/// iteration fails to converge or the closed loop is not strictly stable.
MatrixXd dare_gain(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                   const MatrixXd& R);

double spectral_radius(const MatrixXd& M);

}  // namespace slsmpc

#endif  // SLSMPC_LQR_HPP
