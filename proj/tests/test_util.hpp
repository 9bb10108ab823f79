#ifndef SLSMPC_TEST_UTIL_HPP
#define SLSMPC_TEST_UTIL_HPP

#include "slsmpc/model.hpp"
#include "slsmpc/sampling.hpp"
#include "slsmpc/synthesis.hpp"

namespace slsmpc::test {

inline MatrixXd random_matrix(int rows, int cols, Rng& rng, double scale = 1.0) {
  MatrixXd M(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) M(r, c) = rng.uniform(-scale, scale);
  }
  return M;
}

inline BltOperator random_blt(int T, int p, int q, Rng& rng,
                              bool strictly_causal = false,
                              double scale = 1.0) {
  BltOperator op(T, p, q, strictly_causal);
  for (int i = 0; i <= T; ++i) {
    for (int k = strictly_causal ? 1 : 0; k <= i; ++k) {
      op.set_block(i, k, random_matrix(p, q, rng, scale));
    }
  }
  return op;
}

// random stable-ish LTV model with bounded uncertainty parameters
inline LtvModel random_model(int T, int n, int m, Rng& rng,
                             double eps_A = 0.0, double eps_B = 0.0,
                             double sigma_w = 0.0) {
  LtvModel model;
  model.horizon = T;
  for (int t = 0; t < T; ++t) {
    model.A.push_back(random_matrix(n, n, rng, 0.8));
    model.B.push_back(random_matrix(n, m, rng, 1.0));
  }
  model.eps_A = eps_A;
  model.eps_B = eps_B;
  model.sigma_w = sigma_w;
  model.validate();
  return model;
}

// random response satisfying the achievability constraint exactly
inline SystemResponse random_feasible_response(const LtvModel& model,
                                               Rng& rng) {
  BltOperator phi_u =
      random_blt(model.horizon, model.input_dim(), model.state_dim(), rng,
                 false, 0.7);
  return complete_response(model, phi_u);
}

// the double-integrator setup used across the experiment suite
inline LtvModel paper_model(int T, double eps_A = 0.02, double eps_B = 0.05,
                            double sigma_w = 0.1) {
  MatrixXd A(2, 2), B(2, 1);
  A << 1, 1, 0, 1;
  B << 0.5, 1;
  return LtvModel::lti(A, B, T, eps_A, eps_B, sigma_w);
}

inline CostWeights paper_weights(int T) {
  return CostWeights::constant(MatrixXd::Identity(2, 2),
                               0.1 * MatrixXd::Identity(1, 1),
                               MatrixXd::Identity(2, 2), T);
}

inline ConstraintSet paper_constraints_box(const MatrixXd& FT,
                                           const VectorXd& bT) {
  ConstraintSet cs;
  cs.Fx = MatrixXd(4, 2);
  cs.Fx << 1, 0, -1, 0, 0, 1, 0, -1;
  cs.bx = VectorXd::Constant(4, 10.0);
  cs.Fu = MatrixXd(2, 1);
  cs.Fu << 1, -1;
  cs.bu = VectorXd::Constant(2, 2.0);
  cs.FT = FT;
  cs.bT = bT;
  return cs;
}

}  // namespace slsmpc::test

#endif
