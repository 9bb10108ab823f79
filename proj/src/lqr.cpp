#include "slsmpc/lqr.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

namespace slsmpc {

FiniteLqr finite_horizon_lqr(const LtvModel& model, const CostWeights& w) {
  const int T = model.horizon;
  FiniteLqr out;
  out.K.resize(T);
  out.P.resize(T + 1);
  out.P[T] = w.QT;
  for (int t = T - 1; t >= 0; --t) {
    const MatrixXd& A = model.A[t];
    const MatrixXd& B = model.B[t];
    const MatrixXd G = w.R[t] + B.transpose() * out.P[t + 1] * B;
    const MatrixXd Kt = -G.ldlt().solve(B.transpose() * out.P[t + 1] * A);
    out.K[t] = Kt;
    out.P[t] = w.Q[t] + A.transpose() * out.P[t + 1] * A +
               A.transpose() * out.P[t + 1] * B * Kt;
  }
  return out;
}

MatrixXd dare_gain(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                   const MatrixXd& R) {
  MatrixXd P = Q;
  for (int iter = 0; iter < 100000; ++iter) {
    const MatrixXd G = R + B.transpose() * P * B;
    const MatrixXd Pn = Q + A.transpose() * P * A -
                        A.transpose() * P * B *
                            G.ldlt().solve(B.transpose() * P * A);
    const double diff = (Pn - P).cwiseAbs().maxCoeff();
    P = Pn;
    if (diff < 1e-13 * (1.0 + P.cwiseAbs().maxCoeff())) {
      const MatrixXd K =
          -(R + B.transpose() * P * B).ldlt().solve(B.transpose() * P * A);
      if (spectral_radius(A + B * K) >= 1.0) {
        throw std::runtime_error("dare_gain: closed loop not strictly stable");
      }
      return K;
    }
  }
  throw std::runtime_error("dare_gain: Riccati iteration did not converge "
                           "(unstabilizable pair?)");
}

double spectral_radius(const MatrixXd& M) {
  return M.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace slsmpc
