#include "slsmpc/model.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

namespace slsmpc {

bool LtvModel::is_lti() const {
  for (size_t t = 1; t < A.size(); ++t) {
    if (A[t] != A[0] || B[t] != B[0]) return false;
  }
  return true;
}

void LtvModel::validate() const {
  if (horizon < 1) throw std::invalid_argument("LtvModel: horizon must be >= 1");
  if (static_cast<int>(A.size()) != horizon ||
      static_cast<int>(B.size()) != horizon) {
    throw std::invalid_argument("LtvModel: need T matrices A_t and B_t");
  }
  const int n = state_dim();
  const int m = input_dim();
  for (int t = 0; t < horizon; ++t) {
    if (A[t].rows() != n || A[t].cols() != n) {
      throw std::invalid_argument("LtvModel: A_t dimension mismatch at t=" +
                                  std::to_string(t));
    }
    if (B[t].rows() != n || B[t].cols() != m) {
      throw std::invalid_argument("LtvModel: B_t dimension mismatch at t=" +
                                  std::to_string(t));
    }
  }
  if (eps_A < 0 || eps_B < 0 || sigma_w < 0) {
    throw std::invalid_argument("LtvModel: bounds must be nonnegative");
  }
}

BltOperator LtvModel::stacked_A() const {
  std::vector<MatrixXd> diag(A.begin(), A.end());
  diag.push_back(MatrixXd::Zero(state_dim(), state_dim()));
  return BltOperator::block_diagonal(diag);
}

BltOperator LtvModel::stacked_B() const {
  std::vector<MatrixXd> diag(B.begin(), B.end());
  diag.push_back(MatrixXd::Zero(state_dim(), input_dim()));
  return BltOperator::block_diagonal(diag);
}

LtvModel LtvModel::lti(const MatrixXd& A, const MatrixXd& B, int horizon,
                       double eps_A, double eps_B, double sigma_w) {
  LtvModel model;
  model.horizon = horizon;
  model.A.assign(horizon, A);
  model.B.assign(horizon, B);
  model.eps_A = eps_A;
  model.eps_B = eps_B;
  model.sigma_w = sigma_w;
  model.validate();
  return model;
}

namespace {

void check_psd(const MatrixXd& M, const char* name, double floor) {
  if (M.rows() != M.cols()) {
    throw std::invalid_argument(std::string(name) + " must be square");
  }
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument(std::string(name) + " must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(M);
  if (es.eigenvalues().minCoeff() < floor) {
    throw std::invalid_argument(std::string(name) +
                                " violates the eigenvalue floor");
  }
}

}  // namespace

void CostWeights::validate(int horizon, int n, int m) const {
  if (static_cast<int>(Q.size()) != horizon ||
      static_cast<int>(R.size()) != horizon) {
    throw std::invalid_argument("CostWeights: need T stage weights");
  }
  for (int t = 0; t < horizon; ++t) {
    if (Q[t].rows() != n) throw std::invalid_argument("CostWeights: Q_t size");
    if (R[t].rows() != m) throw std::invalid_argument("CostWeights: R_t size");
    check_psd(Q[t], "Q_t", -1e-10);
    check_psd(R[t], "R_t", 1e-12);  // strictly positive definite
  }
  if (QT.rows() != n) throw std::invalid_argument("CostWeights: Q_T size");
  check_psd(QT, "Q_T", -1e-10);
}

CostWeights CostWeights::constant(const MatrixXd& Q, const MatrixXd& R,
                                  const MatrixXd& QT, int horizon) {
  CostWeights w;
  w.Q.assign(horizon, Q);
  w.R.assign(horizon, R);
  w.QT = QT;
  return w;
}

void ConstraintSet::validate(int n, int m) const {
  auto check = [](const MatrixXd& F, const VectorXd& b, int dim,
                  const char* name) {
    if (F.cols() != dim || F.rows() != b.size()) {
      throw std::invalid_argument(std::string("ConstraintSet: ") + name +
                                  " dimension mismatch");
    }
  };
  check(Fx, bx, n, "X");
  check(Fu, bu, m, "U");
  check(FT, bT, n, "X_T");
}

StackedConstraints ConstraintSet::stack(int horizon) const {
  const int n = static_cast<int>(Fx.cols());
  const int m = static_cast<int>(Fu.cols());
  const int rx = static_cast<int>(Fx.rows());
  const int rT = static_cast<int>(FT.rows());
  const int ru = static_cast<int>(Fu.rows());
  const int rows = horizon * rx + rT + horizon * ru;
  const int x_cols = (horizon + 1) * n;

  StackedConstraints s;
  s.n = n;
  s.m = m;
  s.horizon = horizon;
  s.F.resize(rows, (horizon + 1) * (n + m));
  s.b.resize(rows);
  s.kind.resize(rows);
  s.time.resize(rows);

  std::vector<Eigen::Triplet<double>> trip;
  int row = 0;
  for (int t = 0; t < horizon; ++t) {
    for (int j = 0; j < rx; ++j, ++row) {
      for (int c = 0; c < n; ++c) {
        if (Fx(j, c) != 0.0) trip.emplace_back(row, t * n + c, Fx(j, c));
      }
      s.b(row) = bx(j);
      s.kind[row] = ConstraintKind::State;
      s.time[row] = t;
    }
  }
  for (int j = 0; j < rT; ++j, ++row) {
    for (int c = 0; c < n; ++c) {
      if (FT(j, c) != 0.0) trip.emplace_back(row, horizon * n + c, FT(j, c));
    }
    s.b(row) = bT(j);
    s.kind[row] = ConstraintKind::Terminal;
    s.time[row] = horizon;
  }
  for (int t = 0; t < horizon; ++t) {
    for (int j = 0; j < ru; ++j, ++row) {
      for (int c = 0; c < m; ++c) {
        if (Fu(j, c) != 0.0) {
          trip.emplace_back(row, x_cols + t * m + c, Fu(j, c));
        }
      }
      s.b(row) = bu(j);
      s.kind[row] = ConstraintKind::Input;
      s.time[row] = t;
    }
  }
  s.F.setFromTriplets(trip.begin(), trip.end());
  return s;
}

}  // namespace slsmpc
