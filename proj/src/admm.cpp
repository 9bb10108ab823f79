#include <Eigen/SparseCholesky>
#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include "slsmpc/conic.hpp"

namespace slsmpc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// Operator-splitting QP solver in the l <= Mx <= u form with an
// equality-constrained polish pass on the detected active set.
SolveResult AdmmSolver::solve(const ConicProgram& prog,
                              const SolverOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveResult res;
  const int nv = prog.num_vars;
  const int me = prog.num_eq();
  const int mi = prog.num_ineq();
  const int mr = me + mi;

  std::vector<Eigen::Triplet<double>> mt;
  for (int k = 0; k < prog.C.outerSize(); ++k) {
    for (SparseMat::InnerIterator e(prog.C, k); e; ++e) {
      mt.emplace_back(static_cast<int>(e.row()), static_cast<int>(e.col()),
                      e.value());
    }
  }
  for (int k = 0; k < prog.A.outerSize(); ++k) {
    for (SparseMat::InnerIterator e(prog.A, k); e; ++e) {
      mt.emplace_back(me + static_cast<int>(e.row()),
                      static_cast<int>(e.col()), e.value());
    }
  }
  SparseMat M(mr, nv);
  M.setFromTriplets(mt.begin(), mt.end());
  const SparseMat MT = SparseMat(M.transpose());
  VectorXd lo(mr), hi(mr);
  lo.head(me) = prog.d;
  hi.head(me) = prog.d;
  lo.tail(mi).setConstant(-kInf);
  hi.tail(mi) = prog.b;

  VectorXd x = VectorXd::Zero(nv);
  VectorXd z = VectorXd::Zero(mr);
  VectorXd y = VectorXd::Zero(mr);

  double rho_cur = rho;
  auto factor = [&](double r) {
    SparseMat H = prog.P;
    H += SparseMat(r * MT * M);
    for (int i = 0; i < nv; ++i) H.coeffRef(i, i) += sigma;
    return H;
  };
  Eigen::SimplicialLDLT<SparseMat> ldlt;
  ldlt.compute(factor(rho_cur));
  if (ldlt.info() != Eigen::Success) {
    res.status = SolveStatus::NumericalFailure;
    return res;
  }

  const bool has_P = prog.P.nonZeros() > 0;
  int iter = 0;
  bool converged = false;
  for (; iter < max_admm_iter; ++iter) {
    VectorXd rhs = sigma * x - prog.q + MT * (rho_cur * z - y);
    VectorXd xt = ldlt.solve(rhs);
    VectorXd mxt = M * xt;
    VectorXd x_new = alpha * xt + (1 - alpha) * x;
    VectorXd z_hat = alpha * mxt + (1 - alpha) * z;
    VectorXd z_new = (z_hat + y / rho_cur).cwiseMax(lo).cwiseMin(hi);
    y += rho_cur * (z_hat - z_new);
    x = x_new;
    z = z_new;

    if (iter % 25 == 0) {
      VectorXd mx = M * x;
      VectorXd rp = mx - z;
      VectorXd rd = (has_P ? VectorXd(prog.P * x) : VectorXd::Zero(nv)) +
                    prog.q + MT * y;
      const double rp_n = mr ? rp.cwiseAbs().maxCoeff() : 0.0;
      const double rd_n = rd.cwiseAbs().maxCoeff();
      const double sp = std::max({1.0, mx.cwiseAbs().maxCoeff(),
                                  z.cwiseAbs().maxCoeff()});
      const double sd =
          std::max(1.0, prog.q.cwiseAbs().maxCoeff() +
                            (has_P ? (prog.P * x).cwiseAbs().maxCoeff() : 0.0));
      if (rp_n <= eps_abs + eps_rel * sp && rd_n <= eps_abs + eps_rel * sd) {
        converged = true;
        break;
      }
      if (iter > 0 && iter % 200 == 0 && rd_n > 0 && rp_n > 0) {
        double ratio = std::sqrt((rp_n / sp) / (rd_n / sd));
        if (ratio > 5.0 || ratio < 0.2) {
          rho_cur = std::clamp(rho_cur * ratio, 1e-6, 1e6);
          ldlt.compute(factor(rho_cur));
          if (ldlt.info() != Eigen::Success) {
            res.status = SolveStatus::NumericalFailure;
            return res;
          }
        }
      }
    }
  }

  // Polish: re-solve on the active rows as equalities.
  {
    std::vector<int> active;
    for (int i = 0; i < me; ++i) active.push_back(i);
    for (int i = 0; i < mi; ++i) {
      if (hi(me + i) - z(me + i) < 1e-7 * (1 + std::abs(hi(me + i))) ||
          y(me + i) > 1e-8) {
        active.push_back(me + i);
      }
    }
    const int na = static_cast<int>(active.size());
    std::vector<Eigen::Triplet<double>> kt;
    for (int k = 0; k < prog.P.outerSize(); ++k) {
      for (SparseMat::InnerIterator e(prog.P, k); e; ++e) {
        kt.emplace_back(static_cast<int>(e.row()), static_cast<int>(e.col()),
                        e.value());
      }
    }
    for (int i = 0; i < nv; ++i) kt.emplace_back(i, i, 1e-9);
    for (int a = 0; a < na; ++a) {
      const int r = active[a];
      for (SparseMat::InnerIterator e(MT, r); e; ++e) {
        kt.emplace_back(nv + a, static_cast<int>(e.row()), e.value());
        kt.emplace_back(static_cast<int>(e.row()), nv + a, e.value());
      }
      kt.emplace_back(nv + a, nv + a, -1e-9);
    }
    SparseMat K(nv + na, nv + na);
    K.setFromTriplets(kt.begin(), kt.end());
    Eigen::SimplicialLDLT<SparseMat> pol(K);
    if (pol.info() == Eigen::Success) {
      VectorXd rhs(nv + na);
      rhs.head(nv) = -prog.q;
      for (int a = 0; a < na; ++a) rhs(nv + a) = hi(active[a]);
      VectorXd sol = pol.solve(rhs);
      for (int refine = 0; refine < 2; ++refine) {
        VectorXd prod = K * sol;
        prod.head(nv) -= 1e-9 * sol.head(nv);
        prod.tail(na) += 1e-9 * sol.tail(na);
        sol += pol.solve(rhs - prod);
      }
      VectorXd xp = sol.head(nv);
      VectorXd mxp = M * xp;
      bool ok = true;
      for (int i = 0; i < me && ok; ++i) {
        if (std::abs(mxp(i) - prog.d(i)) > 1e-7 * (1 + std::abs(prog.d(i)))) {
          ok = false;
        }
      }
      for (int i = 0; i < mi && ok; ++i) {
        if (mxp(me + i) > prog.b(i) + 1e-7 * (1 + std::abs(prog.b(i)))) {
          ok = false;
        }
      }
      for (int a = 0; a < na && ok; ++a) {
        if (active[a] >= me && sol(nv + a) < -1e-7) ok = false;
      }
      if (ok) {
        x = xp;
        converged = true;
      }
    }
  }

  VectorXd mx = M * x;
  double rp = 0.0;
  for (int i = 0; i < me; ++i) rp = std::max(rp, std::abs(mx(i) - prog.d(i)));
  for (int i = 0; i < mi; ++i) rp = std::max(rp, mx(me + i) - prog.b(i));
  res.x = x;
  res.objective = 0.5 * x.dot(prog.P * x) + prog.q.dot(x);
  res.iterations = iter;
  res.primal_residual = std::max(0.0, rp);
  res.dual_residual = 0.0;
  res.status = (converged && rp < 1e-6) ? SolveStatus::Optimal
                                        : SolveStatus::IterationLimit;
  res.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return res;
}

}  // namespace slsmpc
