#include <Eigen/SparseCholesky>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "slsmpc/conic.hpp"

namespace slsmpc {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_s(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Presolved {
  ConicProgram prog;              // normalized, deduplicated
  std::vector<int> ineq_origin;   // kept row -> original row
  std::vector<double> ineq_scale; // divisor applied to the original row
  std::vector<int> eq_origin;
  std::vector<double> eq_scale;
  bool trivially_infeasible = false;
  VectorXd trivial_y;   // certificate in original row space
  VectorXd trivial_mu;
};

// Row-normalize by the max absolute coefficient, drop vacuous rows, detect
// trivially inconsistent rows, and deduplicate inequality rows that share a
// direction (keeping the smallest right-hand side).
Presolved presolve(const ConicProgram& in) {
  Presolved out;
  out.prog.num_vars = in.num_vars;
  out.prog.P = in.P;
  out.prog.q = in.q.size() ? in.q : VectorXd::Zero(in.num_vars);

  std::vector<Eigen::Triplet<double>> atrip, ctrip;
  std::vector<double> bvals, dvals;
  std::unordered_map<size_t, int> seen;  // row hash -> kept row index
  std::vector<std::vector<std::pair<int, double>>> kept_rows;

  auto hash_row = [](const std::vector<std::pair<int, double>>& row) {
    size_t h = 1469598103934665603ull;
    for (const auto& [c, v] : row) {
      long long qv = llround(v * 1e10);
      h = (h ^ static_cast<size_t>(c)) * 1099511628211ull;
      h = (h ^ static_cast<size_t>(qv)) * 1099511628211ull;
    }
    return h;
  };

  const SparseMat At = SparseMat(in.A.transpose());  // column access per row
  for (int r = 0; r < in.A.rows(); ++r) {
    std::vector<std::pair<int, double>> row;
    double norm = 0.0;
    for (SparseMat::InnerIterator it(At, r); it; ++it) {
      row.emplace_back(static_cast<int>(it.row()), it.value());
      norm = std::max(norm, std::abs(it.value()));
    }
    if (norm == 0.0) {
      if (in.b(r) < -1e-12) {
        out.trivially_infeasible = true;
        out.trivial_y = VectorXd::Zero(in.A.rows());
        out.trivial_y(r) = 1.0;
        out.trivial_mu = VectorXd::Zero(in.C.rows());
        return out;
      }
      continue;  // 0 <= b, vacuous
    }
    for (auto& [c, v] : row) v /= norm;
    const double rhs = in.b(r) / norm;
    const size_t h = hash_row(row);
    auto it = seen.find(h);
    if (it != seen.end() && kept_rows[it->second] == row) {
      const int k = it->second;
      if (rhs < bvals[k]) {
        bvals[k] = rhs;
        out.ineq_origin[k] = r;
        out.ineq_scale[k] = norm;
      }
      continue;
    }
    const int k = static_cast<int>(bvals.size());
    seen.emplace(h, k);
    kept_rows.push_back(row);
    for (const auto& [c, v] : row) atrip.emplace_back(k, c, v);
    bvals.push_back(rhs);
    out.ineq_origin.push_back(r);
    out.ineq_scale.push_back(norm);
  }

  const SparseMat Ct = SparseMat(in.C.transpose());
  for (int r = 0; r < in.C.rows(); ++r) {
    double norm = 0.0;
    std::vector<std::pair<int, double>> row;
    for (SparseMat::InnerIterator it(Ct, r); it; ++it) {
      row.emplace_back(static_cast<int>(it.row()), it.value());
      norm = std::max(norm, std::abs(it.value()));
    }
    if (norm == 0.0) {
      if (std::abs(in.d(r)) > 1e-12) {
        out.trivially_infeasible = true;
        out.trivial_y = VectorXd::Zero(in.A.rows());
        out.trivial_mu = VectorXd::Zero(in.C.rows());
        out.trivial_mu(r) = in.d(r) > 0 ? -1.0 : 1.0;
        return out;
      }
      continue;
    }
    const int k = static_cast<int>(dvals.size());
    for (const auto& [c, v] : row) ctrip.emplace_back(k, c, v / norm);
    dvals.push_back(in.d(r) / norm);
    out.eq_origin.push_back(r);
    out.eq_scale.push_back(norm);
  }

  out.prog.A.resize(static_cast<int>(bvals.size()), in.num_vars);
  out.prog.A.setFromTriplets(atrip.begin(), atrip.end());
  out.prog.b = Eigen::Map<const VectorXd>(bvals.data(), bvals.size());
  out.prog.C.resize(static_cast<int>(dvals.size()), in.num_vars);
  out.prog.C.setFromTriplets(ctrip.begin(), ctrip.end());
  out.prog.d = Eigen::Map<const VectorXd>(dvals.data(), dvals.size());
  return out;
}

struct IpmIterates {
  VectorXd x, y, z, s;  // primal, eq dual, ineq dual, slack
  SolveStatus status = SolveStatus::IterationLimit;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

// Mehrotra predictor-corrector on the regularized quasidefinite KKT system
//   [ P+rho*I   C'        A'            ] [dx]
//   [ C         -delta*I  0             ] [dy]
//   [ A         0         -(SZ^-1+delta)] [dz]
// factored with sparse LDLT; one round of iterative refinement against the
// unregularized matrix per solve.
IpmIterates run_ipm(const ConicProgram& pr, const SolverOptions& opts) {
  const int nv = pr.num_vars;
  const int me = pr.num_eq();
  const int mi = pr.num_ineq();
  const double rho = 1e-8, delta = 1e-8;

  IpmIterates it;
  it.x = VectorXd::Zero(nv);
  it.y = VectorXd::Zero(me);
  it.z = VectorXd::Ones(mi);
  it.s = VectorXd::Ones(mi);
  for (int i = 0; i < mi; ++i) it.s(i) = std::max(1.0, pr.b(i));

  const SparseMat AT = SparseMat(pr.A.transpose());
  const SparseMat CT = SparseMat(pr.C.transpose());
  const double qnorm = pr.q.size() ? pr.q.cwiseAbs().maxCoeff() : 0.0;
  const bool has_P = pr.P.nonZeros() > 0;
  VectorXd b_scale = VectorXd::Ones(mi);
  for (int i = 0; i < mi; ++i) b_scale(i) = 1.0 + std::abs(pr.b(i));
  VectorXd d_scale = VectorXd::Ones(me);
  for (int i = 0; i < me; ++i) d_scale(i) = 1.0 + std::abs(pr.d(i));

  // KKT skeleton: entries that never change are stored once as triplets;
  // the (3,3) barrier diagonal is refreshed each iteration.
  const int dim = nv + me + mi;
  std::vector<Eigen::Triplet<double>> base;
  base.reserve(pr.P.nonZeros() + 2 * pr.C.nonZeros() + 2 * pr.A.nonZeros() +
               dim);
  if (has_P) {
    for (int k = 0; k < pr.P.outerSize(); ++k) {
      for (SparseMat::InnerIterator e(pr.P, k); e; ++e) {
        base.emplace_back(static_cast<int>(e.row()),
                          static_cast<int>(e.col()), e.value());
      }
    }
  }
  for (int i = 0; i < nv; ++i) base.emplace_back(i, i, rho);
  for (int k = 0; k < pr.C.outerSize(); ++k) {
    for (SparseMat::InnerIterator e(pr.C, k); e; ++e) {
      base.emplace_back(nv + static_cast<int>(e.row()),
                        static_cast<int>(e.col()), e.value());
      base.emplace_back(static_cast<int>(e.col()),
                        nv + static_cast<int>(e.row()), e.value());
    }
  }
  for (int i = 0; i < me; ++i) base.emplace_back(nv + i, nv + i, -delta);
  for (int k = 0; k < pr.A.outerSize(); ++k) {
    for (SparseMat::InnerIterator e(pr.A, k); e; ++e) {
      base.emplace_back(nv + me + static_cast<int>(e.row()),
                        static_cast<int>(e.col()), e.value());
      base.emplace_back(static_cast<int>(e.col()),
                        nv + me + static_cast<int>(e.row()), e.value());
    }
  }

  Eigen::SimplicialLDLT<SparseMat> ldlt;
  SparseMat K(dim, dim);
  bool analyzed = false;

  double best_metric = std::numeric_limits<double>::infinity();
  int stall = 0;

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    it.iterations = iter;
    VectorXd Px = has_P ? VectorXd(pr.P * it.x) : VectorXd::Zero(nv);
    VectorXd rd = Px + pr.q + CT * it.y + AT * it.z;
    VectorXd re = pr.C * it.x - pr.d;
    VectorXd ri = pr.A * it.x + it.s - pr.b;
    const double gap = mi ? it.s.dot(it.z) / mi : 0.0;
    const double pobj = 0.5 * it.x.dot(Px) + pr.q.dot(it.x);

    // per-row relative primal residuals keep a few large right-hand sides
    // from masking violations elsewhere
    double rp_norm = 0.0;
    for (int i = 0; i < mi; ++i) {
      rp_norm = std::max(rp_norm, std::abs(ri(i)) / b_scale(i));
    }
    for (int i = 0; i < me; ++i) {
      rp_norm = std::max(rp_norm, std::abs(re(i)) / d_scale(i));
    }
    const double rd_norm = nv ? rd.cwiseAbs().maxCoeff() : 0.0;
    it.primal_residual = rp_norm;
    it.dual_residual = rd_norm;

    const double dscale =
        1.0 + qnorm + (has_P ? Px.cwiseAbs().maxCoeff() : 0.0);
    if (rp_norm <= opts.feas_tol && rd_norm <= opts.dual_tol * dscale &&
        gap <= opts.gap_tol * (1.0 + std::abs(pobj))) {
      it.status = SolveStatus::Optimal;
      return it;
    }

    const double metric = rp_norm + rd_norm / dscale + gap;
    if (metric < 0.9 * best_metric) {
      best_metric = metric;
      stall = 0;
    } else if (++stall > 20) {
      it.status = SolveStatus::IterationLimit;
      return it;
    }
    if (!it.x.allFinite() || it.x.cwiseAbs().maxCoeff() > 1e14) {
      it.status = SolveStatus::NumericalFailure;
      return it;
    }

    std::vector<Eigen::Triplet<double>> trip = base;
    for (int i = 0; i < mi; ++i) {
      trip.emplace_back(nv + me + i, nv + me + i,
                        -(it.s(i) / it.z(i) + delta));
    }
    K.setFromTriplets(trip.begin(), trip.end());
    if (!analyzed) {
      ldlt.analyzePattern(K);
      analyzed = true;
    }
    ldlt.factorize(K);
    if (ldlt.info() != Eigen::Success) {
      it.status = SolveStatus::NumericalFailure;
      return it;
    }

    auto kkt_solve = [&](const VectorXd& rhs) {
      VectorXd sol = ldlt.solve(rhs);
      // one refinement round against the unregularized system
      VectorXd prod = K * sol;
      prod.head(nv) -= rho * sol.head(nv);
      prod.segment(nv, me) += delta * sol.segment(nv, me);
      prod.tail(mi) += delta * sol.tail(mi);
      VectorXd corr = ldlt.solve(rhs - prod);
      return VectorXd(sol + corr);
    };

    // predictor
    VectorXd rhs(dim);
    rhs.head(nv) = -rd;
    rhs.segment(nv, me) = -re;
    rhs.tail(mi) = -ri + it.s;  // Z^-1 * (s.*z) = s
    VectorXd aff = kkt_solve(rhs);
    VectorXd dz_aff = aff.tail(mi);
    VectorXd ds_aff = -it.s - (it.s.array() / it.z.array()).matrix()
                                  .cwiseProduct(dz_aff);

    auto max_step = [](const VectorXd& v, const VectorXd& dv) {
      double a = 1.0;
      for (int i = 0; i < v.size(); ++i) {
        if (dv(i) < 0) a = std::min(a, -v(i) / dv(i));
      }
      return a;
    };
    double ap = max_step(it.s, ds_aff);
    double ad = max_step(it.z, dz_aff);
    double gap_aff =
        mi ? (it.s + ap * ds_aff).dot(it.z + ad * dz_aff) / mi : 0.0;
    double sigma = gap > 0 ? std::pow(gap_aff / gap, 3) : 0.0;
    sigma = std::clamp(sigma, 1e-8, 0.9999);

    // corrector
    VectorXd rc = -(it.s.array() * it.z.array()).matrix() +
                  VectorXd::Constant(mi, sigma * gap) -
                  ds_aff.cwiseProduct(dz_aff);
    rhs.tail(mi) = -ri - (rc.array() / it.z.array()).matrix();
    VectorXd sol = kkt_solve(rhs);
    VectorXd dx = sol.head(nv);
    VectorXd dy = sol.segment(nv, me);
    VectorXd dz = sol.tail(mi);
    VectorXd ds = (rc.array() / it.z.array()).matrix() -
                  (it.s.array() / it.z.array()).matrix().cwiseProduct(dz);

    const double tau = 0.995;
    double alpha_p = std::min(1.0, tau * max_step(it.s, ds));
    double alpha_d = std::min(1.0, tau * max_step(it.z, dz));
    it.x += alpha_p * dx;
    it.s += alpha_p * ds;
    it.y += alpha_d * dy;
    it.z += alpha_d * dz;
  }
  it.status = SolveStatus::IterationLimit;
  return it;
}

// Equality-constrained QP (no inequalities): one regularized KKT solve
// with refinement.
IpmIterates solve_eq_qp(const ConicProgram& pr, const SolverOptions& opts) {
  const int nv = pr.num_vars;
  const int me = pr.num_eq();
  const double rho = 1e-8, delta = 1e-8;
  IpmIterates it;
  it.z = VectorXd();
  it.s = VectorXd();

  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < pr.P.outerSize(); ++k) {
    for (SparseMat::InnerIterator e(pr.P, k); e; ++e) {
      trip.emplace_back(static_cast<int>(e.row()), static_cast<int>(e.col()),
                        e.value());
    }
  }
  for (int i = 0; i < nv; ++i) trip.emplace_back(i, i, rho);
  for (int k = 0; k < pr.C.outerSize(); ++k) {
    for (SparseMat::InnerIterator e(pr.C, k); e; ++e) {
      trip.emplace_back(nv + static_cast<int>(e.row()),
                        static_cast<int>(e.col()), e.value());
      trip.emplace_back(static_cast<int>(e.col()),
                        nv + static_cast<int>(e.row()), e.value());
    }
  }
  for (int i = 0; i < me; ++i) trip.emplace_back(nv + i, nv + i, -delta);
  SparseMat K(nv + me, nv + me);
  K.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<SparseMat> ldlt(K);
  if (ldlt.info() != Eigen::Success) {
    it.status = SolveStatus::NumericalFailure;
    return it;
  }
  VectorXd rhs(nv + me);
  rhs.head(nv) = -pr.q;
  rhs.segment(nv, me) = pr.d;
  VectorXd sol = ldlt.solve(rhs);
  for (int r = 0; r < 3; ++r) {
    VectorXd prod = K * sol;
    prod.head(nv) -= rho * sol.head(nv);
    prod.segment(nv, me) += delta * sol.segment(nv, me);
    sol += ldlt.solve(rhs - prod);
  }
  it.x = sol.head(nv);
  it.y = sol.segment(nv, me);
  it.iterations = 1;
  VectorXd re = pr.C * it.x - pr.d;
  VectorXd rd = pr.P * it.x + pr.q + SparseMat(pr.C.transpose()) * it.y;
  it.primal_residual = me ? re.cwiseAbs().maxCoeff() : 0.0;
  it.dual_residual = nv ? rd.cwiseAbs().maxCoeff() : 0.0;
  const double dnorm = me ? pr.d.cwiseAbs().maxCoeff() : 0.0;
  if (it.primal_residual > opts.feas_tol * (1.0 + dnorm) * 100) {
    // inconsistent equalities or numerically deficient; caller certifies
    // via phase-1
    it.status = SolveStatus::IterationLimit;
  } else if (it.dual_residual >
             opts.dual_tol * (1.0 + pr.q.cwiseAbs().maxCoeff()) * 1e4) {
    it.status = SolveStatus::Unbounded;
  } else {
    it.status = SolveStatus::Optimal;
  }
  return it;
}

struct Phase1Data {
  ConicProgram prog;  // variables (x, t)
  int mi_orig;        // rows of A in the presolved program
  int me_orig;
  bool soft_equalities = false;
};

// min t s.t. Ax - t <= b, Cx = d, t >= -1. With soft_equalities the
// equality rows are folded into the objective as |Cx - d| <= t as well
// (used as the fallback when the equalities themselves are inconsistent).
Phase1Data build_phase1(const ConicProgram& pr, bool soft_equalities) {
  Phase1Data ph;
  const int nv = pr.num_vars;
  ph.mi_orig = pr.num_ineq();
  ph.me_orig = pr.num_eq();
  ph.soft_equalities = soft_equalities;
  ph.prog.num_vars = nv + 1;
  std::vector<Eigen::Triplet<double>> atrip;
  const int rows =
      ph.mi_orig + (soft_equalities ? 2 * ph.me_orig : 0) + 1;
  VectorXd b(rows);
  int r = 0;
  for (int k = 0; k < pr.A.outerSize(); ++k) {
    for (SparseMat::InnerIterator e(pr.A, k); e; ++e) {
      atrip.emplace_back(static_cast<int>(e.row()),
                         static_cast<int>(e.col()), e.value());
    }
  }
  for (int i = 0; i < ph.mi_orig; ++i) {
    atrip.emplace_back(i, nv, -1.0);
    b(r++) = pr.b(i);
  }
  if (soft_equalities) {
    for (int k = 0; k < pr.C.outerSize(); ++k) {
      for (SparseMat::InnerIterator e(pr.C, k); e; ++e) {
        atrip.emplace_back(ph.mi_orig + static_cast<int>(e.row()),
                           static_cast<int>(e.col()), e.value());
        atrip.emplace_back(
            ph.mi_orig + ph.me_orig + static_cast<int>(e.row()),
            static_cast<int>(e.col()), -e.value());
      }
    }
    for (int i = 0; i < ph.me_orig; ++i) {
      atrip.emplace_back(ph.mi_orig + i, nv, -1.0);
      b(r++) = pr.d(i);
    }
    for (int i = 0; i < ph.me_orig; ++i) {
      atrip.emplace_back(ph.mi_orig + ph.me_orig + i, nv, -1.0);
      b(r++) = -pr.d(i);
    }
  }
  atrip.emplace_back(rows - 1, nv, -1.0);  // t >= -1
  b(r++) = 1.0;
  ph.prog.A.resize(rows, nv + 1);
  ph.prog.A.setFromTriplets(atrip.begin(), atrip.end());
  ph.prog.b = b;
  ph.prog.P.resize(nv + 1, nv + 1);
  ph.prog.q = VectorXd::Zero(nv + 1);
  ph.prog.q(nv) = 1.0;
  if (soft_equalities) {
    ph.prog.C.resize(0, nv + 1);
    ph.prog.d = VectorXd();
  } else {
    std::vector<Eigen::Triplet<double>> ctrip;
    for (int k = 0; k < pr.C.outerSize(); ++k) {
      for (SparseMat::InnerIterator e(pr.C, k); e; ++e) {
        ctrip.emplace_back(static_cast<int>(e.row()),
                           static_cast<int>(e.col()), e.value());
      }
    }
    ph.prog.C.resize(ph.me_orig, nv + 1);
    ph.prog.C.setFromTriplets(ctrip.begin(), ctrip.end());
    ph.prog.d = pr.d;
  }
  return ph;
}

// Farkas certificate from phase-1 duals, mapped back to the original rows.
// Returns false if the certificate fails numerical verification.
bool extract_certificate(const ConicProgram& original, const Presolved& ps,
                         const Phase1Data& ph, const IpmIterates& it,
                         VectorXd* y_out, VectorXd* mu_out) {
  VectorXd y_red = it.z.head(ph.mi_orig);
  VectorXd mu_red =
      ph.soft_equalities
          ? VectorXd(it.z.segment(ph.mi_orig, ph.me_orig) -
                     it.z.segment(ph.mi_orig + ph.me_orig, ph.me_orig))
          : it.y;
  double total = y_red.lpNorm<1>() + mu_red.lpNorm<1>();
  if (total < 1e-12) return false;
  y_red /= total;
  mu_red /= total;

  VectorXd y = VectorXd::Zero(original.A.rows());
  for (int i = 0; i < y_red.size(); ++i) {
    if (y_red(i) > 0) y(ps.ineq_origin[i]) += y_red(i) / ps.ineq_scale[i];
  }
  VectorXd mu = VectorXd::Zero(original.C.rows());
  for (int i = 0; i < mu_red.size(); ++i) {
    mu(ps.eq_origin[i]) += mu_red(i) / ps.eq_scale[i];
  }

  VectorXd resid = SparseMat(original.A.transpose()) * y +
                   SparseMat(original.C.transpose()) * mu;
  const double scale = std::max(1.0, y.lpNorm<1>() + mu.lpNorm<1>());
  const double gap = original.b.dot(y) + original.d.dot(mu);
  if (resid.cwiseAbs().maxCoeff() > 1e-6 * scale) return false;
  if (gap > -1e-9 * scale) return false;
  *y_out = y;
  *mu_out = mu;
  return true;
}

}  // namespace

SolveResult InteriorPointSolver::solve_phase1(const ConicProgram& prog,
                                              const SolverOptions& opts) {
  const auto t0 = Clock::now();
  SolveResult res;
  Presolved ps = presolve(prog);
  if (ps.trivially_infeasible) {
    res.status = SolveStatus::PrimalInfeasible;
    res.farkas_y = ps.trivial_y;
    res.farkas_mu = ps.trivial_mu;
    res.wall_time_s = elapsed_s(t0);
    return res;
  }
  if (ps.prog.num_ineq() == 0 && ps.prog.num_eq() == 0) {
    res.status = SolveStatus::Optimal;
    res.x = VectorXd::Zero(prog.num_vars);
    res.objective = 0.0;
    res.wall_time_s = elapsed_s(t0);
    return res;
  }
  // hard-equality phase first; soft-equality fallback covers inconsistent
  // equality systems
  for (const bool soft : {false, true}) {
    Phase1Data ph = build_phase1(ps.prog, soft);
    SolverOptions p1opts = opts;
    p1opts.gap_tol = std::min(opts.gap_tol, 1e-9);
    IpmIterates it = run_ipm(ph.prog, p1opts);
    res.iterations += it.iterations;
    res.wall_time_s = elapsed_s(t0);
    if (it.status != SolveStatus::Optimal) {
      if (!soft) continue;
      res.status = SolveStatus::NumericalFailure;
      return res;
    }
    const double tstar = it.x(ps.prog.num_vars);
    res.objective = tstar;
    res.x = it.x.head(ps.prog.num_vars);
    res.primal_residual = it.primal_residual;
    res.dual_residual = it.dual_residual;
    if (tstar <= opts.feas_tol_accept) {
      res.status = SolveStatus::Optimal;
      return res;
    }
    if (tstar >= opts.infeas_tol_reject &&
        extract_certificate(prog, ps, ph, it, &res.farkas_y,
                            &res.farkas_mu)) {
      res.status = SolveStatus::PrimalInfeasible;
      return res;
    }
    res.status = SolveStatus::NumericalFailure;  // inconclusive band
    return res;
  }
  res.status = SolveStatus::NumericalFailure;
  return res;
}

SolveResult InteriorPointSolver::solve(const ConicProgram& prog,
                                       const SolverOptions& opts) {
  const auto t0 = Clock::now();
  SolveResult res;
  const bool has_objective =
      (prog.P.size() > 0 && prog.P.nonZeros() > 0) ||
      (prog.q.size() > 0 && prog.q.cwiseAbs().maxCoeff() > 0);

  if (!has_objective) {
    // pure feasibility: route through phase-1, report the witness
    res = solve_phase1(prog, opts);
    res.objective = 0.0;
    return res;
  }

  Presolved ps = presolve(prog);
  if (ps.trivially_infeasible) {
    res.status = SolveStatus::PrimalInfeasible;
    res.farkas_y = ps.trivial_y;
    res.farkas_mu = ps.trivial_mu;
    res.wall_time_s = elapsed_s(t0);
    return res;
  }

  IpmIterates it = ps.prog.num_ineq() == 0 ? solve_eq_qp(ps.prog, opts)
                                           : run_ipm(ps.prog, opts);
  if (it.status == SolveStatus::Optimal) {
    res.status = SolveStatus::Optimal;
    res.x = it.x;
    res.objective = 0.5 * it.x.dot(ps.prog.P * it.x) + ps.prog.q.dot(it.x);
    res.iterations = it.iterations;
    res.primal_residual = it.primal_residual;
    res.dual_residual = it.dual_residual;
    res.wall_time_s = elapsed_s(t0);
    return res;
  }
  if (it.status == SolveStatus::Unbounded) {
    res.status = SolveStatus::Unbounded;
    res.wall_time_s = elapsed_s(t0);
    return res;
  }

  // Did the IPM fail because the program is infeasible? Certify it.
  SolveResult feas = solve_phase1(prog, opts);
  if (feas.status == SolveStatus::PrimalInfeasible) {
    feas.wall_time_s = elapsed_s(t0);
    feas.iterations += it.iterations;
    return feas;
  }
  res.status = it.status;
  res.x = it.x;
  res.iterations = it.iterations;
  res.primal_residual = it.primal_residual;
  res.dual_residual = it.dual_residual;
  res.wall_time_s = elapsed_s(t0);
  return res;
}

FeasOutcome check_feasible(const ConicProgram& prog, const SolverOptions& opts,
                           VectorXd* witness, SolveResult* cert) {
  InteriorPointSolver solver;
  SolveResult res = solver.solve_phase1(prog, opts);
  if (cert) *cert = res;
  switch (res.status) {
    case SolveStatus::Optimal:
      if (witness) *witness = res.x;
      return FeasOutcome::Feasible;
    case SolveStatus::PrimalInfeasible:
      return FeasOutcome::Infeasible;
    default:
      return FeasOutcome::Inconclusive;
  }
}

}  // namespace slsmpc
