#include "slsmpc/conic.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace slsmpc {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::PrimalInfeasible: return "primal_infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::IterationLimit: return "iteration_limit";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

void ConicProgram::validate() const {
  if (P.size() > 0 && (P.rows() != num_vars || P.cols() != num_vars)) {
    throw std::invalid_argument("ConicProgram: P dimension mismatch");
  }
  if (q.size() > 0 && q.size() != num_vars) {
    throw std::invalid_argument("ConicProgram: q dimension mismatch");
  }
  if (C.rows() != d.size() || (C.rows() > 0 && C.cols() != num_vars)) {
    throw std::invalid_argument("ConicProgram: equality dimension mismatch");
  }
  if (A.rows() != b.size() || (A.rows() > 0 && A.cols() != num_vars)) {
    throw std::invalid_argument("ConicProgram: inequality dimension mismatch");
  }
  if (P.size() > 0 && P.nonZeros() > 0) {
    SparseMat Pt = SparseMat(P.transpose());
    SparseMat sym = 0.5 * (P + Pt);
    SparseMat diff = P - Pt;
    double asym = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k) {
      for (SparseMat::InnerIterator it(diff, k); it; ++it) {
        asym = std::max(asym, std::abs(it.value()));
      }
    }
    if (asym > 1e-8) {
      throw std::invalid_argument("ConicProgram: P is not symmetric");
    }
    if (num_vars <= 400) {
      Eigen::MatrixXd dense = Eigen::MatrixXd(sym);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
      if (es.eigenvalues().minCoeff() < -1e-9) {
        throw std::invalid_argument("ConicProgram: P is not PSD");
      }
    } else {
      // Shifted Cholesky probe for large P.
      SparseMat shifted = sym;
      for (int i = 0; i < num_vars; ++i) shifted.coeffRef(i, i) += 1e-7;
      Eigen::SimplicialLDLT<SparseMat> ldlt(shifted);
      if (ldlt.info() != Eigen::Success ||
          ldlt.vectorD().minCoeff() < -1e-9) {
        throw std::invalid_argument("ConicProgram: P is not PSD");
      }
    }
  }
}

namespace {

nlohmann::json sparse_to_json(const SparseMat& M) {
  nlohmann::json j;
  j["rows"] = M.rows();
  j["cols"] = M.cols();
  std::vector<int> ri, ci;
  std::vector<double> v;
  for (int k = 0; k < M.outerSize(); ++k) {
    for (SparseMat::InnerIterator it(M, k); it; ++it) {
      ri.push_back(static_cast<int>(it.row()));
      ci.push_back(static_cast<int>(it.col()));
      v.push_back(it.value());
    }
  }
  j["row"] = ri;
  j["col"] = ci;
  j["val"] = v;
  return j;
}

}  // namespace

void ConicProgram::dump_json(const std::string& path) const {
  nlohmann::json j;
  j["format"] = "slsmpc-conic-program-v1";
  j["description"] =
      "min 1/2 x'Px + q'x  s.t.  Cx = d, Ax <= b; matrices in COO triplets";
  j["num_vars"] = num_vars;
  j["P"] = sparse_to_json(P);
  j["q"] = std::vector<double>(q.data(), q.data() + q.size());
  j["C"] = sparse_to_json(C);
  j["d"] = std::vector<double>(d.data(), d.data() + d.size());
  j["A"] = sparse_to_json(A);
  j["b"] = std::vector<double>(b.data(), b.data() + b.size());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("dump_json: cannot open " + path);
  out << j.dump(2) << "\n";
}

void ProgramBuilder::add_eq(const std::vector<Term>& lhs, double rhs) {
  const int row = static_cast<int>(d_.size());
  for (const auto& [i, v] : lhs) {
    if (v != 0.0) eq_.emplace_back(row, i, v);
  }
  d_.push_back(rhs);
}

void ProgramBuilder::add_ineq(const std::vector<Term>& lhs, double rhs) {
  const int row = static_cast<int>(b_.size());
  for (const auto& [i, v] : lhs) {
    if (v != 0.0) ineq_.emplace_back(row, i, v);
  }
  b_.push_back(rhs);
}

void ProgramBuilder::add_objective_term(int i, int j, double Pij) {
  if (Pij == 0.0) return;
  pt_.emplace_back(i, j, Pij);
  if (i != j) pt_.emplace_back(j, i, Pij);
}

void ProgramBuilder::add_linear_cost(int i, double qi) {
  if (qi != 0.0) q_.emplace_back(i, qi);
}

ConicProgram ProgramBuilder::build() const {
  ConicProgram prog;
  prog.num_vars = num_vars_;
  prog.C.resize(static_cast<int>(d_.size()), num_vars_);
  prog.C.setFromTriplets(eq_.begin(), eq_.end());
  prog.d = Eigen::Map<const VectorXd>(d_.data(), d_.size());
  prog.A.resize(static_cast<int>(b_.size()), num_vars_);
  prog.A.setFromTriplets(ineq_.begin(), ineq_.end());
  prog.b = Eigen::Map<const VectorXd>(b_.data(), b_.size());
  prog.P.resize(num_vars_, num_vars_);
  prog.P.setFromTriplets(pt_.begin(), pt_.end());
  prog.q = VectorXd::Zero(num_vars_);
  for (const auto& [i, v] : q_) prog.q(i) += v;
  return prog;
}

}  // namespace slsmpc
