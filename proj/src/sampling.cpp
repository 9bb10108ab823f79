#include "slsmpc/sampling.hpp"

#include <cmath>
#include <stdexcept>

namespace slsmpc {

namespace {
uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}
}  // namespace

Rng Rng::fork(uint64_t stream) const {
  return Rng(splitmix64(seed_ ^ splitmix64(stream + 0x51ed2701)));
}

SamplingMode sampling_mode_from_string(const std::string& s) {
  if (s == "vertices") return SamplingMode::Vertices;
  if (s == "interior") return SamplingMode::Interior;
  if (s == "mixed") return SamplingMode::Mixed;
  throw std::invalid_argument("unknown sampling mode: " + s);
}

std::string to_string(SamplingMode m) {
  switch (m) {
    case SamplingMode::Vertices: return "vertices";
    case SamplingMode::Interior: return "interior";
    case SamplingMode::Mixed: return "mixed";
  }
  return "unknown";
}

std::vector<MatrixXd> UncertaintySample::true_A(const LtvModel& model) const {
  if (!memoryless) {
    throw std::logic_error("true_A: only defined for memoryless samples");
  }
  std::vector<MatrixXd> out(model.A);
  for (int t = 0; t < model.horizon; ++t) out[t] += deltaA_t[t];
  return out;
}

std::vector<MatrixXd> UncertaintySample::true_B(const LtvModel& model) const {
  if (!memoryless) {
    throw std::logic_error("true_B: only defined for memoryless samples");
  }
  std::vector<MatrixXd> out(model.B);
  for (int t = 0; t < model.horizon; ++t) out[t] += deltaB_t[t];
  return out;
}

VectorXd sample_l1_row(int dim, double eps, Rng& rng) {
  VectorXd row = VectorXd::Zero(dim);
  if (eps == 0.0 || dim == 0) return row;
  // exponential split gives a uniform direction on the l1 sphere
  double total = 0.0;
  for (int i = 0; i < dim; ++i) {
    double u = rng.uniform();
    while (u <= 1e-300) u = rng.uniform();
    row(i) = -std::log(u) * rng.sign();
    total += std::abs(row(i));
  }
  const double norm = rng.uniform() * eps;
  row *= norm / total;
  return row;
}

namespace {

MatrixXd vertex_matrix(int rows, int cols, double eps, Rng& rng) {
  MatrixXd M = MatrixXd::Zero(rows, cols);
  if (eps == 0.0) return M;
  for (int r = 0; r < rows; ++r) {
    M(r, rng.uniform_int(cols)) = eps * rng.sign();
  }
  return M;
}

MatrixXd interior_matrix(int rows, int cols, double eps, Rng& rng) {
  MatrixXd M(rows, cols);
  for (int r = 0; r < rows; ++r) M.row(r) = sample_l1_row(cols, eps, rng);
  return M;
}

}  // namespace

UncertaintySample sample_uncertainty(const LtvModel& model, SamplingMode mode,
                                     Rng& rng) {
  const int T = model.horizon;
  const int n = model.state_dim();
  const int m = model.input_dim();
  UncertaintySample s;
  s.w.resize(T);
  for (int t = 0; t < T; ++t) {
    VectorXd w(n);
    for (int c = 0; c < n; ++c) w(c) = rng.uniform(-model.sigma_w,
                                                   model.sigma_w);
    s.w[t] = model.sigma_w == 0.0 ? VectorXd::Zero(n) : w;
  }

  auto pick_vertex = [&](SamplingMode mm) {
    return mm == SamplingMode::Vertices ||
           (mm == SamplingMode::Mixed && rng.uniform() < 0.5);
  };

  if (model.uncertainty == UncertaintyStructure::Memoryless) {
    s.memoryless = true;
    s.deltaA_t.resize(T);
    s.deltaB_t.resize(T);
    s.deltaA_op = BltOperator(T, n, n);
    s.deltaB_op = BltOperator(T, n, m);
    for (int t = 0; t < T; ++t) {
      const bool vert = pick_vertex(mode);
      s.deltaA_t[t] = vert ? vertex_matrix(n, n, model.eps_A, rng)
                           : interior_matrix(n, n, model.eps_A, rng);
      s.deltaB_t[t] = vert ? vertex_matrix(n, m, model.eps_B, rng)
                           : interior_matrix(n, m, model.eps_B, rng);
      s.deltaA_op.set_block(t, 0, s.deltaA_t[t]);
      s.deltaB_op.set_block(t, 0, s.deltaB_t[t]);
    }
    return s;
  }

  // full LTV: every block row is one induced-norm row of the causal operator
  s.memoryless = false;
  s.deltaA_op = BltOperator(T, n, n);
  s.deltaB_op = BltOperator(T, n, m);
  for (int t = 0; t <= T; ++t) {
    MatrixXd rowA(n, (t + 1) * n), rowB(n, (t + 1) * m);
    for (int r = 0; r < n; ++r) {
      rowA.row(r) = sample_l1_row((t + 1) * n, model.eps_A, rng).transpose();
      rowB.row(r) = sample_l1_row((t + 1) * m, model.eps_B, rng).transpose();
    }
    for (int k = 0; k <= t; ++k) {
      // delay k occupies dense column block t - k
      s.deltaA_op.set_block(t, k, rowA.middleCols((t - k) * n, n));
      s.deltaB_op.set_block(t, k, rowB.middleCols((t - k) * m, m));
    }
  }
  return s;
}

UncertaintySample vertex_uncertainty_sample(const LtvModel& model,
                                            const MatrixXd& dA,
                                            const MatrixXd& dB, Rng& rng) {
  const int T = model.horizon;
  const int n = model.state_dim();
  UncertaintySample s;
  s.memoryless = true;
  s.deltaA_t.assign(T, dA);
  s.deltaB_t.assign(T, dB);
  s.deltaA_op = BltOperator(T, n, n);
  s.deltaB_op = BltOperator(T, n, model.input_dim());
  for (int t = 0; t < T; ++t) {
    s.deltaA_op.set_block(t, 0, dA);
    s.deltaB_op.set_block(t, 0, dB);
  }
  s.w.resize(T);
  for (int t = 0; t < T; ++t) {
    VectorXd w(n);
    for (int c = 0; c < n; ++c) {
      w(c) = model.sigma_w * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    }
    s.w[t] = w;
  }
  return s;
}

}  // namespace slsmpc
