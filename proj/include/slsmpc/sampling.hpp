#ifndef SLSMPC_SAMPLING_HPP
#define SLSMPC_SAMPLING_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "slsmpc/blt.hpp"
#include "slsmpc/model.hpp"

namespace slsmpc {

/// mt19937_64 with bit-portable derived values: uniforms are built from the
/// raw 64-bit output, so identical seeds replay identically across
/// platforms and standard libraries.
class Rng {
public:
  explicit Rng(uint64_t seed) : engine_(seed), seed_(seed) {}

  uint64_t raw() { return engine_(); }
  double uniform() {  // [0, 1)
    return static_cast<double>(raw() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int n) {  // 0..n-1
    return static_cast<int>(raw() % static_cast<uint64_t>(n));
  }
  double sign() { return (raw() & 1) ? 1.0 : -1.0; }
  double gaussian() {
    // Box-Muller on portable uniforms
    double u1 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925287 * u2);
  }
  /// Deterministic child stream for parallel tasks.
  Rng fork(uint64_t stream) const;
  uint64_t seed() const { return seed_; }

private:
  std::mt19937_64 engine_;
  uint64_t seed_;
};

enum class SamplingMode { Vertices, Interior, Mixed };

SamplingMode sampling_mode_from_string(const std::string& s);
std::string to_string(SamplingMode m);

/// One admissible uncertainty realization. Memoryless samples carry
/// per-step matrices; full LTV samples carry causal operators.
struct UncertaintySample {
  std::vector<MatrixXd> deltaA_t;  // per step, memoryless
  std::vector<MatrixXd> deltaB_t;
  BltOperator deltaA_op;  // causal BLT over the horizon
  BltOperator deltaB_op;
  std::vector<VectorXd> w;  // T blocks
  bool memoryless = true;

  /// True system matrices A_t + dA_t (memoryless only).
  std::vector<MatrixXd> true_A(const LtvModel& model) const;
  std::vector<MatrixXd> true_B(const LtvModel& model) const;
};

/// Draws (Delta_A, Delta_B, w) within the model's bounds. Vertices mode
/// places each block row at an extreme point of its l1 ball; interior mode
/// scales each row to a uniformly drawn l1 norm; mixed alternates.
UncertaintySample sample_uncertainty(const LtvModel& model, SamplingMode mode,
                                     Rng& rng);

/// The sample whose per-step matrices equal a given vertex of the
/// memoryless ball (constant in time), with disturbances at W vertices.
UncertaintySample vertex_uncertainty_sample(const LtvModel& model,
                                            const MatrixXd& dA,
                                            const MatrixXd& dB, Rng& rng);

/// Row with a uniformly drawn l1 norm <= eps (exponential-split direction).
VectorXd sample_l1_row(int dim, double eps, Rng& rng);

}  // namespace slsmpc

#endif  // SLSMPC_SAMPLING_HPP
