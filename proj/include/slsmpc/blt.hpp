#ifndef SLSMPC_BLT_HPP
#define SLSMPC_BLT_HPP

#include <Eigen/Dense>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace slsmpc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Thrown by BltOperator::inverse() when a diagonal block is numerically
/// singular. Carries the offending block row.
class SingularBlockError : public std::runtime_error {
public:
  SingularBlockError(int row, const std::string& what)
      : std::runtime_error(what), block_row(row) {}
  int block_row;
};

/// Block-lower-triangular operator over a finite horizon T: a
/// (T+1)x(T+1) grid of p-by-q blocks where block (i, k) is the entry at
/// block row i and *delay* k, i.e. dense block column i-k. Only
/// 0 <= k <= i exists (causality); a strictly causal operator has no
/// delay-0 blocks.
///
/// Values are immutable after construction by convention: all algebra
/// returns new operators.
class BltOperator {
public:
  using BlockMap = std::map<std::pair<int, int>, MatrixXd>;

  BltOperator() = default;
  BltOperator(int horizon, int block_rows, int block_cols,
              bool strictly_causal = false);

  /// Validating constructor; rejects acausal indices and shape mismatches.
  static BltOperator from_blocks(const BlockMap& blocks, int horizon,
                                 int block_rows, int block_cols,
                                 bool strictly_causal = false);
  static BltOperator zero(int horizon, int block_rows, int block_cols);
  static BltOperator identity(int horizon, int n);
  /// Identity on the first block subdiagonal, zeros elsewhere.
  static BltOperator downshift(int horizon, int n);
  /// Block-diagonal operator diag(D_0, ..., D_T).
  static BltOperator block_diagonal(const std::vector<MatrixXd>& diag);

  int horizon() const { return horizon_; }
  int block_rows() const { return p_; }
  int block_cols() const { return q_; }
  bool strictly_causal() const { return strictly_causal_; }
  int dense_rows() const { return (horizon_ + 1) * p_; }
  int dense_cols() const { return (horizon_ + 1) * q_; }

  bool has_block(int row, int delay) const;
  /// Block at (row, delay); returns a zero block when absent.
  MatrixXd block(int row, int delay) const;
  /// Block at dense position (row, col) with col <= row.
  MatrixXd block_rc(int row, int col) const { return block(row, row - col); }
  void set_block(int row, int delay, MatrixXd value);
  const BlockMap& blocks() const { return blocks_; }

  BltOperator multiply(const BltOperator& rhs) const;
  BltOperator add(const BltOperator& rhs) const;
  BltOperator subtract(const BltOperator& rhs) const;
  BltOperator scale(double a) const;
  BltOperator pow(int k) const;
  /// Inverse by block forward substitution. Requires p == q and
  /// invertible diagonal blocks (condition estimate below 1e12).
  BltOperator inverse() const;

  /// Maximum absolute scalar-row sum of the dense realization.
  double induced_inf_norm() const;
  MatrixXd to_dense() const;
  /// Stacked application y = R w, with w of length dense_cols().
  VectorXd apply(const VectorXd& w) const;
  /// Horizontal block concatenation [this | rhs] (same T, p).
  BltOperator hcat(const BltOperator& rhs) const;
  /// Vertical block concatenation [this; rhs] (same T, q).
  BltOperator vcat(const BltOperator& rhs) const;

  bool same_shape(const BltOperator& o) const {
    return horizon_ == o.horizon_ && p_ == o.p_ && q_ == o.q_;
  }

private:
  void check_index(int row, int delay) const;

  int horizon_ = -1;
  int p_ = 0;
  int q_ = 0;
  bool strictly_causal_ = false;
  BlockMap blocks_;
};

inline BltOperator operator*(const BltOperator& a, const BltOperator& b) {
  return a.multiply(b);
}
inline BltOperator operator+(const BltOperator& a, const BltOperator& b) {
  return a.add(b);
}
inline BltOperator operator-(const BltOperator& a, const BltOperator& b) {
  return a.subtract(b);
}

/// Stacked trajectory of T+1 fixed-size blocks.
struct SignalTrajectory {
  enum class Role { State, Input, Disturbance };

  SignalTrajectory() = default;
  SignalTrajectory(int horizon, int block_dim, Role role);

  int blocks() const { return static_cast<int>(stacked.size()) / block_dim; }
  Eigen::VectorBlock<VectorXd> block(int t);
  VectorXd block(int t) const;
  void set_block(int t, const VectorXd& v);

  VectorXd stacked;
  int block_dim = 0;
  Role role = Role::State;
};

/// Column split of an operator into its first block column and the rest,
/// following the partition of the disturbance into (x_0, future w).
struct ColumnPartition {
  MatrixXd first_block_col;  // (T+1)p x q
  MatrixXd remainder;        // (T+1)p x T*q
  int horizon = 0;
  int block_rows = 0;
  int block_cols = 0;

  /// Exact (bit-wise) reassembly of the dense realization.
  MatrixXd reassemble() const;
};

/// Lossless partition [first block column | remainder].
ColumnPartition split_columns(const BltOperator& op);

}  // namespace slsmpc

#endif  // SLSMPC_BLT_HPP
