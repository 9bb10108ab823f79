#include "slsmpc/blt.hpp"

#include <Eigen/LU>
#include <cmath>

namespace slsmpc {

BltOperator::BltOperator(int horizon, int block_rows, int block_cols,
                         bool strictly_causal)
    : horizon_(horizon), p_(block_rows), q_(block_cols),
      strictly_causal_(strictly_causal) {
  if (horizon < 0 || block_rows <= 0 || block_cols <= 0) {
    throw std::invalid_argument("BltOperator: horizon must be >= 0 and block "
                                "dimensions positive");
  }
}

void BltOperator::check_index(int row, int delay) const {
  if (row < 0 || row > horizon_ || delay < 0 || delay > row) {
    throw std::invalid_argument(
        "BltOperator: block (" + std::to_string(row) + "," +
        std::to_string(delay) + ") violates causality for T=" +
        std::to_string(horizon_));
  }
  if (strictly_causal_ && delay == 0) {
    throw std::invalid_argument(
        "BltOperator: delay-0 block on a strictly causal operator (row " +
        std::to_string(row) + ")");
  }
}

BltOperator BltOperator::from_blocks(const BlockMap& blocks, int horizon,
                                     int block_rows, int block_cols,
                                     bool strictly_causal) {
  BltOperator op(horizon, block_rows, block_cols, strictly_causal);
  for (const auto& [idx, mat] : blocks) {
    op.set_block(idx.first, idx.second, mat);
  }
  return op;
}

BltOperator BltOperator::zero(int horizon, int block_rows, int block_cols) {
  return BltOperator(horizon, block_rows, block_cols);
}

BltOperator BltOperator::identity(int horizon, int n) {
  BltOperator op(horizon, n, n);
  for (int i = 0; i <= horizon; ++i) {
    op.set_block(i, 0, MatrixXd::Identity(n, n));
  }
  return op;
}

BltOperator BltOperator::downshift(int horizon, int n) {
  BltOperator op(horizon, n, n, /*strictly_causal=*/true);
  for (int i = 1; i <= horizon; ++i) {
    op.set_block(i, 1, MatrixXd::Identity(n, n));
  }
  return op;
}

BltOperator BltOperator::block_diagonal(const std::vector<MatrixXd>& diag) {
  if (diag.empty()) throw std::invalid_argument("block_diagonal: empty list");
  const int T = static_cast<int>(diag.size()) - 1;
  BltOperator op(T, static_cast<int>(diag[0].rows()),
                 static_cast<int>(diag[0].cols()));
  for (int i = 0; i <= T; ++i) {
    op.set_block(i, 0, diag[i]);
  }
  return op;
}

bool BltOperator::has_block(int row, int delay) const {
  return blocks_.count({row, delay}) > 0;
}

MatrixXd BltOperator::block(int row, int delay) const {
  auto it = blocks_.find({row, delay});
  if (it == blocks_.end()) return MatrixXd::Zero(p_, q_);
  return it->second;
}

void BltOperator::set_block(int row, int delay, MatrixXd value) {
  check_index(row, delay);
  if (value.rows() != p_ || value.cols() != q_) {
    throw std::invalid_argument(
        "BltOperator: block (" + std::to_string(row) + "," +
        std::to_string(delay) + ") has shape " + std::to_string(value.rows()) +
        "x" + std::to_string(value.cols()) + ", expected " +
        std::to_string(p_) + "x" + std::to_string(q_));
  }
  blocks_[{row, delay}] = std::move(value);
}

BltOperator BltOperator::multiply(const BltOperator& rhs) const {
  if (horizon_ != rhs.horizon_ || q_ != rhs.p_) {
    throw std::invalid_argument("BltOperator::multiply: dimension mismatch");
  }
  BltOperator out(horizon_, p_, rhs.q_,
                  strictly_causal_ || rhs.strictly_causal_);
  // (AB)(i, c) over dense columns c: sum_j A(i, j) B(j, c), c <= j <= i.
  for (const auto& [aidx, ablk] : blocks_) {
    const int i = aidx.first;
    const int j = i - aidx.second;  // dense column of A == dense row of B
    for (const auto& [bidx, bblk] : rhs.blocks_) {
      if (bidx.first != j) continue;
      const int c = j - bidx.second;
      const int delay = i - c;
      auto key = std::make_pair(i, delay);
      auto it = out.blocks_.find(key);
      if (it == out.blocks_.end()) {
        out.blocks_.emplace(key, ablk * bblk);
      } else {
        it->second += ablk * bblk;
      }
    }
  }
  return out;
}

BltOperator BltOperator::add(const BltOperator& rhs) const {
  if (!same_shape(rhs)) {
    throw std::invalid_argument("BltOperator::add: shape mismatch");
  }
  BltOperator out = *this;
  out.strictly_causal_ = strictly_causal_ && rhs.strictly_causal_;
  for (const auto& [idx, blk] : rhs.blocks_) {
    auto it = out.blocks_.find(idx);
    if (it == out.blocks_.end()) {
      out.blocks_.emplace(idx, blk);
    } else {
      it->second += blk;
    }
  }
  return out;
}

BltOperator BltOperator::subtract(const BltOperator& rhs) const {
  return add(rhs.scale(-1.0));
}

BltOperator BltOperator::scale(double a) const {
  BltOperator out = *this;
  for (auto& [idx, blk] : out.blocks_) blk *= a;
  return out;
}

BltOperator BltOperator::pow(int k) const {
  if (p_ != q_) throw std::invalid_argument("BltOperator::pow: not square");
  if (k < 0) throw std::invalid_argument("BltOperator::pow: negative power");
  BltOperator result = identity(horizon_, p_);
  BltOperator base = *this;
  while (k > 0) {
    if (k & 1) result = result.multiply(base);
    base = base.multiply(base);
    k >>= 1;
  }
  return result;
}

BltOperator BltOperator::inverse() const {
  if (p_ != q_) {
    throw std::invalid_argument("BltOperator::inverse: blocks not square");
  }
  // Factor each diagonal block once; forward substitution per dense column.
  std::vector<Eigen::FullPivLU<MatrixXd>> diag_lu;
  diag_lu.reserve(horizon_ + 1);
  for (int i = 0; i <= horizon_; ++i) {
    MatrixXd d = block(i, 0);
    Eigen::JacobiSVD<MatrixXd> svd(d);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (smin <= 0.0 || smax / smin > 1e12) {
      throw SingularBlockError(
          i, "BltOperator::inverse: singular diagonal block at row " +
                 std::to_string(i));
    }
    diag_lu.emplace_back(d);
  }
  BltOperator inv(horizon_, p_, q_);
  for (int c = 0; c <= horizon_; ++c) {
    inv.set_block(c, 0, diag_lu[c].inverse());
    for (int i = c + 1; i <= horizon_; ++i) {
      MatrixXd acc = MatrixXd::Zero(p_, q_);
      for (int j = c; j < i; ++j) {
        if (!has_block(i, i - j)) continue;
        acc.noalias() += block(i, i - j) * inv.block(j, j - c);
      }
      if (acc.isZero(0.0)) continue;
      inv.set_block(i, i - c, diag_lu[i].solve(-acc));
    }
  }
  return inv;
}

double BltOperator::induced_inf_norm() const {
  // Row sums accumulate across the delays present in each block row.
  std::vector<double> row_sums(dense_rows(), 0.0);
  for (const auto& [idx, blk] : blocks_) {
    const int base = idx.first * p_;
    for (int r = 0; r < p_; ++r) {
      row_sums[base + r] += blk.row(r).cwiseAbs().sum();
    }
  }
  double m = 0.0;
  for (double s : row_sums) m = std::max(m, s);
  return m;
}

MatrixXd BltOperator::to_dense() const {
  MatrixXd dense = MatrixXd::Zero(dense_rows(), dense_cols());
  for (const auto& [idx, blk] : blocks_) {
    const int i = idx.first;
    const int c = i - idx.second;
    dense.block(i * p_, c * q_, p_, q_) = blk;
  }
  return dense;
}

VectorXd BltOperator::apply(const VectorXd& w) const {
  if (w.size() != dense_cols()) {
    throw std::invalid_argument("BltOperator::apply: vector length mismatch");
  }
  VectorXd y = VectorXd::Zero(dense_rows());
  for (const auto& [idx, blk] : blocks_) {
    const int i = idx.first;
    const int c = i - idx.second;
    y.segment(i * p_, p_).noalias() += blk * w.segment(c * q_, q_);
  }
  return y;
}

BltOperator BltOperator::hcat(const BltOperator& rhs) const {
  if (horizon_ != rhs.horizon_ || p_ != rhs.p_) {
    throw std::invalid_argument("BltOperator::hcat: shape mismatch");
  }
  BltOperator out(horizon_, p_, q_ + rhs.q_,
                  strictly_causal_ && rhs.strictly_causal_);
  for (int i = 0; i <= horizon_; ++i) {
    for (int k = 0; k <= i; ++k) {
      if (!has_block(i, k) && !rhs.has_block(i, k)) continue;
      MatrixXd blk(p_, q_ + rhs.q_);
      blk << block(i, k), rhs.block(i, k);
      out.set_block(i, k, blk);
    }
  }
  return out;
}

BltOperator BltOperator::vcat(const BltOperator& rhs) const {
  if (horizon_ != rhs.horizon_ || q_ != rhs.q_) {
    throw std::invalid_argument("BltOperator::vcat: shape mismatch");
  }
  BltOperator out(horizon_, p_ + rhs.p_, q_,
                  strictly_causal_ && rhs.strictly_causal_);
  for (int i = 0; i <= horizon_; ++i) {
    for (int k = 0; k <= i; ++k) {
      if (!has_block(i, k) && !rhs.has_block(i, k)) continue;
      MatrixXd blk(p_ + rhs.p_, q_);
      blk << block(i, k), rhs.block(i, k);
      out.set_block(i, k, blk);
    }
  }
  return out;
}

SignalTrajectory::SignalTrajectory(int horizon, int block_dim_, Role role_)
    : stacked(VectorXd::Zero((horizon + 1) * block_dim_)),
      block_dim(block_dim_), role(role_) {}

Eigen::VectorBlock<VectorXd> SignalTrajectory::block(int t) {
  return stacked.segment(t * block_dim, block_dim);
}

VectorXd SignalTrajectory::block(int t) const {
  return stacked.segment(t * block_dim, block_dim);
}

void SignalTrajectory::set_block(int t, const VectorXd& v) {
  stacked.segment(t * block_dim, block_dim) = v;
}

MatrixXd ColumnPartition::reassemble() const {
  MatrixXd dense(first_block_col.rows(),
                 first_block_col.cols() + remainder.cols());
  dense << first_block_col, remainder;
  return dense;
}

ColumnPartition split_columns(const BltOperator& op) {
  ColumnPartition part;
  part.horizon = op.horizon();
  part.block_rows = op.block_rows();
  part.block_cols = op.block_cols();
  const MatrixXd dense = op.to_dense();
  part.first_block_col = dense.leftCols(op.block_cols());
  part.remainder = dense.rightCols(dense.cols() - op.block_cols());
  return part;
}

}  // namespace slsmpc
