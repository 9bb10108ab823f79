#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "slsmpc/blt.hpp"
#include "slsmpc/sampling.hpp"
#include "test_util.hpp"

using namespace slsmpc;
using test::random_blt;

TEST_CASE("construction from blocks and dense layout") {
  BltOperator::BlockMap blocks;
  blocks[{0, 0}] = MatrixXd::Constant(1, 1, 1.0);
  blocks[{1, 0}] = MatrixXd::Constant(1, 1, 2.0);
  blocks[{1, 1}] = MatrixXd::Constant(1, 1, 3.0);
  BltOperator op = BltOperator::from_blocks(blocks, 1, 1, 1);
  MatrixXd dense(2, 2);
  dense << 1, 0, 3, 2;
  CHECK((op.to_dense() - dense).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("empty block map is the zero operator") {
  BltOperator op = BltOperator::from_blocks({}, 2, 2, 3);
  CHECK(op.to_dense().cwiseAbs().maxCoeff() == 0.0);
  CHECK(op.induced_inf_norm() == 0.0);
}

TEST_CASE("acausal or misshaped blocks are rejected") {
  BltOperator::BlockMap bad;
  bad[{0, 1}] = MatrixXd::Zero(1, 1);
  CHECK_THROWS_AS(BltOperator::from_blocks(bad, 1, 1, 1),
                  std::invalid_argument);
  BltOperator::BlockMap wrong;
  wrong[{1, 0}] = MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(BltOperator::from_blocks(wrong, 1, 1, 1),
                  std::invalid_argument);
  BltOperator strict(2, 1, 1, /*strictly_causal=*/true);
  CHECK_THROWS_AS(strict.set_block(1, 0, MatrixXd::Zero(1, 1)),
                  std::invalid_argument);
}

TEST_CASE("downshift structure and action") {
  BltOperator Z = BltOperator::downshift(1, 2);
  MatrixXd dense(4, 4);
  dense.setZero();
  dense.block(2, 0, 2, 2) = MatrixXd::Identity(2, 2);
  CHECK((Z.to_dense() - dense).cwiseAbs().maxCoeff() == 0.0);

  VectorXd w(4);
  w << 5, 6, 7, 8;  // [x0; w0]
  VectorXd shifted = Z.apply(w);
  CHECK(shifted(0) == 0.0);
  CHECK(shifted(1) == 0.0);
  CHECK(shifted(2) == 5.0);
  CHECK(shifted(3) == 6.0);
}

TEST_CASE("downshift is nilpotent after T+1 applications") {
  for (int T : {1, 3, 5}) {
    BltOperator Z = BltOperator::downshift(T, 2);
    BltOperator P = Z.pow(T + 1);
    CHECK(P.blocks().empty());
  }
}

TEST_CASE("multiplication by block identity") {
  Rng rng(7);
  BltOperator A = random_blt(3, 2, 2, rng);
  BltOperator I = BltOperator::identity(3, 2);
  CHECK(((A * I).to_dense() - A.to_dense()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(((I * A).to_dense() - A.to_dense()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("strictly causal products lose low delays") {
  Rng rng(11);
  BltOperator A = random_blt(4, 2, 2, rng, true);
  BltOperator B = random_blt(4, 2, 2, rng, true);
  BltOperator P = A * B;
  for (const auto& [idx, blk] : P.blocks()) {
    CHECK(idx.second >= 2);
  }
}

TEST_CASE("strictly causal operators are nilpotent over the horizon") {
  Rng rng(13);
  for (int T : {1, 2, 4}) {
    BltOperator N = random_blt(T, 2, 2, rng, true);
    CHECK(N.pow(T + 1).blocks().empty());
  }
}

TEST_CASE("inverse of identity and Neumann series") {
  BltOperator I = BltOperator::identity(3, 2);
  CHECK(((I.inverse() - I).to_dense()).cwiseAbs().maxCoeff() == 0.0);

  Rng rng(17);
  BltOperator N = random_blt(3, 2, 2, rng, true);
  BltOperator sum = BltOperator::identity(3, 2);
  BltOperator Nk = N;
  for (int k = 1; k <= 3; ++k) {
    sum = sum + Nk;
    Nk = Nk * N;
  }
  BltOperator inv = (I - N).inverse();
  CHECK(((inv - sum).to_dense()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("inverse round trips") {
  Rng rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    const int T = 1 + rng.uniform_int(4);
    BltOperator A = random_blt(T, 2, 2, rng);
    for (int i = 0; i <= T; ++i) {
      A.set_block(i, 0, A.block(i, 0) + 3.0 * MatrixXd::Identity(2, 2));
    }
    BltOperator inv = A.inverse();
    BltOperator I = BltOperator::identity(T, 2);
    CHECK(((A * inv - I).to_dense()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(((inv.inverse() - A).to_dense()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("singular diagonal block reports its row") {
  BltOperator A = BltOperator::identity(2, 2);
  A.set_block(1, 0, MatrixXd::Zero(2, 2));
  try {
    A.inverse();
    FAIL("expected SingularBlockError");
  } catch (const SingularBlockError& e) {
    CHECK(e.block_row == 1);
  }
}

TEST_CASE("induced infinity norm") {
  CHECK(BltOperator::identity(3, 2).induced_inf_norm() == 1.0);
  BltOperator::BlockMap blocks;
  MatrixXd M(2, 2);
  M << 1, -2, 3, 0;
  blocks[{0, 0}] = M;
  BltOperator op = BltOperator::from_blocks(blocks, 0, 2, 2);
  CHECK(op.induced_inf_norm() == doctest::Approx(3.0));
  CHECK(BltOperator::zero(2, 2, 2).induced_inf_norm() == 0.0);
}

TEST_CASE("column split and exact reassembly") {
  BltOperator::BlockMap blocks;
  blocks[{0, 0}] = MatrixXd::Constant(1, 1, 2.0);
  blocks[{1, 1}] = MatrixXd::Constant(1, 1, 4.0);
  blocks[{1, 0}] = MatrixXd::Constant(1, 1, 5.0);
  BltOperator op = BltOperator::from_blocks(blocks, 1, 1, 1);
  ColumnPartition part = split_columns(op);
  CHECK(part.first_block_col(0, 0) == 2.0);
  CHECK(part.first_block_col(1, 0) == 4.0);
  CHECK(part.remainder(0, 0) == 0.0);
  CHECK(part.remainder(1, 0) == 5.0);
  CHECK((part.reassemble() - op.to_dense()).cwiseAbs().maxCoeff() == 0.0);

  Rng rng(23);
  BltOperator R = random_blt(4, 2, 3, rng);
  CHECK((split_columns(R).reassemble() - R.to_dense()).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("shifted uncertainty has an empty first block row") {
  Rng rng(29);
  BltOperator dA = random_blt(3, 2, 2, rng);
  BltOperator dB = random_blt(3, 2, 1, rng);
  BltOperator delta = BltOperator::downshift(3, 2) * dA.hcat(dB);
  CHECK(delta.strictly_causal());
  for (const auto& [idx, blk] : delta.blocks()) {
    CHECK(idx.first >= 1);
  }
  // first block row of the dense realization is zero
  CHECK(delta.to_dense().topRows(2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("property: BLT algebra closure and dense consistency") {
  Rng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    const int T = 1 + rng.uniform_int(5);
    const int p = 1 + rng.uniform_int(2);
    const int q = 1 + rng.uniform_int(2);
    BltOperator A = random_blt(T, p, q, rng);
    BltOperator B = random_blt(T, q, p, rng);
    const MatrixXd prod = A.to_dense() * B.to_dense();
    CHECK(((A * B).to_dense() - prod).cwiseAbs().maxCoeff() < 1e-12);
    BltOperator C = random_blt(T, p, q, rng);
    CHECK(((A + C).to_dense() - (A.to_dense() + C.to_dense()))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
    // products stay block-lower-triangular
    const MatrixXd dense = (A * B).to_dense();
    for (int i = 0; i <= T; ++i) {
      for (int j = i + 1; j <= T; ++j) {
        CHECK(dense.block(i * p, j * p, p, p).cwiseAbs().maxCoeff() == 0.0);
      }
    }
  }
}

TEST_CASE("property: induced norm submultiplicativity") {
  Rng rng(37);
  for (int trial = 0; trial < 25; ++trial) {
    const int T = 1 + rng.uniform_int(5);
    BltOperator A = random_blt(T, 2, 2, rng);
    BltOperator B = random_blt(T, 2, 2, rng);
    CHECK((A * B).induced_inf_norm() <=
          A.induced_inf_norm() * B.induced_inf_norm() + 1e-9);
  }
}

TEST_CASE("property: inverse consistency with dense inverse") {
  Rng rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const int T = 1 + rng.uniform_int(4);
    BltOperator A = random_blt(T, 2, 2, rng);
    for (int i = 0; i <= T; ++i) {
      A.set_block(i, 0, A.block(i, 0) + 4.0 * MatrixXd::Identity(2, 2));
    }
    const MatrixXd dense_inv = A.to_dense().inverse();
    CHECK((A.inverse().to_dense() - dense_inv).cwiseAbs().maxCoeff() < 1e-9);
  }
}
