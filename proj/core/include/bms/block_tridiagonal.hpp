#pragma once

#include "bms/linalg.hpp"

namespace bms {

// Symmetric block-tridiagonal matrix with `blocks` square diagonal blocks of
// size `block_size`. lower(k) is the block at (k+1, k); the upper blocks are
// its transposes.
class BlockTridiagonal {
 public:
  BlockTridiagonal() = default;
  BlockTridiagonal(int blocks, int block_size);

  int block_size() const { return n_; }
  int size() const { return blocks() * n_; }

  int blocks() const { return blocks_; }
  auto diag(int k) { return diag_.middleCols(k * n_, n_); }
  auto diag(int k) const { return diag_.middleCols(k * n_, n_); }
  auto lower(int k) { return lower_.middleCols(k * n_, n_); }
  auto lower(int k) const { return lower_.middleCols(k * n_, n_); }

  Matrix dense() const;
  Vector multiply(const Vector& x) const;

 private:
  int n_ = 0;
  int blocks_ = 0;
  // blocks side by side: n x (blocks * n) and n x ((blocks - 1) * n)
  Matrix diag_;
  Matrix lower_;
};

// Block Cholesky: O(N n^3) instead of O(N^3 n^3) for the dense factorization.
class BlockTridiagonalCholesky {
 public:
  explicit BlockTridiagonalCholesky(const BlockTridiagonal& m);
  Vector solve(const Vector& b) const;
  int block_size() const { return n_; }

 private:
  [[noreturn]] void fail_at(const BlockTridiagonal& m, int k) const;

  int n_;
  int blocks_;
  Matrix diag_;      // lower Cholesky factors of the Schur complements
  Matrix coupling_;  // (k+1, k) blocks of the factor
};

}  // namespace bms
