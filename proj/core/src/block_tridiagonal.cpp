#include "bms/block_tridiagonal.hpp"

#include "bms/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace bms {

namespace {

// Small blocks (the common case of a handful of states) go through plain
// loops: Eigen's dynamic-size kernels spend more on dispatch than on flops.
constexpr int kSmallBlock = 8;

// In-place lower Cholesky of a column-major n x n block; false on a
// non-positive pivot.
bool small_llt(double* a, int n) {
  for (int j = 0; j < n; ++j) {
    double d = a[j + j * n];
    for (int k = 0; k < j; ++k) d -= a[j + k * n] * a[j + k * n];
    if (!(d > 0.0)) return false;
    d = std::sqrt(d);
    a[j + j * n] = d;
    for (int i = j + 1; i < n; ++i) {
      double v = a[i + j * n];
      for (int k = 0; k < j; ++k) v -= a[i + k * n] * a[j + k * n];
      a[i + j * n] = v / d;
    }
  }
  return true;
}

// w <- w L^{-T}, i.e. solve X L^T = w row by row.
void small_right_solve_lt(const double* l, double* w, int n) {
  for (int r = 0; r < n; ++r) {
    for (int j = 0; j < n; ++j) {
      double v = w[r + j * n];
      for (int k = 0; k < j; ++k) v -= w[r + k * n] * l[j + k * n];
      w[r + j * n] = v / l[j + j * n];
    }
  }
}

// d -= w w^T (lower triangle only)
void small_sub_wwt(double* d, const double* w, int n) {
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i) {
      double v = 0.0;
      for (int k = 0; k < n; ++k) v += w[i + k * n] * w[j + k * n];
      d[i + j * n] -= v;
    }
}

}  // namespace

BlockTridiagonal::BlockTridiagonal(int blocks, int block_size) : n_(block_size), blocks_(blocks) {
  require(blocks >= 1 && block_size >= 1, "block tridiagonal: empty shape");
  diag_ = Matrix::Zero(n_, blocks * n_);
  lower_ = Matrix::Zero(n_, (blocks - 1) * n_);
}

Matrix BlockTridiagonal::dense() const {
  Matrix out = Matrix::Zero(size(), size());
  for (int k = 0; k < blocks(); ++k) out.block(k * n_, k * n_, n_, n_) = diag(k);
  for (int k = 0; k + 1 < blocks(); ++k) {
    out.block((k + 1) * n_, k * n_, n_, n_) = lower(k);
    out.block(k * n_, (k + 1) * n_, n_, n_) = lower(k).transpose();
  }
  return out;
}

Vector BlockTridiagonal::multiply(const Vector& x) const {
  require(x.size() == size(), "block tridiagonal: vector size mismatch");
  Vector y(size());
  if (n_ <= kSmallBlock) {
    const int n = n_;
    const double* xp = x.data();
    for (int k = 0; k < blocks_; ++k) {
      double* yk = y.data() + k * n;
      const double* d = diag_.data() + k * n * n;
      const double* xk = xp + k * n;
      for (int i = 0; i < n; ++i) yk[i] = 0.0;
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) yk[i] += d[i + j * n] * xk[j];
      if (k > 0) {
        const double* l = lower_.data() + (k - 1) * n * n;
        for (int j = 0; j < n; ++j)
          for (int i = 0; i < n; ++i) yk[i] += l[i + j * n] * xk[j - n];
      }
      if (k + 1 < blocks_) {
        const double* l = lower_.data() + k * n * n;
        for (int i = 0; i < n; ++i) {
          double v = 0.0;
          for (int j = 0; j < n; ++j) v += l[j + i * n] * xk[n + j];
          yk[i] += v;
        }
      }
    }
    return y;
  }
  for (int k = 0; k < blocks(); ++k) {
    auto yk = y.segment(k * n_, n_);
    yk.noalias() = diag(k) * x.segment(k * n_, n_);
    if (k > 0) yk.noalias() += lower(k - 1) * x.segment((k - 1) * n_, n_);
    if (k + 1 < blocks()) yk.noalias() += lower(k).transpose() * x.segment((k + 1) * n_, n_);
  }
  return y;
}

BlockTridiagonalCholesky::BlockTridiagonalCholesky(const BlockTridiagonal& m)
    : n_(m.block_size()), blocks_(m.blocks()) {
  diag_.resize(n_, blocks_ * n_);
  coupling_.resize(n_, (blocks_ - 1) * n_);
  for (int k = 0; k < blocks_; ++k) {
    auto d = diag_.middleCols(k * n_, n_);
    d = m.diag(k);
    if (n_ <= kSmallBlock) {
      double* dp = d.data();
      if (k > 0) {
        auto w = coupling_.middleCols((k - 1) * n_, n_);
        w = m.lower(k - 1);
        small_right_solve_lt(diag_.middleCols((k - 1) * n_, n_).data(), w.data(), n_);
        small_sub_wwt(dp, w.data(), n_);
      }
      if (small_llt(dp, n_)) continue;
      fail_at(m, k);
    }
    if (k > 0) {
      // W = lower(k-1) L_{k-1}^{-T}
      auto w = coupling_.middleCols((k - 1) * n_, n_);
      w = m.lower(k - 1);
      diag_.middleCols((k - 1) * n_, n_).triangularView<Eigen::Lower>().transpose().solveInPlace<Eigen::OnTheRight>(w);
      d.noalias() -= w * w.transpose();
    }
    Eigen::Ref<Matrix> dref(d);
    Eigen::LLT<Eigen::Ref<Matrix>> llt(dref);
    if (llt.info() != Eigen::Success) fail_at(m, k);
  }
}

void BlockTridiagonalCholesky::fail_at(const BlockTridiagonal& m, int k) const {
  // Refactor the Schur complement densely to name the pivot.
  Matrix s = m.diag(k);
  if (k > 0) {
    auto w = coupling_.middleCols((k - 1) * n_, n_);
    s.noalias() -= w * w.transpose();
  }
  int pivot = k * n_;
  try {
    Cholesky probe(0.5 * (s + s.transpose()));
  } catch (const ConditioningError& e) {
    pivot += e.pivot();
  }
  throw ConditioningError("block cholesky: non-positive pivot at index " + std::to_string(pivot), pivot,
                          std::numeric_limits<double>::infinity());
}

Vector BlockTridiagonalCholesky::solve(const Vector& b) const {
  require(b.size() == blocks_ * n_, "block cholesky: rhs size mismatch");
  Vector x = b;
  if (n_ <= kSmallBlock) {
    double* xp = x.data();
    const int n = n_;
    for (int k = 0; k < blocks_; ++k) {
      double* xk = xp + k * n;
      if (k > 0) {
        const double* w = coupling_.data() + (k - 1) * n * n;
        const double* xprev = xk - n;
        for (int j = 0; j < n; ++j)
          for (int i = 0; i < n; ++i) xk[i] -= w[i + j * n] * xprev[j];
      }
      const double* l = diag_.data() + k * n * n;
      for (int i = 0; i < n; ++i) {
        double v = xk[i];
        for (int j = 0; j < i; ++j) v -= l[i + j * n] * xk[j];
        xk[i] = v / l[i + i * n];
      }
    }
    for (int k = blocks_ - 1; k >= 0; --k) {
      double* xk = xp + k * n;
      if (k + 1 < blocks_) {
        const double* w = coupling_.data() + k * n * n;
        const double* xnext = xk + n;
        for (int j = 0; j < n; ++j) {
          double v = 0.0;
          for (int i = 0; i < n; ++i) v += w[i + j * n] * xnext[i];
          xk[j] -= v;
        }
      }
      const double* l = diag_.data() + k * n * n;
      for (int i = n - 1; i >= 0; --i) {
        double v = xk[i];
        for (int j = i + 1; j < n; ++j) v -= l[j + i * n] * xk[j];
        xk[i] = v / l[i + i * n];
      }
    }
    return x;
  }
  for (int k = 0; k < blocks_; ++k) {
    auto xk = x.segment(k * n_, n_);
    if (k > 0) xk.noalias() -= coupling_.middleCols((k - 1) * n_, n_) * x.segment((k - 1) * n_, n_);
    diag_.middleCols(k * n_, n_).triangularView<Eigen::Lower>().solveInPlace(xk);
  }
  for (int k = blocks_ - 1; k >= 0; --k) {
    auto xk = x.segment(k * n_, n_);
    if (k + 1 < blocks_) xk.noalias() -= coupling_.middleCols(k * n_, n_).transpose() * x.segment((k + 1) * n_, n_);
    diag_.middleCols(k * n_, n_).triangularView<Eigen::Lower>().transpose().solveInPlace(xk);
  }
  return x;
}

}  // namespace bms
