#pragma once

#include <algorithm>
#include <complex>
#include <memory>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "mxdd/mesh.hpp"

namespace mxdd {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;
using DenseMatrix = Eigen::MatrixXcd;

template <class T>
struct Triplet {
  Index row;
  Index col;
  T value;
};

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row.
template <class T>
class CsrMatrix {
 public:
  using value_type = T;

  CsrMatrix() = default;
  CsrMatrix(Index rows, Index cols, std::vector<Index> row_ptr, std::vector<Index> col_idx,
            std::vector<T> values)
      : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)),
        values_(std::move(values)) {
    validate();
  }

  /// Duplicates are summed in insertion order, so the result depends only on
  /// the triplet sequence.
  static CsrMatrix from_triplets(Index rows, Index cols, std::vector<Triplet<T>> trips) {
    for (const auto& t : trips)
      if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
        throw std::out_of_range("CsrMatrix::from_triplets: index out of range");
    std::stable_sort(trips.begin(), trips.end(), [](const Triplet<T>& a, const Triplet<T>& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<Index> ptr(static_cast<std::size_t>(rows + 1), 0);
    std::vector<Index> col;
    std::vector<T> val;
    col.reserve(trips.size());
    val.reserve(trips.size());
    for (std::size_t i = 0; i < trips.size();) {
      std::size_t j = i;
      T sum = trips[i].value;
      ++j;
      while (j < trips.size() && trips[j].row == trips[i].row && trips[j].col == trips[i].col)
        sum += trips[j++].value;
      col.push_back(trips[i].col);
      val.push_back(sum);
      ++ptr[trips[i].row + 1];
      i = j;
    }
    std::partial_sum(ptr.begin(), ptr.end(), ptr.begin());
    return CsrMatrix(rows, cols, std::move(ptr), std::move(col), std::move(val));
  }

  static CsrMatrix identity(Index n) {
    std::vector<Index> ptr(static_cast<std::size_t>(n + 1));
    std::iota(ptr.begin(), ptr.end(), Index{0});
    std::vector<Index> col(static_cast<std::size_t>(n));
    std::iota(col.begin(), col.end(), Index{0});
    return CsrMatrix(n, n, std::move(ptr), std::move(col), std::vector<T>(n, T(1)));
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index nnz() const { return static_cast<Index>(values_.size()); }
  const std::vector<Index>& row_ptr() const { return row_ptr_; }
  const std::vector<Index>& col_idx() const { return col_idx_; }
  const std::vector<T>& values() const { return values_; }

  /// Stored value at (i, j), or zero.
  T at(Index i, Index j) const {
    const auto b = col_idx_.begin() + row_ptr_[i];
    const auto e = col_idx_.begin() + row_ptr_[i + 1];
    const auto it = std::lower_bound(b, e, j);
    return (it != e && *it == j) ? values_[static_cast<std::size_t>(it - col_idx_.begin())] : T(0);
  }

  /// y = A x, summing each row left to right.
  template <class X, class Y>
  void multiply(std::span<const X> x, std::span<Y> y) const {
    if (static_cast<Index>(x.size()) != cols_ || static_cast<Index>(y.size()) != rows_)
      throw std::invalid_argument("CsrMatrix::multiply: dimension mismatch");
    for (Index i = 0; i < rows_; ++i) {
      Y s{};
      for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += values_[p] * x[col_idx_[p]];
      y[i] = s;
    }
  }

  CsrMatrix transpose() const {
    std::vector<Index> ptr(static_cast<std::size_t>(cols_ + 1), 0);
    for (Index c : col_idx_) ++ptr[c + 1];
    std::partial_sum(ptr.begin(), ptr.end(), ptr.begin());
    std::vector<Index> next(ptr.begin(), ptr.end() - 1);
    std::vector<Index> col(col_idx_.size());
    std::vector<T> val(values_.size());
    for (Index i = 0; i < rows_; ++i)
      for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
        const Index q = next[col_idx_[p]]++;
        col[q] = i;
        val[q] = values_[p];
      }
    return CsrMatrix(cols_, rows_, std::move(ptr), std::move(col), std::move(val));
  }

  template <class U>
  CsrMatrix<U> cast() const {
    std::vector<U> v(values_.begin(), values_.end());
    return CsrMatrix<U>(rows_, cols_, row_ptr_, col_idx_, std::move(v));
  }

  DenseMatrix to_dense() const {
    DenseMatrix d = DenseMatrix::Zero(rows_, cols_);
    for (Index i = 0; i < rows_; ++i)
      for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) d(i, col_idx_[p]) = values_[p];
    return d;
  }

 private:
  void validate() const {
    if (rows_ < 0 || cols_ < 0 || static_cast<Index>(row_ptr_.size()) != rows_ + 1 ||
        row_ptr_.front() != 0 || row_ptr_.back() != static_cast<Index>(col_idx_.size()) ||
        col_idx_.size() != values_.size())
      throw std::invalid_argument("CsrMatrix: inconsistent storage");
    for (Index i = 0; i < rows_; ++i)
      for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
        if (col_idx_[p] < 0 || col_idx_[p] >= cols_)
          throw std::invalid_argument("CsrMatrix: column index out of range");
        if (p > row_ptr_[i] && col_idx_[p] <= col_idx_[p - 1])
          throw std::invalid_argument("CsrMatrix: columns not strictly increasing");
      }
  }

  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> row_ptr_{0};
  std::vector<Index> col_idx_;
  std::vector<T> values_;
};

using SparseRealMatrix = CsrMatrix<double>;
using SparseComplexMatrix = CsrMatrix<Complex>;

CVector spmv(const SparseComplexMatrix& a, std::span<const Complex> x);
CVector spmv(const SparseRealMatrix& a, std::span<const Complex> x);

/// C = A B (Gustavson, columns sorted per row).
template <class TA, class TB>
auto sparse_multiply(const CsrMatrix<TA>& a, const CsrMatrix<TB>& b)
    -> CsrMatrix<std::common_type_t<TA, TB>> {
  using T = std::common_type_t<TA, TB>;
  if (a.cols() != b.rows()) throw std::invalid_argument("sparse_multiply: dimension mismatch");
  std::vector<Index> ptr(static_cast<std::size_t>(a.rows() + 1), 0);
  std::vector<Index> col;
  std::vector<T> val;
  std::vector<Index> marker(static_cast<std::size_t>(b.cols()), -1);
  std::vector<T> acc(static_cast<std::size_t>(b.cols()), T(0));
  std::vector<Index> row_cols;
  for (Index i = 0; i < a.rows(); ++i) {
    row_cols.clear();
    for (Index p = a.row_ptr()[i]; p < a.row_ptr()[i + 1]; ++p) {
      const Index k = a.col_idx()[p];
      const TA av = a.values()[p];
      for (Index q = b.row_ptr()[k]; q < b.row_ptr()[k + 1]; ++q) {
        const Index j = b.col_idx()[q];
        if (marker[j] != i) {
          marker[j] = i;
          acc[j] = T(0);
          row_cols.push_back(j);
        }
        acc[j] += static_cast<T>(av) * static_cast<T>(b.values()[q]);
      }
    }
    std::sort(row_cols.begin(), row_cols.end());
    for (Index j : row_cols) {
      col.push_back(j);
      val.push_back(acc[j]);
    }
    ptr[i + 1] = static_cast<Index>(col.size());
  }
  return CsrMatrix<T>(a.rows(), b.cols(), std::move(ptr), std::move(col), std::move(val));
}

/// alpha A + beta B, patterns merged.
template <class T>
CsrMatrix<T> sparse_add(T alpha, const CsrMatrix<T>& a, T beta, const CsrMatrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("sparse_add: dimension mismatch");
  std::vector<Index> ptr(static_cast<std::size_t>(a.rows() + 1), 0);
  std::vector<Index> col;
  std::vector<T> val;
  for (Index i = 0; i < a.rows(); ++i) {
    Index p = a.row_ptr()[i], q = b.row_ptr()[i];
    const Index pe = a.row_ptr()[i + 1], qe = b.row_ptr()[i + 1];
    while (p < pe || q < qe) {
      const Index cp = p < pe ? a.col_idx()[p] : a.cols();
      const Index cq = q < qe ? b.col_idx()[q] : b.cols();
      if (cp < cq) {
        col.push_back(cp);
        val.push_back(alpha * a.values()[p++]);
      } else if (cq < cp) {
        col.push_back(cq);
        val.push_back(beta * b.values()[q++]);
      } else {
        col.push_back(cp);
        val.push_back(alpha * a.values()[p++] + beta * b.values()[q++]);
      }
    }
    ptr[i + 1] = static_cast<Index>(col.size());
  }
  return CsrMatrix<T>(a.rows(), a.cols(), std::move(ptr), std::move(col), std::move(val));
}

/// Boolean restriction matrix: row r selects global index indices[r].
SparseRealMatrix selection_matrix(std::span<const Index> indices, Index n);

/// R A R^T for a general real R (e.g. the coarse restriction).
SparseComplexMatrix triple_product(const SparseRealMatrix& r, const SparseComplexMatrix& a,
                                   const SparseRealMatrix& rt);

/// R A R^T for a boolean R given by its selected indices: the index minor.
SparseComplexMatrix principal_minor(const SparseComplexMatrix& a, std::span<const Index> indices);

/// Factored dense complex matrix, P A = L U.
class DenseLU {
 public:
  Index size() const { return n_; }
  CVector solve(std::span<const Complex> b) const;
  DenseMatrix solve(const DenseMatrix& b) const;
  const DenseMatrix& packed_lu() const { return lu_.matrixLU(); }
  Eigen::PermutationMatrix<Eigen::Dynamic> permutation() const { return lu_.permutationP(); }

 private:
  friend DenseLU lu_factor(const DenseMatrix&, const std::string&, double);
  Index n_ = 0;
  Eigen::PartialPivLU<DenseMatrix> lu_;
};

/// Raised when a pivot falls below pivot_tol relative to the largest entry.
class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

DenseLU lu_factor(const DenseMatrix& a, const std::string& context = "matrix",
                  double pivot_tol = 1e-14);
CVector lu_solve(const DenseLU& lu, std::span<const Complex> b);

/// <x, y>_D = y^* D x for real symmetric positive definite D.
Complex weighted_dot(const SparseRealMatrix& d, std::span<const Complex> x,
                     std::span<const Complex> y);
double weighted_norm(const SparseRealMatrix& d, std::span<const Complex> x);

/// Plain y^* x with left-to-right summation.
Complex dot(std::span<const Complex> x, std::span<const Complex> y);
double norm2(std::span<const Complex> x);

/// Direct solver for a sparse complex system: dense LU for small matrices,
/// supernodal sparse LU otherwise.
class DirectSolver {
 public:
  enum class Backend { automatic, dense, sparse };

  DirectSolver(const SparseComplexMatrix& a, const std::string& context,
               Backend backend = Backend::automatic, Index dense_limit = 400);
  ~DirectSolver();
  DirectSolver(DirectSolver&&) noexcept;
  DirectSolver& operator=(DirectSolver&&) noexcept;

  Index size() const { return n_; }
  Backend backend() const { return backend_; }
  void solve_in_place(std::span<Complex> x) const;
  CVector solve(std::span<const Complex> b) const;

 private:
  struct SparseImpl;
  Index n_ = 0;
  Backend backend_ = Backend::dense;
  DenseLU dense_;
  std::unique_ptr<SparseImpl> sparse_;
};

}  // namespace mxdd
