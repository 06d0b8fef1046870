#include "mxdd/linalg.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace mxdd {

CVector spmv(const SparseComplexMatrix& a, std::span<const Complex> x) {
  CVector y(static_cast<std::size_t>(a.rows()));
  a.multiply<Complex, Complex>(x, y);
  return y;
}

CVector spmv(const SparseRealMatrix& a, std::span<const Complex> x) {
  CVector y(static_cast<std::size_t>(a.rows()));
  a.multiply<Complex, Complex>(x, y);
  return y;
}

SparseRealMatrix selection_matrix(std::span<const Index> indices, Index n) {
  std::vector<Index> ptr(indices.size() + 1);
  std::iota(ptr.begin(), ptr.end(), Index{0});
  std::vector<Index> col(indices.begin(), indices.end());
  for (Index c : col)
    if (c < 0 || c >= n) throw std::out_of_range("selection_matrix: index out of range");
  return SparseRealMatrix(static_cast<Index>(indices.size()), n, std::move(ptr), std::move(col),
                          std::vector<double>(indices.size(), 1.0));
}

SparseComplexMatrix triple_product(const SparseRealMatrix& r, const SparseComplexMatrix& a,
                                   const SparseRealMatrix& rt) {
  if (r.cols() != a.rows() || a.cols() != rt.rows())
    throw std::invalid_argument("triple_product: dimension mismatch");
  return sparse_multiply(sparse_multiply(r, a), rt);
}

SparseComplexMatrix principal_minor(const SparseComplexMatrix& a, std::span<const Index> indices) {
  if (a.rows() != a.cols()) throw std::invalid_argument("principal_minor: matrix not square");
  std::vector<Index> local(static_cast<std::size_t>(a.cols()), -1);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] < 0 || indices[r] >= a.cols())
      throw std::out_of_range("principal_minor: index out of range");
    local[indices[r]] = static_cast<Index>(r);
  }
  std::vector<Triplet<Complex>> trips;
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const Index i = indices[r];
    for (Index p = a.row_ptr()[i]; p < a.row_ptr()[i + 1]; ++p) {
      const Index c = local[a.col_idx()[p]];
      if (c >= 0) trips.push_back({static_cast<Index>(r), c, a.values()[p]});
    }
  }
  const auto m = static_cast<Index>(indices.size());
  return SparseComplexMatrix::from_triplets(m, m, std::move(trips));
}

DenseLU lu_factor(const DenseMatrix& a, const std::string& context, double pivot_tol) {
  if (a.rows() != a.cols()) throw std::invalid_argument("lu_factor: matrix not square");
  DenseLU out;
  out.n_ = a.rows();
  if (out.n_ == 0) return out;
  out.lu_.compute(a);
  const double scale = a.cwiseAbs().maxCoeff();
  const auto& lu = out.lu_.matrixLU();
  for (Index i = 0; i < out.n_; ++i) {
    const double piv = std::abs(lu(i, i));
    if (!(piv > pivot_tol * scale)) {
      std::ostringstream msg;
      msg << "lu_factor: " << context << " is singular to working precision (pivot " << i
          << " = " << piv << ", scale " << scale << ")";
      throw SingularMatrixError(msg.str());
    }
  }
  return out;
}

CVector DenseLU::solve(std::span<const Complex> b) const {
  if (static_cast<Index>(b.size()) != n_) throw std::invalid_argument("lu_solve: size mismatch");
  if (n_ == 0) return {};
  Eigen::Map<const Eigen::VectorXcd> bv(b.data(), n_);
  Eigen::VectorXcd x = lu_.solve(bv);
  return CVector(x.data(), x.data() + n_);
}

DenseMatrix DenseLU::solve(const DenseMatrix& b) const {
  if (b.rows() != n_) throw std::invalid_argument("lu_solve: size mismatch");
  return lu_.solve(b);
}

CVector lu_solve(const DenseLU& lu, std::span<const Complex> b) { return lu.solve(b); }

Complex dot(std::span<const Complex> x, std::span<const Complex> y) {
  if (x.size() != y.size()) throw std::invalid_argument("dot: size mismatch");
  Complex s{};
  for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(y[i]) * x[i];
  return s;
}

double norm2(std::span<const Complex> x) { return std::sqrt(dot(x, x).real()); }

Complex weighted_dot(const SparseRealMatrix& d, std::span<const Complex> x,
                     std::span<const Complex> y) {
  const CVector dx = spmv(d, x);
  return dot(dx, y);
}

double weighted_norm(const SparseRealMatrix& d, std::span<const Complex> x) {
  const double q = weighted_dot(d, x, x).real();
  if (q < 0.0) throw std::domain_error("weighted_norm: weight matrix is not positive definite");
  return std::sqrt(q);
}

struct DirectSolver::SparseImpl {
  Eigen::SparseLU<Eigen::SparseMatrix<Complex>, Eigen::COLAMDOrdering<int>> lu;
};

DirectSolver::DirectSolver(const SparseComplexMatrix& a, const std::string& context,
                           Backend backend, Index dense_limit)
    : n_(a.rows()) {
  if (a.rows() != a.cols()) throw std::invalid_argument("DirectSolver: matrix not square");
  backend_ = backend == Backend::automatic ? (n_ <= dense_limit ? Backend::dense : Backend::sparse)
                                           : backend;
  if (backend_ == Backend::dense) {
    dense_ = lu_factor(a.to_dense(), context);
    return;
  }
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(static_cast<std::size_t>(a.nnz()));
  for (Index i = 0; i < n_; ++i)
    for (Index p = a.row_ptr()[i]; p < a.row_ptr()[i + 1]; ++p)
      trips.emplace_back(static_cast<int>(i), static_cast<int>(a.col_idx()[p]), a.values()[p]);
  Eigen::SparseMatrix<Complex> m(static_cast<int>(n_), static_cast<int>(n_));
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  sparse_ = std::make_unique<SparseImpl>();
  sparse_->lu.analyzePattern(m);
  sparse_->lu.factorize(m);
  if (sparse_->lu.info() != Eigen::Success)
    throw SingularMatrixError("DirectSolver: sparse LU of " + context +
                              " failed: " + sparse_->lu.lastErrorMessage());
}

DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;
DirectSolver& DirectSolver::operator=(DirectSolver&&) noexcept = default;

void DirectSolver::solve_in_place(std::span<Complex> x) const {
  if (static_cast<Index>(x.size()) != n_) throw std::invalid_argument("DirectSolver: size mismatch");
  if (n_ == 0) return;
  if (backend_ == Backend::dense) {
    CVector y = dense_.solve(std::span<const Complex>(x.data(), x.size()));
    std::copy(y.begin(), y.end(), x.begin());
    return;
  }
  Eigen::Map<Eigen::VectorXcd> xv(x.data(), n_);
  Eigen::VectorXcd y = sparse_->lu.solve(xv);
  xv = y;
}

CVector DirectSolver::solve(std::span<const Complex> b) const {
  CVector x(b.begin(), b.end());
  solve_in_place(x);
  return x;
}

}  // namespace mxdd
