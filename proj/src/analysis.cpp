#include "mxdd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace mxdd {

ZTheta z_theta(double k, double xi) {
  if (!(k > 0.0)) throw std::invalid_argument("z_theta: k must be positive");
  const Complex w(k * k, xi);
  Complex z = std::sqrt(w);  // principal branch, Re z >= 0
  if (z.imag() < 0.0) z = -z;
  if (xi == 0.0) z = Complex(k, 0.0);
  return {z, -std::conj(z) / std::abs(z)};
}

std::pair<double, double> absorption_ratios(double k, double xi) {
  const Complex z = z_theta(k, xi).z;
  return {std::abs(z) / k, (z.imag() / std::abs(z)) / (std::abs(xi) / (k * k))};
}

std::vector<CVector> random_probes(Index n, int count, std::uint64_t seed) {
  std::vector<CVector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    CVector v = random_vector(n, seed + static_cast<std::uint64_t>(i));
    for (auto& x : v) x = 2.0 * x - Complex(1.0, 1.0);
    out.push_back(std::move(v));
  }
  return out;
}

double coercivity_check(const SparseRealMatrix& S, const SparseRealMatrix& M, double k, double xi,
                        std::span<const CVector> probes) {
  const auto [z, theta] = z_theta(k, xi);
  const double az = std::abs(z);
  double worst = 0.0;
  for (const auto& v : probes) {
    const double vsv = dot(spmv(S, v), v).real();
    const double vmv = dot(spmv(M, v), v).real();
    const Complex form = Complex(vsv, 0.0) - z * z * vmv;
    const double lhs = (theta * form).imag();
    const double rhs = (z.imag() / az) * (vsv + az * az * vmv);
    const double dev = std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300);
    worst = std::max(worst, dev);
  }
  return worst;
}

double hull_distance_to_origin(std::span<const Complex> points) {
  if (points.empty()) throw std::invalid_argument("hull_distance_to_origin: no points");
  std::vector<std::pair<double, double>> p;
  p.reserve(points.size());
  for (const auto& c : points) p.emplace_back(c.real(), c.imag());
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  auto cross = [](const std::pair<double, double>& o, const std::pair<double, double>& a,
                  const std::pair<double, double>& b) {
    return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
  };
  std::vector<std::pair<double, double>> hull;
  if (p.size() >= 3) {
    hull.resize(2 * p.size());
    std::size_t h = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      while (h >= 2 && cross(hull[h - 2], hull[h - 1], p[i]) <= 0) --h;
      hull[h++] = p[i];
    }
    for (std::size_t i = p.size() - 1, t = h + 1; i-- > 0;) {
      while (h >= t && cross(hull[h - 2], hull[h - 1], p[i]) <= 0) --h;
      hull[h++] = p[i];
    }
    hull.resize(h - 1);
  } else {
    hull = p;
  }
  auto seg_dist = [](const std::pair<double, double>& a, const std::pair<double, double>& b) {
    const double dx = b.first - a.first, dy = b.second - a.second;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? -(a.first * dx + a.second * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(a.first + t * dx, a.second + t * dy);
  };
  if (hull.size() == 1) return std::hypot(hull[0].first, hull[0].second);
  if (hull.size() == 2) return seg_dist(hull[0], hull[1]);
  // Counter-clockwise polygon: origin inside iff it is left of every edge.
  bool inside = true;
  double d = std::numeric_limits<double>::infinity();
  const std::pair<double, double> origin{0.0, 0.0};
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    if (cross(a, b, origin) < 0) inside = false;
    d = std::min(d, seg_dist(a, b));
  }
  return inside ? 0.0 : d;
}

namespace {

struct TopEigen {
  double lambda = 0.0;
  Eigen::VectorXcd y;
  bool converged = false;
};

using HermitianOp = std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>;

// Largest eigenpair of a Hermitian operator by Lanczos with full
// reorthogonalization. Not converged means: use a dense solver.
TopEigen lanczos_top(const HermitianOp& op, Index n, const Eigen::VectorXcd& start, double tol) {
  const Index max_m = std::min<Index>(n, 300);
  DenseMatrix V(n, max_m);
  std::vector<double> alpha, beta;
  Eigen::VectorXcd v = start / start.norm();
  TopEigen out;
  for (Index j = 0; j < max_m; ++j) {
    V.col(j) = v;
    Eigen::VectorXcd w = op(v);
    alpha.push_back(v.dot(w).real());
    for (int pass = 0; pass < 2; ++pass) w -= V.leftCols(j + 1) * (V.leftCols(j + 1).adjoint() * w);
    const double b = w.norm();
    beta.push_back(b);
    const bool last = j + 1 == max_m || b <= 1e-14 * tol;
    if (j % 4 == 3 || last) {
      const Index m = j + 1;
      Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
      Eigen::VectorXd sd = m > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(beta.data(), m - 1))
                                 : Eigen::VectorXd();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
      tri.computeFromTridiagonal(d, sd);
      const Eigen::VectorXd s = tri.eigenvectors().col(m - 1);
      const double resid = b * std::abs(s(m - 1));
      // An invariant subspace smaller than n may miss the top eigenvalue.
      if (resid <= tol && (b > 1e-14 * tol || m == n)) {
        out.lambda = tri.eigenvalues()(m - 1);
        out.y = V.leftCols(m) * s.cast<Complex>();
        out.y /= out.y.norm();
        out.converged = true;
        return out;
      }
      if (last) return out;
    }
    v = w / b;
  }
  return out;
}

}  // namespace

FovResult fov(const DenseMatrix& C, const Eigen::MatrixXd& D, const FovOptions& options) {
  const Index n = C.rows();
  if (C.cols() != n || D.rows() != n || D.cols() != n)
    throw std::invalid_argument("fov: dimension mismatch");
  if (n > options.dense_cap)
    throw std::invalid_argument("fov: size " + std::to_string(n) + " exceeds the dense cap " +
                                std::to_string(options.dense_cap));
  if (options.n_angles < 8) throw std::invalid_argument("fov: need at least 8 angles");
  Eigen::LLT<Eigen::MatrixXd> llt(D);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("fov: weight matrix is not SPD");
  const Eigen::MatrixXd L = llt.matrixL();
  // Chat = L^T C L^{-T} is C in coordinates where the D-product is Euclidean.
  // Real and imaginary parts are handled separately since L is real.
  Eigen::MatrixXd re = L.transpose() * C.real();
  Eigen::MatrixXd im = L.transpose() * C.imag();
  re = L.triangularView<Eigen::Lower>().solve(re.transpose()).transpose();
  im = L.triangularView<Eigen::Lower>().solve(im.transpose()).transpose();
  DenseMatrix chat(n, n);
  chat.real() = re;
  chat.imag() = im;
  const DenseMatrix Dc = D.cast<Complex>();

  FovResult res;
  res.n_angles = options.n_angles;
  double lower = 0.0;
  const DenseMatrix chat_h = chat.adjoint();
  const double scale = chat.cwiseAbs().maxCoeff() * static_cast<double>(n);
  Eigen::VectorXcd start = Eigen::Map<const Eigen::VectorXcd>(random_vector(n, 7).data(), n);
  for (int a = 0; a < options.n_angles; ++a) {
    const double th = 2.0 * std::numbers::pi * a / options.n_angles;
    const Complex e = std::polar(1.0, th);
    const HermitianOp h_op = [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd {
      return 0.5 * (e * (chat * v) + std::conj(e) * (chat_h * v));
    };
    TopEigen top = lanczos_top(h_op, n, start, 1e-11 * scale);
    if (!top.converged) {
      const DenseMatrix h = 0.5 * (e * chat + std::conj(e) * chat_h);
      Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(h);
      if (eig.info() != Eigen::Success) throw std::runtime_error("fov: eigen-solver failed");
      top.lambda = eig.eigenvalues()(n - 1);
      top.y = eig.eigenvectors().col(n - 1);
    }
    const Eigen::VectorXcd& y = top.y;
    lower = std::max(lower, -top.lambda);
    const Complex p = y.dot(chat * y) / y.squaredNorm();
    Eigen::VectorXcd x(n);
    x.real() = L.transpose().triangularView<Eigen::Upper>().solve(y.real());
    x.imag() = L.transpose().triangularView<Eigen::Upper>().solve(y.imag());
    const Eigen::VectorXcd dx = Dc * x;
    const Complex q = dx.dot(C * x) / dx.dot(x);
    res.rayleigh_mismatch = std::max(res.rayleigh_mismatch, std::abs(p - q));
    res.boundary_points.push_back(p);
    // Warm start for the next angle, perturbed so no direction is missing.
    start = y + 1e-3 * Eigen::Map<const Eigen::VectorXcd>(random_vector(n, 11 + a).data(), n);
  }
  res.dist_to_origin = hull_distance_to_origin(res.boundary_points);
  res.dist_lower_bound = lower;
  const HermitianOp g_op = [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd { return chat_h * (chat * v); };
  const TopEigen g = lanczos_top(g_op, n, Eigen::Map<const Eigen::VectorXcd>(random_vector(n, 5).data(), n),
                                 1e-13 * scale * scale);
  if (g.converged) {
    res.norm_D = std::sqrt(g.lambda);
  } else {
    Eigen::BDCSVD<DenseMatrix> svd(chat);
    res.norm_D = svd.singularValues()(0);
  }
  return res;
}

double ElmanBound::bound(int m) const {
  const double c = (2.0 + 2.0 / std::sqrt(3.0)) * (2.0 + gamma_beta);
  if (m == 0) return c;
  return c * std::pow(gamma_beta, m);
}

std::optional<int> ElmanBound::m_for_target(double a) const {
  if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("m_for_target: target must lie in (0, 1)");
  if (gamma_beta >= 1.0) return std::nullopt;
  if (gamma_beta == 0.0) return 1;
  const double c = bound(0);
  const double est = std::ceil(std::log(a / c) / std::log(gamma_beta));
  if (est > 1e9) return std::nullopt;
  int m = std::max(0, static_cast<int>(est));
  while (m > 0 && bound(m - 1) <= a) --m;
  while (bound(m) > a) ++m;
  return m;
}

ElmanBound elman(double norm_D, double dist) {
  if (!(dist > 0.0))
    throw std::domain_error("elman: the field of values touches the origin; the bound does not apply");
  if (!(norm_D > 0.0) || dist > norm_D * (1.0 + 1e-12))
    throw std::invalid_argument("elman: need 0 < dist <= norm");
  ElmanBound b;
  b.beta = std::acos(std::min(1.0, dist / norm_D));
  b.gamma_beta = 2.0 * std::sin(b.beta / (4.0 - 2.0 * b.beta / std::numbers::pi));
  return b;
}

Eigen::MatrixXd dense_real(const SparseRealMatrix& a) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index p = a.row_ptr()[i]; p < a.row_ptr()[i + 1]; ++p) d(i, a.col_idx()[p]) = a.values()[p];
  return d;
}

DenseMatrix dense_operator(const LinearMap& op, Index n) {
  DenseMatrix out(n, n);
  CVector e(static_cast<std::size_t>(n)), col(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), Complex{});
    e[j] = 1.0;
    op(e, col);
    for (Index i = 0; i < n; ++i) out(i, j) = col[i];
  }
  return out;
}

double projection_consistency(const SystemBundle& system, const Decomposition& decomp,
                              const SchwarzPreconditioner& precond, std::span<const CVector> probes,
                              Index dense_cap) {
  const Index n = system.A.rows();
  if (n > dense_cap)
    throw std::invalid_argument("projection_consistency: size " + std::to_string(n) +
                                " exceeds the dense cap");
  const DenseMatrix A = system.A.to_dense();
  DenseMatrix T = DenseMatrix::Zero(n, n);
  for (const auto& dofs : decomp.subdomain_dofs) {
    const auto m = static_cast<Index>(dofs.size());
    DenseMatrix al(m, m), ral(m, n);
    for (Index r = 0; r < m; ++r) {
      for (Index c = 0; c < m; ++c) al(r, c) = A(dofs[r], dofs[c]);
      ral.row(r) = A.row(dofs[r]);
    }
    const DenseMatrix sol = lu_factor(al, "subdomain minor").solve(ral);
    for (Index r = 0; r < m; ++r) T.row(dofs[r]) += sol.row(r);
  }
  if (decomp.coarse) {
    const DenseMatrix r0 = decomp.coarse->R0.cast<Complex>().to_dense();
    const DenseMatrix a0 = r0 * A * r0.transpose();
    T += r0.transpose() * lu_factor(a0, "coarse matrix").solve(DenseMatrix(r0 * A));
  }
  const DenseMatrix dk = system.Dk.cast<Complex>().to_dense();
  double worst = 0.0;
  CVector av(static_cast<std::size_t>(n));
  for (const auto& v : probes) {
    system.A.multiply<Complex, Complex>(v, av);
    const CVector bav = precond.apply(av);
    const CVector dv = spmv(system.Dk, v);
    const Complex pipeline = dot(dv, bav);  // (B^{-1} A V)^* Dk V
    Eigen::Map<const Eigen::VectorXcd> vv(v.data(), n);
    const Eigen::VectorXcd tv = T * vv;
    const Complex oracle = tv.dot(dk * vv);
    worst = std::max(worst, std::abs(pipeline - oracle) / std::max(std::abs(oracle), 1e-300));
  }
  return worst;
}

std::vector<ErrorSweepPoint> relative_error_sweep(double k, std::span<const double> xi_list, int n) {
  auto mesh = std::make_shared<const Mesh>(Mesh::cube(n));
  EdgeSpace space(mesh, BoundaryCondition::impedance);
  const SystemBundle base = assemble(space, Coefficients::homogeneous(k, 0.0));
  const CVector e0 = DirectSolver(base.A, "impedance problem at xi = 0").solve(base.rhs);
  const double n0 = weighted_norm(base.Dk, e0);
  std::vector<ErrorSweepPoint> out;
  for (double xi : xi_list) {
    if (xi < 0.0) throw std::invalid_argument("relative_error_sweep: xi must be nonnegative");
    const SparseComplexMatrix a = system_matrix_at(base, xi);
    const CVector ex = DirectSolver(a, "impedance problem at xi = " + std::to_string(xi)).solve(base.rhs);
    CVector diff(e0.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = e0[i] - ex[i];
    out.push_back({xi, weighted_norm(base.Dk, diff) / n0});
  }
  return out;
}

}  // namespace mxdd
