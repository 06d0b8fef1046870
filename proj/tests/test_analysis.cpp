#include <doctest.h>

#include <numbers>
#include <random>

#include "mxdd/analysis.hpp"

using namespace mxdd;

namespace {

std::shared_ptr<const Mesh> cube(int n) { return std::make_shared<const Mesh>(Mesh::cube(n)); }

DenseMatrix diag(std::initializer_list<Complex> d) {
  DenseMatrix m = DenseMatrix::Zero(static_cast<Index>(d.size()), static_cast<Index>(d.size()));
  Index i = 0;
  for (const auto& x : d) {
    m(i, i) = x;
    ++i;
  }
  return m;
}

}  // namespace

TEST_CASE("z and theta") {
  const auto a = z_theta(1.0, 0.0);
  CHECK(a.z == Complex(1.0, 0.0));
  CHECK(a.theta == Complex(-1.0, 0.0));

  const auto b = z_theta(1.0, 1.0);
  const Complex ref = std::pow(2.0, 0.25) * std::polar(1.0, std::numbers::pi / 8);
  CHECK(std::abs(b.z - ref) <= 1e-15);
  CHECK(std::abs(b.z * b.z - Complex(1.0, 1.0)) <= 1e-15);
  CHECK(b.z.real() == doctest::Approx(1.09868).epsilon(1e-5));
  CHECK(b.z.imag() == doctest::Approx(0.45509).epsilon(1e-4));

  const auto p = z_theta(2.0, 3.0), m = z_theta(2.0, -3.0);
  CHECK(std::abs(m.z + std::conj(p.z)) <= 1e-15);
  for (double k : {0.5, 1.0, 3.0}) {
    for (double xi : {-5.0, -0.1, 0.1, 5.0}) {
      const auto zt = z_theta(k, xi);
      CHECK(zt.z.imag() > 0.0);
      CHECK((xi > 0 ? 1 : -1) * zt.z.real() > 0.0);
      CHECK(std::abs(std::abs(zt.theta) - 1.0) <= 1e-15);
      CHECK(std::abs(zt.z * zt.z - Complex(k * k, xi)) <= 1e-13 * (k * k + std::abs(xi)));
    }
  }
  CHECK_THROWS(z_theta(0.0, 1.0));
  CHECK_THROWS(z_theta(-1.0, 1.0));
}

TEST_CASE("absorption ratio bounds over a wavenumber grid") {
  for (double k = 1.0; k <= 100.0; k += 0.5) {
    const auto [r1, r2] = absorption_ratios(k, k * k);
    CHECK(r1 >= 1.0);
    CHECK(r1 <= std::pow(2.0, 0.25) * (1 + 1e-15));
    CHECK(r2 >= 0.35);
    CHECK(r2 <= 0.5);
  }
}

TEST_CASE("coercivity identity") {
  for (int n : {1, 2, 3}) {
    EdgeSpace space(cube(n), BoundaryCondition::impedance);
    const SystemBundle sys = assemble(space, Coefficients::homogeneous(2.0, 4.0));
    CHECK(coercivity_check(sys.S, sys.M, 2.0, 4.0, random_probes(space.size(), 50, 3)) <= 1e-12);
  }
  // Gradient probes: v*Sv = 0.
  auto mesh = cube(2);
  EdgeSpace space(mesh, BoundaryCondition::impedance);
  const SystemBundle sys = assemble(space, Coefficients::homogeneous(2.0, 4.0));
  std::vector<double> phi(static_cast<std::size_t>(mesh->num_vertices()));
  for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = std::sin(1.0 + i);
  const CVector g = discrete_gradient(space, phi);
  CHECK(std::abs(dot(spmv(sys.S, g), g)) <= 1e-12);
  const std::vector<CVector> probes{g};
  CHECK(coercivity_check(sys.S, sys.M, 2.0, 4.0, probes) <= 1e-12);
}

TEST_CASE("convex hull distance") {
  const std::vector<Complex> seg{Complex(1, 0), Complex(0, 1)};
  CHECK(hull_distance_to_origin(seg) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  const std::vector<Complex> around{Complex(1, 0), Complex(-1, 1), Complex(-1, -1)};
  CHECK(hull_distance_to_origin(around) == 0.0);
  const std::vector<Complex> pt{Complex(3, 4)};
  CHECK(hull_distance_to_origin(pt) == 5.0);
  const std::vector<Complex> square{Complex(2, -1), Complex(3, -1), Complex(3, 1), Complex(2, 1), Complex(2.5, 0)};
  CHECK(hull_distance_to_origin(square) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS(hull_distance_to_origin(std::vector<Complex>{}));
}

TEST_CASE("field of values examples") {
  const auto I8 = Eigen::MatrixXd::Identity(8, 8);
  const auto r = fov(DenseMatrix::Identity(8, 8), I8);
  CHECK(r.dist_to_origin == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.norm_D == doctest::Approx(1.0).epsilon(1e-14));
  for (const auto& p : r.boundary_points) CHECK(std::abs(p - 1.0) <= 1e-14);

  const auto I2 = Eigen::MatrixXd::Identity(2, 2);
  const auto s = fov(diag({1.0, Complex(0, 1)}), I2, {64, 2000});
  CHECK(s.dist_to_origin == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-12));
  CHECK(s.norm_D == doctest::Approx(1.0).epsilon(1e-12));

  const auto h = fov(diag({2.0, 4.0}), I2);
  CHECK(h.dist_to_origin == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(h.norm_D == doctest::Approx(4.0).epsilon(1e-12));
  for (const auto& p : h.boundary_points) CHECK(std::abs(p.imag()) <= 1e-10);

  CHECK_THROWS(fov(DenseMatrix::Identity(3, 3), Eigen::MatrixXd::Identity(3, 3), {4, 2000}));
  CHECK_THROWS(fov(DenseMatrix::Identity(3, 3), -Eigen::MatrixXd::Identity(3, 3)));
  CHECK_THROWS(fov(DenseMatrix::Identity(3, 3), Eigen::MatrixXd::Identity(3, 3), {8, 2}));
}

TEST_CASE("field of values of random matrices in a weighted product") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Index n = 30;
  for (int trial = 0; trial < 3; ++trial) {
    DenseMatrix C(n, n);
    Eigen::MatrixXd G(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        C(i, j) = Complex(u(rng), u(rng)) / std::sqrt(double(n));
        G(i, j) = u(rng);
      }
    C += 3.0 * DenseMatrix::Identity(n, n);
    const Eigen::MatrixXd D = G * G.transpose() + n * Eigen::MatrixXd::Identity(n, n);
    const auto r = fov(C, D, {48, 2000});
    CHECK(r.rayleigh_mismatch <= 1e-10);
    CHECK(r.dist_lower_bound <= r.dist_to_origin + 1e-12);
    double minabs = 1e300;
    for (const auto& p : r.boundary_points) minabs = std::min(minabs, std::abs(p));
    CHECK(r.dist_to_origin <= minabs + 1e-14);

    // Oracle norm from the generalized eigenproblem C^* D C x = s^2 D x.
    const DenseMatrix Dc = D.cast<Complex>();
    Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> ges(C.adjoint() * Dc * C, Dc);
    CHECK(r.norm_D == doctest::Approx(std::sqrt(ges.eigenvalues()(n - 1))).epsilon(1e-10));

    // Random D-Rayleigh quotients lie on the inner side of every support line.
    for (int probe = 0; probe < 20; ++probe) {
      Eigen::VectorXcd x(n);
      for (Index i = 0; i < n; ++i) x(i) = Complex(u(rng), u(rng));
      const Complex q = (Dc * x).dot(C * x) / (Dc * x).dot(x);
      CHECK(std::abs(q) <= r.norm_D * (1 + 1e-12));
      CHECK(std::abs(q) >= r.dist_lower_bound - 1e-12);
    }

    // Hermitian part gives a real interval.
    const DenseMatrix H = 0.5 * (C + C.adjoint());
    const auto rh = fov(H, Eigen::MatrixXd::Identity(n, n), {16, 2000});
    for (const auto& p : rh.boundary_points) CHECK(std::abs(p.imag()) <= 1e-10);
  }
}

TEST_CASE("Elman bound") {
  const ElmanBound zero = elman(2.0, 2.0);
  CHECK(zero.gamma_beta == 0.0);
  CHECK(zero.bound(1) == 0.0);
  CHECK(zero.bound(5) == 0.0);

  const ElmanBound half_pi = elman(1.0, 1e-300);
  CHECK(half_pi.gamma_beta == doctest::Approx(1.0).epsilon(1e-12));

  const ElmanBound third = elman(2.0, 1.0);
  CHECK(third.beta == doctest::Approx(std::numbers::pi / 3).epsilon(1e-15));
  CHECK(third.gamma_beta == doctest::Approx(2.0 * std::sin(std::numbers::pi / 10)).epsilon(1e-15));
  CHECK(third.gamma_beta == doctest::Approx(0.61803).epsilon(1e-5));
  for (int m = 1; m < 30; ++m) CHECK(third.bound(m) < third.bound(m - 1));
  const auto m = third.m_for_target(1e-6);
  REQUIRE(m.has_value());
  CHECK(third.bound(*m) <= 1e-6);
  CHECK(third.bound(*m - 1) > 1e-6);
  CHECK_THROWS_AS(elman(1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(elman(1.0, 2.0), std::invalid_argument);
  CHECK_THROWS(third.m_for_target(1.5));
}

TEST_CASE("Elman bound dominates weighted GMRES on desk problems") {
  int checked = 0;
  for (auto [k, n, p, layers, nc] : {std::tuple{2.0, 4, 2, 2, 2}, std::tuple{1.0, 4, 2, 2, 2},
                                     std::tuple{2.0, 4, 2, 1, 2}}) {
    EdgeSpace space(cube(n), BoundaryCondition::pec);
    const SystemBundle sys = assemble(space, Coefficients::homogeneous(k, k * k));
    const auto d = make_decomposition(space, p, layers, nc);
    const SchwarzPreconditioner pc(sys, d, parse_preconditioner("AS2", k * k, Side::left));
    const DenseMatrix C = dense_operator(pc.as_map(), space.size()) * sys.A.to_dense();
    const auto r = fov(C, dense_real(sys.Dk), {32, 2000});
    if (!(r.dist_to_origin > 0.0)) continue;
    const ElmanBound eb = elman(r.norm_D, r.dist_to_origin);
    KrylovConfig cfg;
    cfg.side = Side::left;
    cfg.weight = &sys.Dk;
    cfg.tol = 1e-10;
    const auto rep = gmres(as_linear_map(sys.A), sys.rhs, pc.as_map(), cfg);
    for (std::size_t m = 0; m < rep.residual_history.size(); ++m)
      CHECK(eb.bound(static_cast<int>(m)) >= rep.residual_history[m]);
    ++checked;
  }
  CHECK(checked >= 2);
}

TEST_CASE("projection consistency") {
  // Single subdomain with coarse = fine: T = 2 I.
  {
    EdgeSpace space(cube(3), BoundaryCondition::pec);
    const SystemBundle sys = assemble(space, Coefficients::homogeneous(2.0, 4.0));
    const auto d = make_decomposition(space, 1, 0, 3);
    const SchwarzPreconditioner pc(sys, d, parse_preconditioner("AS2", 4.0, Side::left));
    const auto probes = random_probes(space.size(), 5, 1);
    CHECK(projection_consistency(sys, d, pc, probes) <= 1e-11);
    for (const auto& v : probes) {
      const CVector bav = pc.apply(spmv(sys.A, v));
      const Complex lhs = dot(spmv(sys.Dk, v), bav);
      const Complex rhs = 2.0 * dot(spmv(sys.Dk, v), v);
      CHECK(std::abs(lhs - rhs) <= 1e-11 * std::abs(rhs));
    }
    const std::vector<CVector> zero{CVector(static_cast<std::size_t>(space.size()))};
    CHECK(projection_consistency(sys, d, pc, zero) == 0.0);
  }
  for (auto bc : {BoundaryCondition::pec, BoundaryCondition::impedance}) {
    const int n = bc == BoundaryCondition::pec ? 4 : 2;
    EdgeSpace space(cube(n), bc);
    const SystemBundle sys = assemble(space, Coefficients::homogeneous(2.0, 4.0));
    const auto d = make_decomposition(space, 2, 1, bc == BoundaryCondition::pec ? 2 : 1);
    const SchwarzPreconditioner pc(sys, d, parse_preconditioner("AS2", 4.0, Side::left));
    CHECK(projection_consistency(sys, d, pc, random_probes(space.size(), 10, 9)) <= 1e-11);
    CHECK_THROWS(projection_consistency(sys, d, pc, random_probes(space.size(), 1, 9), 10));
  }
}

TEST_CASE("relative error sweep") {
  const std::vector<double> xs{0.0, 0.625, 1.25, 2.5};
  const auto pts = relative_error_sweep(5.0, xs, 4);
  REQUIRE(pts.size() == 4);
  CHECK(pts[0].ratio == 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    CHECK(pts[i].ratio > pts[i - 1].ratio);
  }
  double lo = 1e300, hi = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double slope = pts[i].ratio / (pts[i].xi / 5.0);
    lo = std::min(lo, slope);
    hi = std::max(hi, slope);
  }
  CHECK(hi / lo < 2.0);
  const std::vector<double> neg{-1.0};
  CHECK_THROWS(relative_error_sweep(5.0, neg, 2));
}
