#include "mxdd/krylov.hpp"

#include <chrono>
#include <cmath>
#include <random>

namespace mxdd {

LinearMap as_linear_map(const SparseComplexMatrix& a) {
  return [&a](std::span<const Complex> x, std::span<Complex> y) { a.multiply<Complex, Complex>(x, y); };
}

CVector random_vector(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CVector v(static_cast<std::size_t>(n));
  for (auto& x : v) {
    const double re = u(rng);
    const double im = u(rng);
    x = Complex(re, im);
  }
  return v;
}

namespace {

struct Weight {
  const SparseRealMatrix* d;
  void apply(std::span<const Complex> x, std::span<Complex> y) const {
    if (d)
      d->multiply<Complex, Complex>(x, y);
    else
      std::copy(x.begin(), x.end(), y.begin());
  }
};

}  // namespace

KrylovReport gmres(const LinearMap& op, std::span<const Complex> rhs, const LinearMap& precond,
                   const KrylovConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto n = static_cast<Index>(rhs.size());
  if (config.weight && (config.weight->rows() != n || config.weight->cols() != n))
    throw std::invalid_argument("gmres: weight matrix has wrong size");
  if (config.maxit < 0) throw std::invalid_argument("gmres: negative iteration limit");
  const Weight w{config.weight};
  const auto nn = static_cast<std::size_t>(n);

  KrylovReport rep;
  rep.seed = config.seed;
  CVector x0 = config.initial == InitialGuess::random ? random_vector(n, config.seed) : CVector(nn);

  auto residual = [&](const CVector& x) {
    CVector r(nn);
    op(x, r);
    for (std::size_t i = 0; i < nn; ++i) r[i] = rhs[i] - r[i];
    return r;
  };
  auto apply_prec = [&](std::span<const Complex> in, std::span<Complex> out) {
    if (precond)
      precond(in, out);
    else
      std::copy(in.begin(), in.end(), out.begin());
  };

  const CVector r0 = residual(x0);
  CVector z(nn);
  if (config.side == Side::left)
    apply_prec(r0, z);
  else
    z = r0;

  std::vector<CVector> v;   // basis
  std::vector<CVector> dv;  // D v_i
  CVector tmp(nn);
  w.apply(z, tmp);
  const double beta = std::sqrt(std::max(0.0, dot(tmp, z).real()));
  rep.residual_history.push_back(beta > 0.0 ? 1.0 : 0.0);
  if (beta == 0.0) {
    rep.solution = x0;
    rep.converged = true;
    rep.solve_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
  }
  v.emplace_back(nn);
  dv.emplace_back(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    v[0][i] = z[i] / beta;
    dv[0][i] = tmp[i] / beta;
  }

  // Column j of the Hessenberg matrix is h[j], length j + 2.
  std::vector<CVector> h;
  std::vector<double> cs;
  std::vector<Complex> sn;
  CVector g{Complex(beta, 0.0)};
  CVector wv(nn), pv(nn);
  int m = 0;
  for (int j = 0; j < config.maxit; ++j) {
    if (config.side == Side::right) {
      apply_prec(v[j], pv);
      op(pv, wv);
    } else {
      op(v[j], pv);
      apply_prec(pv, wv);
    }
    CVector col(static_cast<std::size_t>(j) + 2);
    w.apply(wv, tmp);
    const double wnorm0 = std::sqrt(std::max(0.0, dot(tmp, wv).real()));
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i <= j; ++i) {
        const Complex hij = dot(wv, dv[i]);
        col[i] += hij;
        for (std::size_t r = 0; r < nn; ++r) wv[r] -= hij * v[i][r];
      }
    }
    w.apply(wv, tmp);
    const double hnext = std::sqrt(std::max(0.0, dot(tmp, wv).real()));
    col[j + 1] = hnext;

    for (int i = 0; i < j; ++i) {
      const Complex a = col[i], b = col[i + 1];
      col[i] = cs[i] * a + sn[i] * b;
      col[i + 1] = -std::conj(sn[i]) * a + cs[i] * b;
    }
    const Complex a = col[j], b = col[j + 1];
    double c;
    Complex s;
    const double aa = std::abs(a), bb = std::abs(b);
    if (bb == 0.0) {
      c = 1.0;
      s = 0.0;
    } else if (aa == 0.0) {
      c = 0.0;
      s = std::conj(b) / bb;
    } else {
      const double r = std::hypot(aa, bb);
      c = aa / r;
      s = (a / aa) * std::conj(b) / r;
    }
    cs.push_back(c);
    sn.push_back(s);
    col[j] = c * a + s * b;
    col[j + 1] = 0.0;
    g.push_back(-std::conj(s) * g[j]);
    g[j] = c * g[j];
    h.push_back(std::move(col));
    m = j + 1;

    const double rel = std::abs(g[j + 1]) / beta;
    rep.residual_history.push_back(rel);
    const bool happy = !(hnext > 1e-14 * wnorm0);
    if (rel <= config.tol || happy) {
      rep.breakdown = happy && rel > config.tol;
      break;
    }
    v.emplace_back(nn);
    dv.emplace_back(nn);
    for (std::size_t r = 0; r < nn; ++r) {
      v[j + 1][r] = wv[r] / hnext;
      dv[j + 1][r] = tmp[r] / hnext;
    }
  }

  CVector y(static_cast<std::size_t>(m));
  for (int i = m - 1; i >= 0; --i) {
    Complex s = g[i];
    for (int k = i + 1; k < m; ++k) s -= h[k][i] * y[k];
    y[i] = s / h[i][i];
  }
  CVector u(nn);
  for (int i = 0; i < m; ++i)
    for (std::size_t r = 0; r < nn; ++r) u[r] += y[i] * v[i][r];
  rep.solution = x0;
  if (config.side == Side::right) {
    apply_prec(u, pv);
    u = pv;
  }
  for (std::size_t r = 0; r < nn; ++r) rep.solution[r] += u[r];
  rep.iterations = m;
  rep.converged = rep.residual_history.back() <= config.tol;

  if (config.check_orthogonality) {
    double err = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t k = 0; k <= i; ++k) {
        const Complex ip = dot(v[i], dv[k]);
        err = std::max(err, std::abs(ip - (i == k ? 1.0 : 0.0)));
      }
    rep.orthogonality_error = err;
    rep.orthogonality_warning = err > config.orthogonality_tol;
  }

  const CVector rf = residual(rep.solution);
  w.apply(rf, tmp);
  const double rfn = std::sqrt(std::max(0.0, dot(tmp, rf).real()));
  w.apply(r0, tmp);
  const double r0n = std::sqrt(std::max(0.0, dot(tmp, r0).real()));
  rep.true_relative_residual = r0n > 0.0 ? rfn / r0n : 0.0;
  rep.solve_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace mxdd
