#include "mxdd/precond.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <stdexcept>

namespace mxdd {

void PreconditionerSpec::validate() const {
  if (levels == Levels::one && correction != Correction::none)
    throw std::invalid_argument("preconditioner: one-level preconditioners take no coarse correction");
  if (levels == Levels::two && correction == Correction::none)
    throw std::invalid_argument("preconditioner: two-level preconditioners need a coarse correction");
  if (family == Family::as && levels == Levels::two && correction != Correction::additive)
    throw std::invalid_argument("preconditioner: hybrid and deflated corrections are defined for RAS only");
}

std::string PreconditionerSpec::id() const {
  const std::string prefix = family == Family::impras ? "Imp" : "";
  if (family == Family::as) return levels == Levels::one ? "AS1" : "AS2";
  if (levels == Levels::one) return prefix + "RAS1";
  switch (correction) {
    case Correction::hybrid: return prefix + "HRAS";
    case Correction::adef1: return prefix + "ADEF1";
    default: return prefix + "RAS2";
  }
}

PreconditionerSpec parse_preconditioner(const std::string& id, double xi_prec, Side side) {
  std::string s = id;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  PreconditionerSpec spec;
  spec.xi_prec = xi_prec;
  spec.side = side;
  if (s.rfind("imp", 0) == 0) {
    spec.family = Family::impras;
    s = s.substr(3);
  } else if (s == "as1" || s == "as2") {
    spec.family = Family::as;
    spec.levels = s == "as1" ? Levels::one : Levels::two;
    spec.correction = s == "as1" ? Correction::none : Correction::additive;
    return spec;
  } else {
    spec.family = Family::ras;
  }
  if (s == "ras1") {
    spec.levels = Levels::one;
    spec.correction = Correction::none;
  } else if (s == "ras2") {
    spec.correction = Correction::additive;
  } else if (s == "hras") {
    spec.correction = Correction::hybrid;
  } else if (s == "adef1") {
    spec.correction = Correction::adef1;
  } else {
    throw std::invalid_argument("unknown preconditioner '" + id +
                                "' (expected AS1, AS2, RAS1, RAS2, HRAS, ADEF1, optionally prefixed Imp)");
  }
  return spec;
}

SparseComplexMatrix system_matrix_at(const SystemBundle& system, double xi) {
  OperatorParts parts{system.S, system.M, system.Msigma,
                      system.Mb ? *system.Mb : SparseRealMatrix(system.S.rows(), system.S.cols(),
                                                                std::vector<Index>(system.S.rows() + 1, 0),
                                                                {}, {})};
  return combine_parts(parts, system.coefficients.k, xi, impedance_sign(xi));
}

SchwarzPreconditioner::SchwarzPreconditioner(const SystemBundle& problem, const Decomposition& decomp,
                                             const PreconditionerSpec& spec, const SetupOptions& options)
    : spec_(spec), n_(problem.A.rows()) {
  spec_.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const EdgeSpace& space = problem.space;
  const Mesh& mesh = space.mesh();
  if (!decomp.subdomain_dofs.empty() && problem.space.size() != n_)
    throw std::invalid_argument("preconditioner: system and space disagree");

  const double xi = spec_.xi_prec;
  const double k = problem.coefficients.k;
  auto prec_a = std::make_shared<SparseComplexMatrix>(system_matrix_at(problem, xi));
  prec_a_ = prec_a;
  if (spec_.correction_uses_prec_matrix)
    correction_a_ = prec_a_;
  else
    correction_a_ = std::shared_ptr<const SparseComplexMatrix>(std::shared_ptr<void>(), &problem.A);

  const std::size_t nsub = decomp.num_subdomains();
  locals_.resize(nsub);
  if (spec_.family == Family::impras) {
    const DofSets sets = closed_dof_sets(space, decomp.subdomain_elements);
    const auto weights = build_pou(sets, n_);
    std::vector<Index> local_map(static_cast<std::size_t>(mesh.num_edges()));
    for (std::size_t l = 0; l < nsub; ++l) {
      Local& loc = locals_[l];
      loc.dofs = sets[l];
      loc.weights = weights[l];
      std::fill(local_map.begin(), local_map.end(), Index{-1});
      std::vector<Index> dof_to_local(static_cast<std::size_t>(n_), -1);
      for (std::size_t r = 0; r < loc.dofs.size(); ++r) dof_to_local[loc.dofs[r]] = static_cast<Index>(r);
      for (Index e = 0; e < mesh.num_edges(); ++e) {
        const Index d = space.dof(e);
        if (d >= 0) local_map[e] = dof_to_local[d];
      }
      const auto& tets = decomp.subdomain_elements[l];
      std::vector<Triangle> faces = internal_boundary_faces(mesh, tets);
      if (space.bc() == BoundaryCondition::impedance)
        for (Index t : tets)
          for (Index f : mesh.tet_faces()[t])
            if (mesh.face_tets()[f][1] < 0) faces.push_back(mesh.faces()[f]);
      const OperatorParts parts = assemble_parts(mesh, tets, local_map,
                                                 static_cast<Index>(loc.dofs.size()),
                                                 problem.coefficients, faces);
      loc.matrix = combine_parts(parts, k, xi, impedance_sign(xi));
    }
  } else {
    for (std::size_t l = 0; l < nsub; ++l) {
      Local& loc = locals_[l];
      loc.dofs = decomp.subdomain_dofs[l];
      loc.weights = spec_.family == Family::ras ? decomp.pou[l]
                                                : std::vector<double>(loc.dofs.size(), 1.0);
      loc.matrix = principal_minor(*prec_a_, loc.dofs);
    }
  }
  for (std::size_t l = 0; l < nsub; ++l)
    locals_[l].solver = std::make_unique<DirectSolver>(
        locals_[l].matrix, "subdomain " + std::to_string(l), DirectSolver::Backend::automatic,
        options.dense_limit);

  if (spec_.levels == Levels::two) {
    if (!decomp.coarse)
      throw std::invalid_argument("preconditioner: two-level spec but the decomposition has no coarse space");
    coarse_ = std::make_unique<Coarse>();
    coarse_->r0 = decomp.coarse->R0;
    coarse_->r0t = coarse_->r0.transpose();
    coarse_->matrix = triple_product(coarse_->r0, *prec_a_, coarse_->r0t);
    coarse_->solver = std::make_unique<DirectSolver>(coarse_->matrix, "coarse problem",
                                                     DirectSolver::Backend::automatic,
                                                     options.dense_limit);
  }
  setup_time_s_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SchwarzPreconditioner::~SchwarzPreconditioner() = default;
SchwarzPreconditioner::SchwarzPreconditioner(SchwarzPreconditioner&&) noexcept = default;
SchwarzPreconditioner& SchwarzPreconditioner::operator=(SchwarzPreconditioner&&) noexcept = default;

const SparseComplexMatrix& SchwarzPreconditioner::coarse_matrix() const {
  if (!coarse_) throw std::logic_error("preconditioner has no coarse level");
  return coarse_->matrix;
}

const SparseRealMatrix& SchwarzPreconditioner::coarse_restriction() const {
  if (!coarse_) throw std::logic_error("preconditioner has no coarse level");
  return coarse_->r0;
}

void SchwarzPreconditioner::apply_one_level(std::span<const Complex> v, std::span<Complex> out) const {
  std::fill(out.begin(), out.end(), Complex{});
  CVector buf;
  for (const Local& loc : locals_) {
    buf.resize(loc.dofs.size());
    for (std::size_t r = 0; r < loc.dofs.size(); ++r) buf[r] = v[loc.dofs[r]];
    loc.solver->solve_in_place(buf);
    for (std::size_t r = 0; r < loc.dofs.size(); ++r) out[loc.dofs[r]] += loc.weights[r] * buf[r];
  }
}

void SchwarzPreconditioner::apply_coarse(std::span<const Complex> v, std::span<Complex> out) const {
  CVector c(static_cast<std::size_t>(coarse_->r0.rows()));
  coarse_->r0.multiply<Complex, Complex>(v, c);
  coarse_->solver->solve_in_place(c);
  coarse_->r0t.multiply<Complex, Complex>(c, out);
}

void SchwarzPreconditioner::apply(std::span<const Complex> v, std::span<Complex> out) const {
  if (static_cast<Index>(v.size()) != n_ || static_cast<Index>(out.size()) != n_)
    throw std::invalid_argument("preconditioner: dimension mismatch");
  const auto nn = static_cast<std::size_t>(n_);
  if (!coarse_) {
    apply_one_level(v, out);
    return;
  }
  const SparseComplexMatrix& a = *correction_a_;
  CVector gv(nn);
  apply_coarse(v, gv);
  switch (spec_.correction) {
    case Correction::additive: {
      apply_one_level(v, out);
      for (std::size_t i = 0; i < nn; ++i) out[i] += gv[i];
      return;
    }
    case Correction::adef1: {
      // B1 (v - A G v) + G v
      CVector w(nn);
      a.multiply<Complex, Complex>(gv, w);
      for (std::size_t i = 0; i < nn; ++i) w[i] = v[i] - w[i];
      apply_one_level(w, out);
      for (std::size_t i = 0; i < nn; ++i) out[i] += gv[i];
      return;
    }
    case Correction::hybrid: {
      // (I - G A) B1 (I - A G) v + G v
      CVector w(nn), u(nn), au(nn), gau(nn);
      a.multiply<Complex, Complex>(gv, w);
      for (std::size_t i = 0; i < nn; ++i) w[i] = v[i] - w[i];
      apply_one_level(w, u);
      a.multiply<Complex, Complex>(u, au);
      apply_coarse(au, gau);
      for (std::size_t i = 0; i < nn; ++i) out[i] = u[i] - gau[i] + gv[i];
      return;
    }
    case Correction::none:
      break;
  }
  throw std::logic_error("preconditioner: invalid correction");
}

CVector SchwarzPreconditioner::apply(std::span<const Complex> v) const {
  CVector out(v.size());
  apply(v, out);
  return out;
}

LinearMap SchwarzPreconditioner::as_map() const {
  return [this](std::span<const Complex> x, std::span<Complex> y) { apply(x, y); };
}

}  // namespace mxdd
