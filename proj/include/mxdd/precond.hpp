#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mxdd/decomp.hpp"
#include "mxdd/fem.hpp"
#include "mxdd/krylov.hpp"
#include "mxdd/linalg.hpp"

namespace mxdd {

enum class Family { as, ras, impras };
enum class Levels { one, two };
enum class Correction { none, additive, hybrid, adef1 };

struct PreconditionerSpec {
  Family family = Family::as;
  Levels levels = Levels::two;
  Correction correction = Correction::additive;
  double xi_prec = 0.0;
  Side side = Side::right;
  /// Use A at xi_prec instead of the solved matrix inside hybrid/adef1.
  bool correction_uses_prec_matrix = false;

  /// Throws on inconsistent combinations.
  void validate() const;
  /// Short identifier such as "AS1", "AS2", "RAS2", "HRAS", "ImpADEF1".
  std::string id() const;
};

/// Parses identifiers produced by PreconditionerSpec::id (case-insensitive).
PreconditionerSpec parse_preconditioner(const std::string& id, double xi_prec, Side side = Side::right);

struct SetupOptions {
  /// Matrices of at most this order are factored densely.
  Index dense_limit = 400;
};

/// A built Schwarz preconditioner: a fixed linear map v -> B^{-1} v.
class SchwarzPreconditioner {
 public:
  /// `problem` is the system being solved (at xi_prob); local and coarse
  /// matrices are rebuilt from its real parts at spec.xi_prec. `problem`
  /// must outlive the preconditioner.
  SchwarzPreconditioner(const SystemBundle& problem, const Decomposition& decomp,
                        const PreconditionerSpec& spec, const SetupOptions& options = {});
  ~SchwarzPreconditioner();
  SchwarzPreconditioner(SchwarzPreconditioner&&) noexcept;
  SchwarzPreconditioner& operator=(SchwarzPreconditioner&&) noexcept;

  Index size() const { return n_; }
  const PreconditionerSpec& spec() const { return spec_; }
  double setup_time_s() const { return setup_time_s_; }

  void apply(std::span<const Complex> v, std::span<Complex> out) const;
  CVector apply(std::span<const Complex> v) const;
  LinearMap as_map() const;

  // Pieces exposed for oracle checks.
  std::size_t num_subdomains() const { return locals_.size(); }
  const std::vector<Index>& local_dofs(std::size_t l) const { return locals_[l].dofs; }
  const std::vector<double>& local_weights(std::size_t l) const { return locals_[l].weights; }
  const SparseComplexMatrix& local_matrix(std::size_t l) const { return locals_[l].matrix; }
  bool has_coarse() const { return coarse_ != nullptr; }
  const SparseComplexMatrix& coarse_matrix() const;
  const SparseRealMatrix& coarse_restriction() const;
  /// The matrix used inside hybrid/adef1 corrections.
  const SparseComplexMatrix& correction_matrix() const { return *correction_a_; }

 private:
  struct Local {
    std::vector<Index> dofs;
    std::vector<double> weights;  // ones for AS
    SparseComplexMatrix matrix;
    std::unique_ptr<DirectSolver> solver;
  };
  struct Coarse {
    SparseRealMatrix r0;
    SparseRealMatrix r0t;
    SparseComplexMatrix matrix;
    std::unique_ptr<DirectSolver> solver;
  };

  void apply_one_level(std::span<const Complex> v, std::span<Complex> out) const;
  void apply_coarse(std::span<const Complex> v, std::span<Complex> out) const;

  PreconditionerSpec spec_;
  Index n_ = 0;
  std::vector<Local> locals_;
  std::unique_ptr<Coarse> coarse_;
  std::shared_ptr<const SparseComplexMatrix> prec_a_;
  std::shared_ptr<const SparseComplexMatrix> correction_a_;
  double setup_time_s_ = 0.0;
};

/// A at a different absorption, rebuilt from the real operator parts.
SparseComplexMatrix system_matrix_at(const SystemBundle& system, double xi);

}  // namespace mxdd
