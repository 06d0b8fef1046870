#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mxdd/fem.hpp"
#include "mxdd/krylov.hpp"

namespace mxdd {

/// An absorption choice expressed relative to the wavenumber.
struct XiRule {
  enum class Kind { zero, k, k2, value } kind = Kind::k2;
  double value = 0.0;

  double eval(double k) const;
  std::string str() const;
  static XiRule parse(const std::string& s);
};

enum class FineRule { k15, ppw, fixed };
enum class CoarseRule { none, alpha, ppw, fixed, fine };
enum class SubRule { alpha, fixed };
enum class RunMode { gmres, error_sweep };

struct ExperimentConfig {
  RunMode mode = RunMode::gmres;
  std::vector<double> k_list{3, 4, 5, 6};
  XiRule xi_prob;
  XiRule xi_prec;
  BoundaryCondition bc = BoundaryCondition::pec;

  // fine: n ~ fine_param k^1.5 | ceil(fine_param k / 2pi) | fine_param
  FineRule fine_rule = FineRule::k15;
  double fine_param = 1.0;
  // subdomains per axis: round(sub_param k^sub_alpha) | sub_param
  SubRule sub_rule = SubRule::alpha;
  double sub_param = 0.5;
  double sub_alpha = 1.0;
  // coarse cells per axis: round(coarse_param k^coarse_alpha) | ceil(coarse_param k / 2pi) | ...
  CoarseRule coarse_rule = CoarseRule::alpha;
  double coarse_param = 0.5;
  double coarse_alpha = 1.0;

  /// "minimal" (2 layers), "generous" (overlap_factor * box width) or a layer count.
  std::string overlap = "generous";
  double overlap_factor = 0.5;

  std::vector<std::string> preconditioners{"AS2", "AS1"};
  Side side = Side::right;
  bool weighted = false;
  bool correction_uses_prec = false;
  double tol = 1e-6;
  int maxit = 200;
  InitialGuess initial = InitialGuess::random;
  std::uint64_t seed = 20240501;

  /// Material layouts, one sweep per entry: none | uniform | head | inclusion.
  std::vector<std::string> materials{"none"};
  double sigma_bg = 1.0;  // background sigma-hat = sigma_bg * k
  std::array<double, 6> box{0.25, 0.25, 0.25, 0.75, 0.75, 0.75};
  double inclusion_eps = 2.5;

  std::vector<double> error_xi_factors{0.125, 0.25, 0.5};

  Index max_local_dofs = 60000;
  bool timings = false;
  std::string out;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SizingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Applies one key = value setting. Unknown keys throw ConfigError.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Reads "key = value" lines; '#' starts a comment.
void apply_config_text(ExperimentConfig& cfg, const std::string& text);

ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// Every setting as key = value lines, in a fixed order.
std::string describe(const ExperimentConfig& cfg);

struct Sizing {
  int n = 1;
  int p_axis = 1;
  int n_coarse = 0;  // coarse cells per axis, 0 without a coarse space
  int layers = 0;
  double h = 0.0;
  double H = 0.0;
  double H_sub = 0.0;
  Index projected_local_dofs = 0;
};

/// Resolves the mesh, subdomain and coarse resolutions for one wavenumber,
/// rounding to the nearest admissible fine n (a multiple of both counts).
Sizing resolve_sizing(const ExperimentConfig& cfg, double k);

Coefficients build_coefficients(const ExperimentConfig& cfg, const std::string& material,
                                const Mesh& mesh, double k, double xi);

struct RunRecord {
  double k = 0.0;
  int n = 0;
  int n_sub = 0;
  Index n_cs = 0;
  double xi_prob = 0.0;
  double xi_prec = 0.0;
  std::string preconditioner;
  int iterations = 0;
  bool converged = false;
  double setup_time_s = 0.0;
  double gmres_time_s = 0.0;
  double final_relative_residual = 0.0;
  std::uint64_t seed = 0;
  double h = 0.0;
  double H = 0.0;
  double H_sub = 0.0;
  int layers = 0;
  Index ndof = 0;
  std::string material;
  std::string side;
  bool weighted = false;
  std::string error;
};

std::string csv_header();
std::string csv_row(const RunRecord& r);

struct ErrorRecord {
  double k;
  int n;
  double xi;
  double ratio;
};

struct RunOutput {
  std::vector<RunRecord> runs;
  std::vector<ErrorRecord> errors;
};

/// Runs every (k, material, preconditioner) cell, or the error sweep, and
/// writes the CSV to cfg.out when set. Progress lines go to `log`.
RunOutput run_table(const ExperimentConfig& cfg, std::ostream& log);

/// CSV text for the run output (the bytes written to cfg.out).
std::string to_csv(const ExperimentConfig& cfg, const RunOutput& out);

}  // namespace mxdd
