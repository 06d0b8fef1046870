#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mxdd/analysis.hpp"
#include "mxdd/decomp.hpp"
#include "mxdd/experiment.hpp"
#include "mxdd/fem.hpp"
#include "mxdd/mesh.hpp"
#include "mxdd/precond.hpp"

using namespace mxdd;

namespace {

int cmd_run(const std::string& config_path, const std::string& preset_name, const std::string& out,
            const std::vector<std::string>& overrides, std::int64_t seed, bool seed_given) {
  ExperimentConfig cfg = preset_name.empty() ? ExperimentConfig{} : preset(preset_name);
  if (!config_path.empty()) {
    std::ifstream f(config_path);
    if (!f) throw ConfigError("cannot read config file '" + config_path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    apply_config_text(cfg, ss.str());
  }
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!out.empty()) cfg.out = out;
  if (seed_given) cfg.seed = static_cast<std::uint64_t>(seed);
  std::cout << "# effective configuration\n" << describe(cfg);
  const RunOutput res = run_table(cfg, std::cout);
  std::cout << "# results\n" << to_csv(cfg, res);
  return 0;
}

int cmd_mesh_info(int n) {
  const Mesh m = Mesh::cube(n);
  std::cout << "vertices=" << m.num_vertices() << " tets=" << m.num_tets() << " edges=" << m.num_edges()
            << "\n";
  return 0;
}

int cmd_coercivity(double k, double xi, int n, int probes, std::uint64_t seed) {
  auto mesh = std::make_shared<const Mesh>(Mesh::cube(n));
  EdgeSpace space(mesh, BoundaryCondition::pec);
  const SystemBundle sys = assemble(space, Coefficients::homogeneous(k, xi));
  const auto zt = z_theta(k, xi);
  const auto v = random_probes(space.size(), probes, seed);
  const double dev = coercivity_check(sys.S, sys.M, k, xi, v);
  std::printf("z=%.12g%+.12gi theta=%.12g%+.12gi dofs=%lld probes=%d max_deviation=%.3e\n", zt.z.real(),
              zt.z.imag(), zt.theta.real(), zt.theta.imag(), static_cast<long long>(space.size()), probes, dev);
  return 0;
}

struct FovArgs {
  std::string matrix = "preconditioned";
  int size = 4;
  double k = 3;
  std::string xi = "k2";
  int n = 4;
  int p = 2;
  int coarse = 2;
  int layers = 2;
  std::string prec = "AS2";
  int angles = 32;
  int cap = 2000;
  bool points = false;
};

int cmd_fov(const FovArgs& a) {
  FovResult r;
  if (a.matrix == "identity") {
    r = fov(DenseMatrix::Identity(a.size, a.size), Eigen::MatrixXd::Identity(a.size, a.size),
            {a.angles, a.cap});
  } else if (a.matrix == "preconditioned") {
    auto mesh = std::make_shared<const Mesh>(Mesh::cube(a.n));
    EdgeSpace space(mesh, BoundaryCondition::pec);
    const double xi = XiRule::parse(a.xi).eval(a.k);
    const SystemBundle sys = assemble(space, Coefficients::homogeneous(a.k, xi));
    const Decomposition d = make_decomposition(space, a.p, a.layers, a.coarse);
    const SchwarzPreconditioner prec(sys, d, parse_preconditioner(a.prec, xi, Side::left));
    const DenseMatrix A = sys.A.to_dense();
    DenseMatrix C(A.rows(), A.cols());
    CVector col(static_cast<std::size_t>(A.rows()));
    for (Index j = 0; j < A.cols(); ++j) {
      prec.apply(std::span<const Complex>(A.col(j).data(), col.size()), col);
      for (Index i = 0; i < A.rows(); ++i) C(i, j) = col[i];
    }
    r = fov(C, dense_real(sys.Dk), {a.angles, a.cap});
    std::printf("dofs=%lld preconditioner=%s\n", static_cast<long long>(A.rows()), prec.spec().id().c_str());
  } else {
    throw std::invalid_argument("fov: --matrix must be identity or preconditioned");
  }
  if (a.points)
    for (const auto& p : r.boundary_points) std::printf("%.12g %.12g\n", p.real(), p.imag());
  std::printf("dist=%.12g dist_lower=%.12g norm=%.12g angles=%d\n", r.dist_to_origin, r.dist_lower_bound,
              r.norm_D, r.n_angles);
  if (r.dist_to_origin > 0.0) {
    const ElmanBound b = elman(r.norm_D, std::min(r.dist_to_origin, r.norm_D));
    const auto m = b.m_for_target(1e-6);
    std::printf("beta=%.12g gamma_beta=%.12g m_for_1e-6=%s\n", b.beta, b.gamma_beta,
                m ? std::to_string(*m).c_str() : "none");
  }
  return 0;
}

int cmd_abs_error(double k, int n, const std::vector<double>& factors) {
  std::vector<double> xis;
  for (double f : factors) xis.push_back(f * k);
  std::printf("%10s %12s %14s\n", "xi", "ratio", "ratio/(xi/k)");
  for (const auto& p : relative_error_sweep(k, xis, n))
    std::printf("%10.6g %12.6e %14.6e\n", p.xi, p.ratio, p.xi > 0 ? p.ratio / (p.xi / k) : 0.0);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Overlapping Schwarz preconditioners for absorptive Maxwell problems"};
  app.require_subcommand(1);

  std::string config_path, preset_name, out;
  std::vector<std::string> overrides;
  std::int64_t seed = 0;
  auto* run = app.add_subcommand("run", "Run an experiment table and write CSV");
  run->add_option("--config", config_path, "key = value configuration file");
  run->add_option("--preset", preset_name, "Preset to start from")
      ->check(CLI::IsMember(preset_names()));
  run->add_option("--out", out, "CSV output path");
  auto* seed_opt = run->add_option("--seed", seed, "Random seed for GMRES initial guesses");
  run->add_option("--set", overrides, "Override a setting, key=value (repeatable)");

  int mesh_n = 1;
  auto* mi = app.add_subcommand("mesh-info", "Print mesh entity counts");
  mi->add_option("--n", mesh_n, "Cells per axis")->required()->check(CLI::PositiveNumber);

  double ck = 2, cxi = 4;
  int cn = 2, cprobes = 200;
  std::uint64_t cseed = 1;
  auto* co = app.add_subcommand("coercivity", "Check the coercivity identity on random probes");
  co->add_option("--k", ck, "Wavenumber")->required();
  co->add_option("--xi", cxi, "Absorption")->required();
  co->add_option("--n", cn, "Cells per axis")->required()->check(CLI::PositiveNumber);
  co->add_option("--probes", cprobes, "Number of random probes");
  co->add_option("--seed", cseed, "Probe seed");

  FovArgs fa;
  auto* fo = app.add_subcommand("fov", "Field of values of a (preconditioned) operator in the D_k product");
  fo->add_option("--matrix", fa.matrix, "identity | preconditioned");
  fo->add_option("--size", fa.size, "Size for --matrix identity");
  fo->add_option("--k", fa.k, "Wavenumber");
  fo->add_option("--xi", fa.xi, "Absorption: 0, k, k2 or a number");
  fo->add_option("--n", fa.n, "Cells per axis");
  fo->add_option("--p", fa.p, "Subdomains per axis");
  fo->add_option("--coarse", fa.coarse, "Coarse cells per axis (0: none)");
  fo->add_option("--layers", fa.layers, "Overlap layers");
  fo->add_option("--prec", fa.prec, "Preconditioner id (AS1, AS2, RAS2, HRAS, ...)");
  fo->add_option("--angles", fa.angles, "Number of angles");
  fo->add_option("--cap", fa.cap, "Largest size handled densely");
  fo->add_flag("--points", fa.points, "Print the boundary points");

  double ak = 5;
  int an = 8;
  std::vector<double> afactors{0.125, 0.25, 0.5};
  auto* ae = app.add_subcommand("abs-error", "Relative error between absorptive and non-absorptive solutions");
  ae->add_option("--k", ak, "Wavenumber")->required();
  ae->add_option("--n", an, "Cells per axis");
  ae->add_option("--factors", afactors, "xi values as multiples of k");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) {
      if (config_path.empty() && preset_name.empty())
        throw ConfigError("run: give --config and/or --preset");
      return cmd_run(config_path, preset_name, out, overrides, seed, seed_opt->count() > 0);
    }
    if (*mi) return cmd_mesh_info(mesh_n);
    if (*co) return cmd_coercivity(ck, cxi, cn, cprobes, cseed);
    if (*fo) return cmd_fov(fa);
    if (*ae) return cmd_abs_error(ak, an, afactors);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
